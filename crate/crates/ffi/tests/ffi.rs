use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fairdiv_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn last_error() -> String {
    let p = fd_last_error_message();
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    fd_string_free(p);
    s
}

#[test]
fn solve_and_check_round_trip() {
    unsafe {
        let values = [3u64, 2, 1, 3, 2, 1];
        let mut inst = ptr::null_mut();
        assert_eq!(fd_instance_new(2, 3, values.as_ptr(), &mut inst), FdStatus::Ok);
        assert_eq!((fd_instance_n_agents(inst), fd_instance_n_goods(inst)), (2, 3));

        let mut alloc = ptr::null_mut();
        assert_eq!(fd_solve(inst, c("leximin_bf").as_ptr(), ptr::null(), &mut alloc), FdStatus::Ok);
        let mut u = [0u64; 2];
        for (i, slot) in u.iter_mut().enumerate() {
            assert_eq!(fd_allocation_utility(alloc, i, slot), FdStatus::Ok);
        }
        assert_eq!(u, [3, 3]);

        let mut holds = false;
        assert_eq!(fd_check(inst, alloc, c("EQ").as_ptr(), &mut holds), FdStatus::Ok);
        assert!(holds);
        assert_eq!(fd_check(inst, alloc, c("EPS_EQ1:1/10").as_ptr(), &mut holds), FdStatus::Ok);
        assert!(holds);

        let mut owners = [9usize; 3];
        assert_eq!(fd_allocation_owners(alloc, owners.as_mut_ptr(), 3), FdStatus::Ok);
        assert!(owners.iter().all(|&o| o < 2));
        assert_eq!(fd_allocation_owners(alloc, owners.as_mut_ptr(), 2), FdStatus::InvalidArgument);

        fd_allocation_free(alloc);
        fd_instance_free(inst);
    }
}

#[test]
fn market_algorithm_exact_and_approximate() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(fd_fixture(c("prop5_scaled_n2").as_ptr(), &mut inst), FdStatus::Ok);
        for eps in [None, Some(c("1/100"))] {
            let mut alloc = ptr::null_mut();
            let eps_ptr = eps.as_ref().map_or(ptr::null(), |e| e.as_ptr());
            assert_eq!(fd_solve(inst, c("alg_eq1_po").as_ptr(), eps_ptr, &mut alloc), FdStatus::Ok);
            let mut holds = false;
            assert_eq!(fd_check(inst, alloc, c("EPS_EQ1:3/100").as_ptr(), &mut holds), FdStatus::Ok);
            assert!(holds);
            fd_allocation_free(alloc);
        }
        fd_instance_free(inst);
    }
}

#[test]
fn decision_outcomes() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(fd_fixture(c("example1").as_ptr(), &mut inst), FdStatus::Ok);
        let mut found = true;
        assert_eq!(fd_exists_combo(inst, c("EQ1+PO").as_ptr(), 0, &mut found), FdStatus::Ok);
        assert!(!found);
        assert_eq!(fd_exists_combo(inst, c("EF1,PO").as_ptr(), 0, &mut found), FdStatus::Ok);
        assert!(found);
        assert_eq!(fd_exists_combo(inst, c("EF1").as_ptr(), 10, &mut found), FdStatus::CapExceeded);

        let mut alloc = ptr::null_mut();
        assert_eq!(fd_solve(inst, c("eq_po_binary").as_ptr(), ptr::null(), &mut alloc), FdStatus::NotFound);
        assert!(alloc.is_null());
        assert_eq!(fd_solve(inst, c("alg_eq1_po").as_ptr(), ptr::null(), &mut alloc), FdStatus::NotPositive);
        fd_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(fd_instance_parse(c("agent,g1\na1,-3\n").as_ptr(), &mut inst), FdStatus::ParseError);
        assert!(last_error().contains("negative"));
        assert_eq!(fd_instance_parse(ptr::null(), &mut inst), FdStatus::NullPointer);
        assert_eq!(fd_fixture(c("missing").as_ptr(), &mut inst), FdStatus::UnknownFixture);
        assert!(last_error().contains("missing"));

        assert_eq!(fd_instance_parse(c(r#"{"valuations": [[1, 2], [2, 1]]}"#).as_ptr(), &mut inst), FdStatus::Ok);
        assert!(fd_last_error_message().is_null());
        let mut alloc = ptr::null_mut();
        assert_eq!(fd_solve(inst, c("simplex").as_ptr(), ptr::null(), &mut alloc), FdStatus::InvalidArgument);
        let owners = [0usize, 5];
        assert_eq!(fd_allocation_from_owners(inst, owners.as_ptr(), &mut alloc), FdStatus::InvalidArgument);
        let mut holds = false;
        assert_eq!(fd_check(inst, ptr::null(), c("EQ").as_ptr(), &mut holds), FdStatus::NullPointer);
        assert_eq!(fd_instance_n_agents(ptr::null()), 0);
        fd_instance_free(inst);
        fd_instance_free(ptr::null_mut());
        fd_allocation_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fairdiv.h")).unwrap();
    for name in [
        "fd_instance_new",
        "fd_instance_parse",
        "fd_instance_free",
        "fd_fixture",
        "fd_solve",
        "fd_allocation_owners",
        "fd_allocation_utility",
        "fd_allocation_free",
        "fd_check",
        "fd_exists_combo",
        "fd_last_error_message",
        "fd_string_free",
        "FD_STATUS_NOT_FOUND",
        "typedef struct FdInstance FdInstance",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "fairdiv.h"

int main(void) {
    FdInstance *inst = NULL;
    if (fd_fixture("santa_tight", &inst) != FD_STATUS_OK) return 10;
    FdAllocation *alloc = NULL;
    if (fd_solve(inst, "alg_eq1_po", NULL, &alloc) != FD_STATUS_OK) return 11;
    bool holds = false;
    if (fd_check(inst, alloc, "EQ1", &holds) != FD_STATUS_OK || !holds) return 12;
    size_t owners[4];
    if (fd_allocation_owners(alloc, owners, 4) != FD_STATUS_OK) return 13;
    FdInstance *bad = NULL;
    if (fd_instance_parse("{", &bad) != FD_STATUS_PARSE_ERROR) return 14;
    char *msg = fd_last_error_message();
    if (msg == NULL) return 15;
    fd_string_free(msg);
    fd_allocation_free(alloc);
    fd_instance_free(inst);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libfairdiv_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C toolchain or static library at {}; C link check not run", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fairdiv-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
