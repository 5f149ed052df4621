//! C ABI over `fairdiv`.
//!
//! Objects are opaque handles created by `fd_*_new`/`fd_*_parse`/`fd_solve`
//! and released with the matching `fd_*_free`. Every fallible call returns an
//! [`FdStatus`]; on failure `fd_last_error_message` describes the error.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fairdiv::checks::{check_property, utilities, Property};
use fairdiv::experiment::Algorithm;
use fairdiv::instio::{fixture, parse_instance};
use fairdiv::market::{solve_eq1_po, SolveOptions};
use fairdiv::oracle::{BruteForce, ComboQuery};
use fairdiv::rational::parse_rational;
use fairdiv::{Allocation, Error, Instance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdStatus {
    Ok = 0,
    /// The decision procedure found no allocation.
    NotFound = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    ParseError = 4,
    NotPositive = 5,
    NotBinary = 6,
    CapExceeded = 7,
    StepLimit = 8,
    UnknownFixture = 9,
    Internal = 10,
}

/// An instance handle.
pub struct FdInstance {
    inner: Instance,
}

/// An allocation handle, together with the utilities it was computed for.
pub struct FdAllocation {
    inner: Allocation,
    utilities: Vec<u64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FdStatus {
    match e {
        Error::Parse(_) => FdStatus::ParseError,
        Error::NotPositive => FdStatus::NotPositive,
        Error::NotBinary => FdStatus::NotBinary,
        Error::CapExceeded { .. } => FdStatus::CapExceeded,
        Error::StepLimit { .. } => FdStatus::StepLimit,
        Error::UnknownFixture(_) => FdStatus::UnknownFixture,
        Error::InvariantBreach(_) | Error::Io(_) => FdStatus::Internal,
        _ => FdStatus::InvalidArgument,
    }
}

struct Failure(FdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FdStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FdStatus::Internal
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FdStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn instance_ref<'a>(p: *const FdInstance) -> Result<&'a Instance, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("instance"))
}

unsafe fn allocation_ref<'a>(p: *const FdAllocation) -> Result<&'a FdAllocation, Failure> {
    p.as_ref().ok_or_else(|| null("allocation"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn usage(message: impl Into<String>) -> Failure {
    Failure(FdStatus::InvalidArgument, message.into())
}

/// Builds an instance from a row-major `n_agents × n_goods` value matrix.
///
/// # Safety
/// `values` must point to `n_agents * n_goods` readable `u64`s; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_instance_new(
    n_agents: usize,
    n_goods: usize,
    values: *const u64,
    out: *mut *mut FdInstance,
) -> FdStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let len = n_agents.checked_mul(n_goods).ok_or_else(|| usage("matrix too large"))?;
        let flat = std::slice::from_raw_parts(values, len);
        let rows = flat.chunks(n_goods.max(1)).take(n_agents).map(<[u64]>::to_vec).collect();
        let inner = Instance::new(rows)?;
        put(out, FdInstance { inner })
    })
}

/// Parses an instance in JSON or CSV form.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_instance_parse(text: *const c_char, out: *mut *mut FdInstance) -> FdStatus {
    guard(|| {
        let inner = parse_instance(cstr(text, "text")?, None).map_err(Error::from)?;
        put(out, FdInstance { inner })
    })
}

/// Loads a named fixture instance.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_fixture(name: *const c_char, out: *mut *mut FdInstance) -> FdStatus {
    guard(|| {
        let f = fixture(cstr(name, "name")?)?;
        put(out, FdInstance { inner: f.instance })
    })
}

/// # Safety
/// `instance` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_instance_free(instance: *mut FdInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_instance_n_agents(instance: *const FdInstance) -> usize {
    instance.as_ref().map_or(0, |h| h.inner.n_agents())
}

/// Number of goods, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_instance_n_goods(instance: *const FdInstance) -> usize {
    instance.as_ref().map_or(0, |h| h.inner.n_goods())
}

/// Runs `algorithm` (`leximin_bf`, `mnw_bf`, `alg_eq1_po`, `eq_po_binary`,
/// `nash_binary`). `eps` applies to `alg_eq1_po` only; null means exact.
/// Returns `NotFound` when `eq_po_binary` reports that no allocation exists.
///
/// # Safety
/// Pointers must be valid; `eps` may be null.
#[no_mangle]
pub unsafe extern "C" fn fd_solve(
    instance: *const FdInstance,
    algorithm: *const c_char,
    eps: *const c_char,
    out: *mut *mut FdAllocation,
) -> FdStatus {
    let mut not_found = false;
    let status = guard(|| {
        let inst = instance_ref(instance)?;
        let alg: Algorithm = cstr(algorithm, "algorithm")?.parse()?;
        let options = if eps.is_null() {
            SolveOptions::exact()
        } else {
            let e = cstr(eps, "eps")?;
            SolveOptions::approx(parse_rational(e).ok_or_else(|| usage(format!("`{e}` is not a rational")))?)
        };
        let result = if alg == Algorithm::AlgEq1Po {
            Some(solve_eq1_po(inst, &options)?.allocation)
        } else {
            alg.run(inst, &BruteForce::default(), &options)?
        };
        match result {
            Some(a) => put(
                out,
                FdAllocation {
                    utilities: utilities(inst, &a),
                    inner: a,
                },
            ),
            None => {
                not_found = true;
                Ok(())
            }
        }
    });
    if status == FdStatus::Ok && not_found {
        set_error("no allocation exists".into());
        FdStatus::NotFound
    } else {
        status
    }
}

/// Wraps an owner vector (`owners[good] = agent`) as an allocation for `instance`.
///
/// # Safety
/// `owners` must point to `fd_instance_n_goods(instance)` readable `usize`s.
#[no_mangle]
pub unsafe extern "C" fn fd_allocation_from_owners(
    instance: *const FdInstance,
    owners: *const usize,
    out: *mut *mut FdAllocation,
) -> FdStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        if owners.is_null() {
            return Err(null("owners"));
        }
        let owners = std::slice::from_raw_parts(owners, inst.n_goods()).to_vec();
        let a = Allocation::from_owners(inst.n_agents(), owners)?;
        a.validate_for(inst)?;
        put(
            out,
            FdAllocation {
                utilities: utilities(inst, &a),
                inner: a,
            },
        )
    })
}

/// # Safety
/// `allocation` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_allocation_free(allocation: *mut FdAllocation) {
    if !allocation.is_null() {
        drop(Box::from_raw(allocation));
    }
}

/// Copies the owner of each good into `owners[0..len]`; `len` must equal the number of goods.
///
/// # Safety
/// `owners` must point to `len` writable `usize`s.
#[no_mangle]
pub unsafe extern "C" fn fd_allocation_owners(
    allocation: *const FdAllocation,
    owners: *mut usize,
    len: usize,
) -> FdStatus {
    guard(|| {
        let a = allocation_ref(allocation)?;
        if owners.is_null() {
            return Err(null("owners"));
        }
        if len != a.inner.n_goods() {
            return Err(usage(format!("buffer holds {len} entries, allocation has {} goods", a.inner.n_goods())));
        }
        std::slice::from_raw_parts_mut(owners, len).copy_from_slice(a.inner.owners());
        Ok(())
    })
}

/// Utility of `agent` for its own bundle.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_allocation_utility(
    allocation: *const FdAllocation,
    agent: usize,
    out: *mut u64,
) -> FdStatus {
    guard(|| {
        let a = allocation_ref(allocation)?;
        let u = *a
            .utilities
            .get(agent)
            .ok_or_else(|| usage(format!("agent {agent} out of range")))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = u;
        Ok(())
    })
}

/// Checks one property (`EQ1`, `EFX`, `EPS_EQ1:3/100`, ...).
///
/// # Safety
/// Pointers must be valid; `holds` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_check(
    instance: *const FdInstance,
    allocation: *const FdAllocation,
    property: *const c_char,
    holds: *mut bool,
) -> FdStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        let a = allocation_ref(allocation)?;
        let p: Property = cstr(property, "property")?.parse()?;
        let report = check_property(inst, &a.inner, &p)?;
        if holds.is_null() {
            return Err(null("holds"));
        }
        *holds = report.holds;
        Ok(())
    })
}

/// Decides by enumeration whether some allocation satisfies `combo`
/// (`EQ1+EF1+PO`, `EQX,FPO`, ...). `cap` bounds `n^m`; 0 uses the default.
///
/// # Safety
/// Pointers must be valid; `found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_exists_combo(
    instance: *const FdInstance,
    combo: *const c_char,
    cap: u64,
    found: *mut bool,
) -> FdStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        let q: ComboQuery = cstr(combo, "combo")?.parse()?;
        let bf = if cap == 0 { BruteForce::default() } else { BruteForce::new(cap) };
        let result = bf.exists_combo(inst, &q)?;
        if found.is_null() {
            return Err(null("found"));
        }
        *found = result.found;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. Free with `fd_string_free`.
#[no_mangle]
pub extern "C" fn fd_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
