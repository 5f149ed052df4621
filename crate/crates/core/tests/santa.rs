use proptest::prelude::*;

use fairdiv::instio::fixture;
use fairdiv::oracle::{enumerate_allocations, maximin_bf, BruteForce};
use fairdiv::rational::{from_int, from_ratio, Rational};
use fairdiv::santa::{audit, audit_known_opt, opt_value};
use fairdiv::{Allocation, Instance};

fn small_instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=5).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::collection::vec(0u64..6, m), n)
            .prop_map(|rows| Instance::new(rows).unwrap())
    })
}

fn identical_instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(n, m)| {
        proptest::collection::vec(1u64..8, m).prop_map(move |row| Instance::new(vec![row; n]).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn every_allocation_meets_its_applicable_bounds(inst in small_instance()) {
        let bf = BruteForce::default();
        let opt = maximin_bf(&inst).unwrap().0;
        prop_assert_eq!(opt_value(&inst).unwrap(), opt);
        for a in enumerate_allocations(inst.n_agents(), inst.n_goods()).unwrap() {
            let report = audit_known_opt(&bf, &inst, &a, opt).unwrap();
            prop_assert!(report.all_satisfied(), "{:?} {:?}", a, report);
            prop_assert!(report.ratio <= Rational::from_integer(1.into()));
            if opt > 0 {
                prop_assert_eq!(report.ratio, from_ratio(report.min_utility as i64, opt as i64));
            }
        }
    }

    #[test]
    fn identical_eq1_gets_a_share(inst in identical_instance()) {
        let bf = BruteForce::default();
        let opt = maximin_bf(&inst).unwrap().0;
        let n = inst.n_agents() as u64;
        for a in enumerate_allocations(inst.n_agents(), inst.n_goods()).unwrap() {
            let report = audit_known_opt(&bf, &inst, &a, opt).unwrap();
            if report.bounds[1].applicable {
                prop_assert!(from_int(n * report.min_utility) >= from_int(opt));
            }
        }
    }
}

#[test]
fn tight_fixtures() {
    let f = fixture("santa_tight").unwrap();
    let a = Allocation::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
    let report = audit(&f.instance, &a).unwrap();
    assert_eq!((report.opt, report.min_utility, report.c), (6, 4, 2));
    assert_eq!(report.ratio, from_ratio(2, 3));
    assert!(report.bounds[0].applicable);
    assert_eq!(report.bounds[0].bound, from_ratio(1, 2));

    let f = fixture("thm6_tight_n3").unwrap();
    let a = Allocation::new(5, vec![vec![0, 3], vec![1, 4], vec![2]]).unwrap();
    let report = audit(&f.instance, &a).unwrap();
    assert_eq!(report.ratio, from_ratio(1, 3));
    assert!(report.bounds[1].applicable && report.bounds[1].satisfied);
    assert_eq!(report.bounds[1].bound, from_ratio(1, 3));
}

#[test]
fn rejects_mismatched_allocation() {
    let inst = Instance::new(vec![vec![1, 2], vec![2, 1]]).unwrap();
    let a = Allocation::new(3, vec![vec![0, 1, 2], vec![]]).unwrap();
    assert!(audit(&inst, &a).is_err());
}
