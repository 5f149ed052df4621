use proptest::prelude::*;

use fairdiv::checks::{check_property, nash_key, utilities, utility_profile};
use fairdiv::oracle::lp::{LinearProgram, LpOutcome, Relation};
use fairdiv::oracle::{
    enumerate_allocations, enumerate_allocations_capped, exists_combo_bf, fractional_maximin, is_fpo_lp, is_po_bf,
    leximin_bf, maximin_bf, mnw_bf, BruteForce, ComboQuery,
};
use fairdiv::rational::{from_int, from_ratio, Rational};
use fairdiv::{Allocation, Error, Instance};

fn all(inst: &Instance) -> Vec<Allocation> {
    enumerate_allocations(inst.n_agents(), inst.n_goods()).unwrap().collect()
}

fn dominates(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a != b
}

fn naive_po(inst: &Instance, a: &Allocation) -> bool {
    let u = utilities(inst, a);
    !all(inst).iter().any(|b| dominates(&utilities(inst, b), &u))
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=5).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::collection::vec(0u64..5, m), n)
            .prop_map(|rows| Instance::new(rows).unwrap())
    })
}

fn combos() -> Vec<ComboQuery> {
    ["EQ+PO", "EQ1+PO", "EQX+PO", "EQ1+EF1+PO", "EF1+PO", "EFX+PO", "EQX+EFX", "EF", "EQ1+FPO"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn po_matches_pairwise_dominance(inst in small_instance(), pick in any::<prop::sample::Index>()) {
        let list = all(&inst);
        let a = &list[pick.index(list.len())];
        let verdict = is_po_bf(&inst, a).unwrap();
        prop_assert_eq!(verdict.pareto_optimal, naive_po(&inst, a));
        if let Some(d) = verdict.dominator {
            prop_assert!(dominates(&utilities(&inst, &d), &utilities(&inst, a)));
        }
    }

    #[test]
    fn welfare_optima_match_scans(inst in small_instance()) {
        let list = all(&inst);
        let best_profile = list.iter().map(|a| utility_profile(&inst, a)).max().unwrap();
        prop_assert_eq!(utility_profile(&inst, &leximin_bf(&inst).unwrap()), best_profile);
        let best_key = list.iter().map(|a| nash_key(&inst, a)).max().unwrap();
        prop_assert_eq!(nash_key(&inst, &mnw_bf(&inst).unwrap()), best_key);
        let best_min = list.iter().map(|a| *utilities(&inst, a).iter().min().unwrap()).max().unwrap();
        let (value, witness) = maximin_bf(&inst).unwrap();
        prop_assert_eq!(value, best_min);
        prop_assert_eq!(*utilities(&inst, &witness).iter().min().unwrap(), value);
    }

    #[test]
    fn combo_search_matches_scan(inst in small_instance()) {
        for q in combos() {
            let result = exists_combo_bf(&inst, &q).unwrap();
            let passes = |a: &Allocation| {
                let pairwise = q.equity.map(|e| e.property()).into_iter().chain(q.envy.map(|e| e.property()));
                let ok = pairwise.into_iter().all(|p| check_property(&inst, a, &p).unwrap().holds);
                ok && match q.efficiency {
                    None => true,
                    Some(fairdiv::oracle::Efficiency::Po) => naive_po(&inst, a),
                    Some(fairdiv::oracle::Efficiency::Fpo) => is_fpo_lp(&inst, a).unwrap(),
                }
            };
            let first = all(&inst).into_iter().find(|a| passes(a));
            prop_assert_eq!(result.found, first.is_some(), "{}", q);
            prop_assert_eq!(result.witness, first);
            prop_assert_eq!(result.search_space_size, (inst.n_agents() as u128).pow(inst.n_goods() as u32));
        }
    }

    #[test]
    fn fpo_implies_po(inst in small_instance(), pick in any::<prop::sample::Index>()) {
        let list = all(&inst);
        let a = &list[pick.index(list.len())];
        if is_fpo_lp(&inst, a).unwrap() {
            prop_assert!(naive_po(&inst, a));
        }
    }

    #[test]
    fn fractional_maximin_dominates_integral(inst in small_instance()) {
        let (frac, x) = fractional_maximin(&inst);
        let values: Vec<Vec<Rational>> =
            inst.valuations().iter().map(|r| r.iter().map(|&v| from_int(v)).collect()).collect();
        prop_assert_eq!(x.utilities(&values).into_iter().min().unwrap(), frac.clone());
        prop_assert!(frac >= from_int(maximin_bf(&inst).unwrap().0));
    }
}

#[test]
fn enumeration_is_lexicographic_and_complete() {
    let owners: Vec<Vec<usize>> = enumerate_allocations(2, 3).unwrap().map(|a| a.owners().to_vec()).collect();
    assert_eq!(owners.len(), 8);
    assert_eq!(owners[0], vec![0, 0, 0]);
    assert_eq!(owners[1], vec![0, 0, 1]);
    assert_eq!(owners[7], vec![1, 1, 1]);
    assert!(matches!(
        enumerate_allocations_capped(3, 6, 728),
        Err(Error::CapExceeded { size: 729, cap: 728 })
    ));
    let inst = Instance::new(vec![vec![1; 6]; 3]).unwrap();
    let q: ComboQuery = "EQ".parse().unwrap();
    assert!(matches!(BruteForce::new(100).exists_combo(&inst, &q), Err(Error::CapExceeded { .. })));
}

#[test]
fn combo_parsing() {
    let q: ComboQuery = "eq1, ef1 ,po".parse().unwrap();
    assert_eq!(q.to_string(), "EQ1+EF1+PO");
    assert!("EQ1+EQX".parse::<ComboQuery>().is_err());
    assert!("".parse::<ComboQuery>().is_err());
    assert!("EQ1+MMS".parse::<ComboQuery>().is_err());
}

#[test]
fn lp_textbook_problem() {
    // max 3x + 5y  s.t.  x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  36 at (2, 6).
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![from_int(3), from_int(5)];
    lp.add(vec![from_int(1), from_int(0)], Relation::Le, from_int(4));
    lp.add(vec![from_int(0), from_int(2)], Relation::Le, from_int(12));
    lp.add(vec![from_int(3), from_int(2)], Relation::Le, from_int(18));
    match lp.solve() {
        LpOutcome::Optimal { value, point } => {
            assert_eq!(value, from_int(36));
            assert_eq!(point, vec![from_int(2), from_int(6)]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn lp_infeasible_unbounded_and_equalities() {
    let mut lp = LinearProgram::new(1);
    lp.objective = vec![from_int(1)];
    lp.add(vec![from_int(1)], Relation::Ge, from_int(3));
    lp.add(vec![from_int(1)], Relation::Le, from_int(2));
    assert_eq!(lp.solve(), LpOutcome::Infeasible);

    let mut lp = LinearProgram::new(2);
    lp.objective = vec![from_int(1), from_int(1)];
    lp.add(vec![from_int(1), from_ratio(-1, 1)], Relation::Le, from_int(1));
    assert_eq!(lp.solve(), LpOutcome::Unbounded);

    // max x  s.t.  x + y = 1, x - y = 1/2 (duplicated)  →  3/4.
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![from_int(1), from_int(0)];
    lp.add(vec![from_int(1), from_int(1)], Relation::Eq, from_int(1));
    lp.add(vec![from_int(1), from_ratio(-1, 1)], Relation::Eq, from_ratio(1, 2));
    lp.add(vec![from_int(2), from_ratio(-2, 1)], Relation::Eq, from_int(1));
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => assert_eq!(value, from_ratio(3, 4)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn fpo_is_stricter_than_po() {
    let inst = fairdiv::instio::fixture("eqx_fpo_eps1").unwrap().instance;
    let a = Allocation::new(3, vec![vec![0, 2], vec![1]]).unwrap();
    assert!(is_po_bf(&inst, &a).unwrap().pareto_optimal);
    assert!(!is_fpo_lp(&inst, &a).unwrap());
    // Giving every good to the agent that values it most relatively is fPO.
    let b = Allocation::new(3, vec![vec![0], vec![1, 2]]).unwrap();
    assert!(is_fpo_lp(&inst, &b).unwrap());
}
