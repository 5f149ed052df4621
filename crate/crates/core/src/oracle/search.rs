use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use crate::checks::{nash_key_of, BundleStats, EqxVariant, NashKey, Property};
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::oracle::enumerate::{walk, DEFAULT_CAP};
use crate::oracle::fpo::{fractional_dominator, integer_values};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equity {
    Eq,
    Eq1,
    Eqx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Envy {
    Ef,
    Ef1,
    Efx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Efficiency {
    Po,
    Fpo,
}

impl Equity {
    pub fn property(self) -> Property {
        match self {
            Equity::Eq => Property::Eq,
            Equity::Eq1 => Property::Eq1,
            Equity::Eqx => Property::Eqx,
        }
    }
}

impl Envy {
    pub fn property(self) -> Property {
        match self {
            Envy::Ef => Property::Ef,
            Envy::Ef1 => Property::Ef1,
            Envy::Efx => Property::Efx,
        }
    }
}

/// A conjunction of at most one equity notion, one envy notion and one
/// efficiency notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ComboQuery {
    pub equity: Option<Equity>,
    pub envy: Option<Envy>,
    pub efficiency: Option<Efficiency>,
}

impl ComboQuery {
    pub fn new(equity: Option<Equity>, envy: Option<Envy>, efficiency: Option<Efficiency>) -> Result<Self> {
        let q = ComboQuery { equity, envy, efficiency };
        if q.is_empty() {
            return Err(Error::Usage("a combination needs at least one property".into()));
        }
        Ok(q)
    }

    pub fn is_empty(&self) -> bool {
        self.equity.is_none() && self.envy.is_none() && self.efficiency.is_none()
    }

    fn pairwise(&self) -> impl Iterator<Item = Property> {
        self.equity
            .map(Equity::property)
            .into_iter()
            .chain(self.envy.map(Envy::property))
    }
}

impl fmt::Display for ComboQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(e) = self.equity {
            parts.push(e.property().name());
        }
        if let Some(e) = self.envy {
            parts.push(e.property().name());
        }
        match self.efficiency {
            Some(Efficiency::Po) => parts.push("PO"),
            Some(Efficiency::Fpo) => parts.push("FPO"),
            None => {}
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for ComboQuery {
    type Err = Error;

    /// Parses `EQ1+EF1+PO` or `EQ1,EF1,PO`.
    fn from_str(s: &str) -> Result<Self> {
        let mut q = ComboQuery::default();
        for raw in s.split(['+', ',']).map(str::trim).filter(|t| !t.is_empty()) {
            let token = raw.to_ascii_uppercase();
            let clash = match token.as_str() {
                "EQ" | "EQ1" | "EQX" => q.equity.replace(match token.as_str() {
                    "EQ" => Equity::Eq,
                    "EQ1" => Equity::Eq1,
                    _ => Equity::Eqx,
                }).is_some(),
                "EF" | "EF1" | "EFX" => q.envy.replace(match token.as_str() {
                    "EF" => Envy::Ef,
                    "EF1" => Envy::Ef1,
                    _ => Envy::Efx,
                }).is_some(),
                "PO" => q.efficiency.replace(Efficiency::Po).is_some(),
                "FPO" => q.efficiency.replace(Efficiency::Fpo).is_some(),
                _ => return Err(Error::Usage(format!("unknown property `{raw}` in combination"))),
            };
            if clash {
                return Err(Error::Usage(format!("`{s}` names two properties of the same family")));
            }
        }
        ComboQuery::new(q.equity, q.envy, q.efficiency)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub found: bool,
    pub witness: Option<Allocation>,
    /// `n^m`.
    pub search_space_size: u128,
    /// Allocations visited before the search stopped.
    pub examined: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoVerdict {
    pub pareto_optimal: bool,
    pub dominator: Option<Allocation>,
}

/// Utility vectors not Pareto dominated by any other allocation.
#[derive(Debug, Clone)]
pub struct ParetoFrontier {
    points: Vec<Vec<u64>>,
}

fn dominates(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a != b
}

impl ParetoFrontier {
    pub fn build(instance: &Instance, cap: u64) -> Result<Self> {
        let mut points: Vec<Vec<u64>> = Vec::new();
        walk::<()>(instance, cap, |_, u| {
            if !points.iter().any(|p| p.as_slice() == u || dominates(p, u)) {
                points.retain(|p| !dominates(u, p));
                points.push(u.to_vec());
            }
            ControlFlow::Continue(())
        })?;
        Ok(ParetoFrontier { points })
    }

    /// Whether an allocation with these utilities is Pareto optimal.
    pub fn is_optimal(&self, utilities: &[u64]) -> bool {
        !self.points.iter().any(|p| dominates(p, utilities))
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }
}

/// Exhaustive search engine with a configurable cap on `n^m`.
#[derive(Debug, Clone, Copy)]
pub struct BruteForce {
    pub cap: u64,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce { cap: DEFAULT_CAP }
    }
}

fn to_allocation(n: usize, owners: &[usize]) -> Allocation {
    Allocation::from_owners_unchecked(n, owners.to_vec())
}

impl BruteForce {
    pub fn new(cap: u64) -> Self {
        BruteForce { cap }
    }

    pub fn is_po(&self, instance: &Instance, allocation: &Allocation) -> Result<PoVerdict> {
        allocation.validate_for(instance)?;
        let target: Vec<u64> = (0..instance.n_agents())
            .map(|i| instance.bundle_value(i, allocation.bundle(i)))
            .collect();
        let n = instance.n_agents();
        let dominator = walk(instance, self.cap, |owners, u| {
            if dominates(u, &target) {
                ControlFlow::Break(to_allocation(n, owners))
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(PoVerdict {
            pareto_optimal: dominator.is_none(),
            dominator,
        })
    }

    /// First allocation (in enumeration order) maximising `key`.
    fn argmax<K: Ord>(&self, instance: &Instance, mut key: impl FnMut(&[u64]) -> K) -> Result<Allocation> {
        let n = instance.n_agents();
        let mut best: Option<(K, Vec<usize>)> = None;
        walk::<()>(instance, self.cap, |owners, u| {
            let k = key(u);
            if best.as_ref().is_none_or(|(bk, _)| k > *bk) {
                best = Some((k, owners.to_vec()));
            }
            ControlFlow::Continue(())
        })?;
        let (_, owners) = best.expect("at least one allocation");
        Ok(Allocation::from_owners_unchecked(n, owners))
    }

    pub fn leximin(&self, instance: &Instance) -> Result<Allocation> {
        self.argmax(instance, |u| {
            let mut p = u.to_vec();
            p.sort_unstable();
            p
        })
    }

    pub fn mnw(&self, instance: &Instance) -> Result<Allocation> {
        self.argmax(instance, nash_key_of)
    }

    pub fn maximin(&self, instance: &Instance) -> Result<(u64, Allocation)> {
        let alloc = self.argmax(instance, |u| u.iter().copied().min().unwrap_or(0))?;
        let opt = (0..instance.n_agents())
            .map(|i| instance.bundle_value(i, alloc.bundle(i)))
            .min()
            .unwrap_or(0);
        Ok((opt, alloc))
    }

    /// Best extended Nash welfare key over all allocations.
    pub fn max_nash_key(&self, instance: &Instance) -> Result<NashKey> {
        let a = self.mnw(instance)?;
        Ok(crate::checks::nash_key(instance, &a))
    }

    pub fn exists_combo(&self, instance: &Instance, query: &ComboQuery) -> Result<OracleResult> {
        self.exists_combo_with(instance, query, EqxVariant::default())
    }

    pub fn exists_combo_with(
        &self,
        instance: &Instance,
        query: &ComboQuery,
        variant: EqxVariant,
    ) -> Result<OracleResult> {
        if query.is_empty() {
            return Err(Error::Usage("a combination needs at least one property".into()));
        }
        let n = instance.n_agents();
        let frontier = match query.efficiency {
            Some(_) => Some(ParetoFrontier::build(instance, self.cap)?),
            None => None,
        };
        let values = matches!(query.efficiency, Some(Efficiency::Fpo)).then(|| integer_values(instance));
        let props: Vec<Property> = query.pairwise().collect();
        let mut examined: u128 = 0;
        let witness = walk(instance, self.cap, |owners, u| {
            examined += 1;
            if let Some(f) = &frontier {
                if !f.is_optimal(u) {
                    return ControlFlow::Continue(());
                }
            }
            if !props.is_empty() {
                let stats = BundleStats::new(instance, owners);
                if !props.iter().all(|p| stats.holds(p, variant)) {
                    return ControlFlow::Continue(());
                }
            }
            let alloc = to_allocation(n, owners);
            if let Some(values) = &values {
                if fractional_dominator(values, &alloc).is_some() {
                    return ControlFlow::Continue(());
                }
            }
            ControlFlow::Break(alloc)
        })?;
        Ok(OracleResult {
            found: witness.is_some(),
            witness,
            search_space_size: instance.search_space_size(),
            examined,
        })
    }

    /// Every allocation satisfying the query, in enumeration order.
    pub fn all_satisfying(&self, instance: &Instance, query: &ComboQuery) -> Result<Vec<Allocation>> {
        let n = instance.n_agents();
        let frontier = match query.efficiency {
            Some(_) => Some(ParetoFrontier::build(instance, self.cap)?),
            None => None,
        };
        let values = matches!(query.efficiency, Some(Efficiency::Fpo)).then(|| integer_values(instance));
        let props: Vec<Property> = query.pairwise().collect();
        let mut out = Vec::new();
        walk::<()>(instance, self.cap, |owners, u| {
            if frontier.as_ref().is_some_and(|f| !f.is_optimal(u)) {
                return ControlFlow::Continue(());
            }
            let stats = BundleStats::new(instance, owners);
            if !props.iter().all(|p| stats.holds(p, EqxVariant::default())) {
                return ControlFlow::Continue(());
            }
            let alloc = to_allocation(n, owners);
            if values.as_ref().is_some_and(|v| fractional_dominator(v, &alloc).is_some()) {
                return ControlFlow::Continue(());
            }
            out.push(alloc);
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }
}

pub fn is_po_bf(instance: &Instance, allocation: &Allocation) -> Result<PoVerdict> {
    BruteForce::default().is_po(instance, allocation)
}

pub fn leximin_bf(instance: &Instance) -> Result<Allocation> {
    BruteForce::default().leximin(instance)
}

pub fn mnw_bf(instance: &Instance) -> Result<Allocation> {
    BruteForce::default().mnw(instance)
}

pub fn maximin_bf(instance: &Instance) -> Result<(u64, Allocation)> {
    BruteForce::default().maximin(instance)
}

pub fn exists_combo_bf(instance: &Instance, query: &ComboQuery) -> Result<OracleResult> {
    BruteForce::default().exists_combo(instance, query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{check_property, utility_profile};
    use crate::instio::fixture;

    #[test]
    fn combo_parsing() {
        let q: ComboQuery = "EQ1+EF1+PO".parse().unwrap();
        assert_eq!(q, ComboQuery::new(Some(Equity::Eq1), Some(Envy::Ef1), Some(Efficiency::Po)).unwrap());
        assert_eq!(q.to_string(), "EQ1+EF1+PO");
        assert_eq!("eqx,fpo".parse::<ComboQuery>().unwrap().to_string(), "EQX+FPO");
        assert!("EQ+EQ1".parse::<ComboQuery>().is_err());
        assert!("".parse::<ComboQuery>().is_err());
        assert!("EQ+MMS".parse::<ComboQuery>().is_err());
    }

    #[test]
    fn example1_split_is_po() {
        let inst = fixture("example1").unwrap().instance;
        let a = Allocation::new(6, vec![vec![0, 1, 2], vec![3, 4], vec![5]]).unwrap();
        assert!(is_po_bf(&inst, &a).unwrap().pareto_optimal);
    }

    #[test]
    fn misassigned_binary_good_is_dominated() {
        let inst = Instance::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let a = Allocation::from_owners(2, vec![1, 1]).unwrap();
        let v = is_po_bf(&inst, &a).unwrap();
        assert!(!v.pareto_optimal);
        let d = v.dominator.unwrap();
        assert_eq!(d.owners(), &[0, 1]);
    }

    #[test]
    fn eps1_fixture_integral_po() {
        let inst = Instance::new(vec![vec![2, 1024, 1], vec![1, 1024, 2]]).unwrap();
        let a = Allocation::new(3, vec![vec![1], vec![0, 2]]).unwrap();
        assert!(is_po_bf(&inst, &a).unwrap().pareto_optimal);
    }

    #[test]
    fn leximin_and_maximin_small() {
        let inst = Instance::new(vec![vec![3, 2, 1], vec![3, 2, 1]]).unwrap();
        assert_eq!(utility_profile(&inst, &leximin_bf(&inst).unwrap()), vec![3, 3]);
        assert_eq!(maximin_bf(&inst).unwrap().0, 3);
        let zero_row = Instance::new(vec![vec![3, 2, 1], vec![0, 0, 0]]).unwrap();
        assert_eq!(maximin_bf(&zero_row).unwrap().0, 0);
    }

    #[test]
    fn mnw_on_example1() {
        let inst = fixture("example1").unwrap().instance;
        let a = mnw_bf(&inst).unwrap();
        let key = crate::checks::nash_key(&inst, &a);
        assert_eq!(key.positive_count, 3);
        assert_eq!(key.product, 6u32.into());
        assert!(check_property(&inst, &a, &Property::Ef1).unwrap().holds);
        let single = Instance::new(vec![vec![1, 2]]).unwrap();
        assert_eq!(mnw_bf(&single).unwrap().bundle(0), &[0, 1]);
    }

    #[test]
    fn frontier_matches_pairwise_check() {
        let inst = Instance::new(vec![vec![2, 1, 0, 3], vec![1, 1, 2, 0], vec![0, 3, 1, 1]]).unwrap();
        let f = ParetoFrontier::build(&inst, DEFAULT_CAP).unwrap();
        for a in crate::oracle::enumerate_allocations(3, 4).unwrap() {
            let u: Vec<u64> = (0..3).map(|i| inst.bundle_value(i, a.bundle(i))).collect();
            assert_eq!(f.is_optimal(&u), is_po_bf(&inst, &a).unwrap().pareto_optimal);
        }
    }

    #[test]
    fn example1_has_no_eq1_po() {
        let inst = fixture("example1").unwrap().instance;
        let r = exists_combo_bf(&inst, &"EQ1+PO".parse().unwrap()).unwrap();
        assert!(!r.found);
        assert_eq!((r.search_space_size, r.examined), (729, 729));
    }

    #[test]
    fn combo_witness_rechecks() {
        let inst = Instance::new(vec![vec![4, 1, 2, 2], vec![1, 3, 3, 1]]).unwrap();
        let r = exists_combo_bf(&inst, &"EQX+EFX+PO".parse().unwrap()).unwrap();
        let w = r.witness.unwrap();
        assert!(check_property(&inst, &w, &Property::Eqx).unwrap().holds);
        assert!(check_property(&inst, &w, &Property::Efx).unwrap().holds);
        assert!(is_po_bf(&inst, &w).unwrap().pareto_optimal);
    }
}
