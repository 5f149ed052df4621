//! Fairness checkers for integral allocations.
//!
//! Every verdict is computed in exact integer or rational arithmetic. When a
//! property fails, the report names the lexicographically smallest violating
//! ordered pair `(i, k)` and, for the "any good" variants, the smallest
//! violating good.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::rational::{format_rational, parse_rational, Rational};

/// Fairness notions that can be checked pairwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Property {
    Eq,
    Eq1,
    Eqx,
    /// `(1+ε)·v_i(A_i) ≥ v_k(A_k \ {j})` for some `j`.
    EpsEq1(Rational),
    Ef,
    Ef1,
    Efx,
    Prop,
    Prop1,
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::Eq => "EQ",
            Property::Eq1 => "EQ1",
            Property::Eqx => "EQX",
            Property::EpsEq1(_) => "EPS_EQ1",
            Property::Ef => "EF",
            Property::Ef1 => "EF1",
            Property::Efx => "EFX",
            Property::Prop => "PROP",
            Property::Prop1 => "PROP1",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::EpsEq1(eps) => write!(f, "EPS_EQ1:{}", format_rational(eps)),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    /// Accepts `EQ`, `EQ1`, …, and `EPS_EQ1:<rational>`. Case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let (head, arg) = match upper.split_once(':') {
            Some((h, a)) => (h.to_string(), Some(a.to_string())),
            None => (upper.clone(), None),
        };
        let prop = match head.as_str() {
            "EQ" => Property::Eq,
            "EQ1" => Property::Eq1,
            "EQX" => Property::Eqx,
            "EF" => Property::Ef,
            "EF1" => Property::Ef1,
            "EFX" => Property::Efx,
            "PROP" => Property::Prop,
            "PROP1" => Property::Prop1,
            "EPS_EQ1" => {
                let arg = arg.ok_or_else(|| Error::InvalidEps("EPS_EQ1 needs an epsilon, e.g. EPS_EQ1:3/100".into()))?;
                let eps = parse_rational(&arg).ok_or_else(|| Error::InvalidEps(format!("cannot parse `{arg}`")))?;
                return Ok(Property::EpsEq1(eps));
            }
            _ => return Err(Error::Usage(format!("unknown property `{s}`"))),
        };
        if arg.is_some() {
            return Err(Error::Usage(format!("property `{head}` takes no argument")));
        }
        Ok(prop)
    }
}

/// Which goods may be skipped in the "up to any good" equitability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqxVariant {
    /// Only goods the owner values positively must pass the test.
    #[default]
    PositiveOnly,
    /// Every good in the bundle must pass, including zero-valued ones.
    AllGoods,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub agent: usize,
    pub other: usize,
    pub good: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.property, if self.holds { "holds" } else { "fails" })?;
        if let Some(w) = &self.witness {
            write!(f, " (agent {} vs agent {}", w.agent, w.other)?;
            if let Some(g) = w.good {
                write!(f, ", good {g}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// `v_agent(A_agent)`.
pub fn utility(instance: &Instance, allocation: &Allocation, agent: usize) -> Result<u64> {
    if agent >= instance.n_agents() {
        return Err(Error::AgentOutOfRange {
            agent,
            n_agents: instance.n_agents(),
        });
    }
    allocation.validate_for(instance)?;
    Ok(instance.bundle_value(agent, allocation.bundle(agent)))
}

pub fn utilities(instance: &Instance, allocation: &Allocation) -> Vec<u64> {
    (0..instance.n_agents())
        .map(|i| instance.bundle_value(i, allocation.bundle(i)))
        .collect()
}

/// Utilities sorted in non-decreasing order.
pub fn utility_profile(instance: &Instance, allocation: &Allocation) -> Vec<u64> {
    let mut profile = utilities(instance, allocation);
    profile.sort_unstable();
    profile
}

/// Extended Nash welfare key: number of agents with positive utility, then
/// the product of those utilities. Keys compare lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NashKey {
    pub positive_count: usize,
    pub product: BigUint,
}

pub fn nash_key(instance: &Instance, allocation: &Allocation) -> NashKey {
    nash_key_of(&utilities(instance, allocation))
}

pub fn nash_key_of(utilities: &[u64]) -> NashKey {
    let mut product = BigUint::one();
    let mut positive_count = 0;
    for &u in utilities.iter().filter(|&&u| u > 0) {
        product *= u;
        positive_count += 1;
    }
    NashKey {
        positive_count,
        product,
    }
}

/// Cross values of an allocation: `cross[i][k] = v_i(A_k)` together with the
/// extreme single-good values inside each bundle.
pub(crate) struct BundleStats {
    n: usize,
    cross: Vec<u64>,
    max_good: Vec<u64>,
    min_positive: Vec<Option<u64>>,
    min_any: Vec<Option<u64>>,
    nonempty: Vec<bool>,
}

impl BundleStats {
    pub(crate) fn new(instance: &Instance, owners: &[usize]) -> Self {
        let n = instance.n_agents();
        let mut stats = BundleStats {
            n,
            cross: vec![0; n * n],
            max_good: vec![0; n * n],
            min_positive: vec![None; n * n],
            min_any: vec![None; n * n],
            nonempty: vec![false; n],
        };
        for (good, &k) in owners.iter().enumerate() {
            stats.nonempty[k] = true;
            for i in 0..n {
                let v = instance.value(i, good);
                let idx = i * n + k;
                stats.cross[idx] += v;
                stats.max_good[idx] = stats.max_good[idx].max(v);
                stats.min_any[idx] = Some(stats.min_any[idx].map_or(v, |m| m.min(v)));
                if v > 0 {
                    stats.min_positive[idx] = Some(stats.min_positive[idx].map_or(v, |m| m.min(v)));
                }
            }
        }
        stats
    }

    #[inline]
    fn at(&self, i: usize, k: usize) -> usize {
        i * self.n + k
    }

    #[inline]
    pub(crate) fn own(&self, i: usize) -> u64 {
        self.cross[self.at(i, i)]
    }

    /// Whether the ordered pair `(i, k)` violates `property`.
    fn pair_violates(&self, property: &Property, variant: EqxVariant, i: usize, k: usize) -> bool {
        if i == k && !matches!(property, Property::Prop | Property::Prop1) {
            return false;
        }
        let ui = self.own(i);
        let kk = self.at(k, k);
        let ik = self.at(i, k);
        match property {
            Property::Eq => ui != self.cross[kk],
            Property::Eq1 => self.nonempty[k] && ui + self.max_good[kk] < self.cross[kk],
            Property::Eqx => {
                if !self.nonempty[k] {
                    return false;
                }
                let removed = match variant {
                    EqxVariant::PositiveOnly => self.min_positive[kk],
                    EqxVariant::AllGoods => self.min_any[kk],
                };
                removed.is_some_and(|r| ui + r < self.cross[kk])
            }
            Property::EpsEq1(eps) => {
                if !self.nonempty[k] {
                    return false;
                }
                let lhs = (Rational::one() + eps) * Rational::from_integer(BigInt::from(ui));
                let rhs = Rational::from_integer(BigInt::from(self.cross[kk] - self.max_good[kk]));
                lhs < rhs
            }
            Property::Ef => ui < self.cross[ik],
            Property::Ef1 => self.nonempty[k] && ui + self.max_good[ik] < self.cross[ik],
            Property::Efx => {
                self.nonempty[k] && self.min_positive[ik].is_some_and(|r| ui + r < self.cross[ik])
            }
            // Proportionality is a per-agent property; only the diagonal pair is inspected.
            Property::Prop | Property::Prop1 => {
                if i != k {
                    return false;
                }
                let total: u128 = (0..self.n).map(|h| self.cross[self.at(i, h)] as u128).sum();
                let n = self.n as u128;
                let mut have = ui as u128;
                if matches!(property, Property::Prop1) {
                    let best_outside = (0..self.n)
                        .filter(|&h| h != i)
                        .map(|h| self.max_good[self.at(i, h)])
                        .max()
                        .unwrap_or(0);
                    have += best_outside as u128;
                }
                n * have < total
            }
        }
    }

    /// Smallest good `j ∈ A_k` for which the "any good" condition fails.
    fn violating_good(
        &self,
        instance: &Instance,
        owners: &[usize],
        property: &Property,
        variant: EqxVariant,
        i: usize,
        k: usize,
    ) -> Option<usize> {
        let ui = self.own(i);
        let valuer = match property {
            Property::Eqx => k,
            Property::Efx => i,
            _ => return None,
        };
        let total = self.cross[self.at(valuer, k)];
        owners
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == k)
            .map(|(g, _)| g)
            .find(|&g| {
                let v = instance.value(valuer, g);
                let skip = v == 0 && !(matches!(property, Property::Eqx) && variant == EqxVariant::AllGoods);
                !skip && ui + v < total
            })
    }

    pub(crate) fn check(
        &self,
        instance: &Instance,
        owners: &[usize],
        property: &Property,
        variant: EqxVariant,
    ) -> PropertyReport {
        for i in 0..self.n {
            for k in 0..self.n {
                if self.pair_violates(property, variant, i, k) {
                    let good = self.violating_good(instance, owners, property, variant, i, k);
                    return PropertyReport {
                        property: property.clone(),
                        holds: false,
                        witness: Some(Witness { agent: i, other: k, good }),
                    };
                }
            }
        }
        PropertyReport {
            property: property.clone(),
            holds: true,
            witness: None,
        }
    }

    pub(crate) fn holds(&self, property: &Property, variant: EqxVariant) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|k| !self.pair_violates(property, variant, i, k)))
    }
}

fn validate_eps(property: &Property) -> Result<()> {
    if let Property::EpsEq1(eps) = property {
        if *eps <= Rational::zero() {
            return Err(Error::InvalidEps(format!("epsilon must be positive, got {}", format_rational(eps))));
        }
    }
    Ok(())
}

/// Evaluates `property` with the default "up to any good" variant.
pub fn check_property(instance: &Instance, allocation: &Allocation, property: &Property) -> Result<PropertyReport> {
    check_property_with(instance, allocation, property, EqxVariant::default())
}

pub fn check_property_with(
    instance: &Instance,
    allocation: &Allocation,
    property: &Property,
    variant: EqxVariant,
) -> Result<PropertyReport> {
    allocation.validate_for(instance)?;
    validate_eps(property)?;
    let stats = BundleStats::new(instance, allocation.owners());
    Ok(stats.check(instance, allocation.owners(), property, variant))
}

/// Re-evaluates a single witness pair against the definition.
pub fn witness_violates(instance: &Instance, allocation: &Allocation, property: &Property, witness: &Witness) -> bool {
    let stats = BundleStats::new(instance, allocation.owners());
    stats.pair_violates(property, EqxVariant::default(), witness.agent, witness.other)
}
