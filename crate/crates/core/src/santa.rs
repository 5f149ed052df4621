//! Max-min value and approximation audits for EQX/EQ1 allocations.

use num_bigint::BigInt;
use num_traits::One;

use crate::checks::{check_property, utilities, Property};
use crate::error::Result;
use crate::model::{Allocation, Instance};
use crate::oracle::BruteForce;
use crate::rational::{from_int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub bound: Rational,
    pub applicable: bool,
    /// `min_utility ≥ bound·opt`; vacuously true when not applicable.
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SantaAudit {
    pub opt: u64,
    pub min_utility: u64,
    /// `min_utility / opt`, or 1 when `opt = 0`.
    pub ratio: Rational,
    /// Bundle size of the first agent with the highest utility.
    pub c: usize,
    pub bounds: Vec<BoundCheck>,
}

impl SantaAudit {
    pub fn all_satisfied(&self) -> bool {
        self.bounds.iter().all(|b| b.satisfied)
    }
}

pub fn opt_value(instance: &Instance) -> Result<u64> {
    Ok(BruteForce::default().maximin(instance)?.0)
}

pub fn audit(instance: &Instance, allocation: &Allocation) -> Result<SantaAudit> {
    audit_with(&BruteForce::default(), instance, allocation)
}

pub fn audit_with(bf: &BruteForce, instance: &Instance, allocation: &Allocation) -> Result<SantaAudit> {
    allocation.validate_for(instance)?;
    let opt = bf.maximin(instance)?.0;
    audit_known_opt(bf, instance, allocation, opt)
}

/// Audit with a precomputed max-min value.
pub fn audit_known_opt(bf: &BruteForce, instance: &Instance, allocation: &Allocation, opt: u64) -> Result<SantaAudit> {
    let u = utilities(instance, allocation);
    let min_utility = u.iter().copied().min().unwrap_or(0);
    let ratio = if opt == 0 {
        Rational::one()
    } else {
        Rational::new(BigInt::from(min_utility), BigInt::from(opt))
    };
    let top = u.iter().copied().max().unwrap_or(0);
    let richest = u.iter().position(|&x| x == top).unwrap_or(0);
    let c = allocation.bundle(richest).len();
    let n = instance.n_agents();

    let eqx_po = check_property(instance, allocation, &Property::Eqx)?.holds
        && bf.is_po(instance, allocation)?.pareto_optimal;
    let identical_eq1 = instance.is_identical() && check_property(instance, allocation, &Property::Eq1)?.holds;
    let meets = |b: &Rational| from_int(min_utility) >= b * from_int(opt);

    let eqx_bound = if c == 0 {
        Rational::from_integer(BigInt::from(0))
    } else {
        Rational::one() - Rational::new(BigInt::one(), BigInt::from(c))
    };
    let inv_n = Rational::new(BigInt::one(), BigInt::from(n));
    let bounds = vec![
        BoundCheck {
            name: "eqx_po",
            satisfied: !eqx_po || meets(&eqx_bound),
            bound: eqx_bound,
            applicable: eqx_po,
        },
        BoundCheck {
            name: "identical_eq1",
            satisfied: !identical_eq1 || meets(&inv_n),
            bound: inv_n,
            applicable: identical_eq1,
        },
    ];
    Ok(SantaAudit {
        opt,
        min_utility,
        ratio,
        c,
        bounds,
    })
}
