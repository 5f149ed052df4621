use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::market::powers::PowerArith;
use crate::model::Instance;
use crate::rational::{format_rational, Rational};

/// `1/(16·m·v_max⁴)`: below this, the rounded solution is exactly EQ1 and PO.
pub fn default_eps(instance: &Instance) -> Result<Rational> {
    if !instance.is_positive() {
        return Err(Error::NotPositive);
    }
    let v = BigInt::from(instance.v_max());
    let den = BigInt::from(16u32) * BigInt::from(instance.n_goods()) * &v * &v * &v * &v;
    Ok(Rational::new(BigInt::one(), den))
}

/// Valuations rounded up to integral powers of `1+ε`, kept as exponents.
#[derive(Debug, Clone)]
pub struct RoundedInstance {
    eps: Rational,
    exponents: Vec<Vec<Option<u64>>>,
    original: Instance,
    arith: PowerArith,
}

fn to_biguint(x: &BigInt) -> BigUint {
    x.to_biguint().expect("non-negative")
}

pub fn eps_round(instance: &Instance, eps: &Rational) -> Result<RoundedInstance> {
    if !eps.is_positive() || *eps > Rational::one() {
        return Err(Error::InvalidEps(format!(
            "epsilon must lie in (0, 1], got {}",
            format_rational(eps)
        )));
    }
    let num = to_biguint(&(eps.denom() + eps.numer()));
    let den = to_biguint(eps.denom());
    let arith = PowerArith::new(num, den);
    let exponents = instance
        .valuations()
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| if v == 0 { Some(None) } else { ceil_log(&arith, v).map(Some) })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| {
                    Error::InvalidEps(format!(
                        "epsilon {} is too small for valuations up to {}: rounded exponents exceed 2^{}",
                        format_rational(eps),
                        instance.v_max(),
                        MAX_EXPONENT.trailing_zeros()
                    ))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundedInstance {
        eps: eps.clone(),
        exponents,
        original: instance.clone(),
        arith,
    })
}

/// Largest exponent the market tracks; keeps price arithmetic inside `i64`.
pub const MAX_EXPONENT: u64 = 1 << 56;

/// Smallest `t` with `b^t ≥ v`, found by doubling then bisection; `None` past [`MAX_EXPONENT`].
fn ceil_log(arith: &PowerArith, v: u64) -> Option<u64> {
    if v == 1 {
        return Some(0);
    }
    let mut hi = 1u64;
    while arith.cmp_power_int(hi, v) == Ordering::Less {
        if hi >= MAX_EXPONENT {
            return None;
        }
        hi *= 2;
    }
    // Invariant: b^lo < v ≤ b^hi.
    let mut lo = hi / 2;
    if lo == 0 || arith.cmp_power_int(lo, v) != Ordering::Less {
        lo = 0;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if arith.cmp_power_int(mid, v) == Ordering::Less {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi <= MAX_EXPONENT).then_some(hi)
}

impl RoundedInstance {
    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    /// `1+ε`.
    pub fn base(&self) -> Rational {
        Rational::one() + &self.eps
    }

    pub fn original(&self) -> &Instance {
        &self.original
    }

    pub fn n_agents(&self) -> usize {
        self.exponents.len()
    }

    pub fn n_goods(&self) -> usize {
        self.original.n_goods()
    }

    /// `t` with `w_ij = (1+ε)^t`; `None` when `w_ij = 0`.
    pub fn exponent(&self, agent: usize, good: usize) -> Option<u64> {
        self.exponents[agent][good]
    }

    pub fn exponents(&self) -> &[Vec<Option<u64>>] {
        &self.exponents
    }

    pub fn max_exponent(&self) -> u64 {
        self.exponents.iter().flatten().flatten().copied().max().unwrap_or(0)
    }

    /// `w_ij` as an exact rational. The size grows linearly with the exponent.
    pub fn value(&self, agent: usize, good: usize) -> Rational {
        match self.exponents[agent][good] {
            None => Rational::zero(),
            Some(t) => self.power(t),
        }
    }

    pub(crate) fn power(&self, t: u64) -> Rational {
        let (n, d) = self.arith.materialise(t);
        Rational::new(BigInt::from_biguint(Sign::Plus, n), BigInt::from_biguint(Sign::Plus, d))
    }

    /// The full rounded matrix as rationals; intended for moderate exponents.
    pub fn values(&self) -> Vec<Vec<Rational>> {
        (0..self.n_agents())
            .map(|i| (0..self.n_goods()).map(|j| self.value(i, j)).collect())
            .collect()
    }

    /// Exponents of `w_i(S)`'s terms; zero-valued goods contribute nothing.
    pub(crate) fn terms(&self, agent: usize, goods: impl IntoIterator<Item = usize>) -> Vec<u64> {
        goods
            .into_iter()
            .filter_map(|g| self.exponents[agent][g])
            .collect()
    }

    pub(crate) fn cmp_terms(&self, a: &[u64], b: &[u64]) -> Ordering {
        self.arith.cmp_sums(a, b)
    }

    /// Checks `v ≤ w ≤ (1+ε)·v` and `v = 0 ⇔ w = 0` for every entry.
    pub fn check_sandwich(&self) -> bool {
        (0..self.n_agents()).all(|i| {
            (0..self.n_goods()).all(|j| {
                let v = self.original.value(i, j);
                match self.exponents[i][j] {
                    None => v == 0,
                    Some(t) => {
                        v > 0
                            && self.arith.cmp_power_int(t, v) != Ordering::Less
                            && (t == 0 || self.arith.cmp_power_int(t - 1, v) != Ordering::Greater)
                    }
                }
            })
        })
    }
}

impl fmt::Display for RoundedInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", format_rational(&self.base()))?;
        for row in &self.exponents {
            let cells: Vec<String> = row
                .iter()
                .map(|t| t.map_or_else(|| "-".to_string(), |t| t.to_string()))
                .collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}
