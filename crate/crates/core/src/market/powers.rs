//! Exact comparisons between sums of powers of a rational base `b = (q+p)/q`.
//!
//! Materialising `b^t` as a fraction costs `t·log2(q+p)` bits, which is far
//! too much for the exponents produced by small epsilons. Comparisons are
//! therefore made on fixed-point enclosures `lo ≤ b^t·2^P ≤ hi`, doubling `P`
//! until the enclosures separate, and falling back to exact integers only when
//! `P` has grown past the exact cost. Every answer is exact.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_traits::{One, Zero};

const START_PRECISION: u32 = 128;
const EXACT_BITS: u64 = 4096;

#[derive(Debug)]
pub(crate) struct PowerArith {
    num: BigUint,
    den: BigUint,
    bits_per_power: u64,
    exact_bits: u64,
    cache: Mutex<Cache>,
}

#[derive(Debug, Default)]
struct Cache {
    enclosures: HashMap<(u32, u64), (BigUint, BigUint)>,
    num_powers: HashMap<u64, BigUint>,
    den_powers: HashMap<u64, BigUint>,
}

impl Clone for PowerArith {
    fn clone(&self) -> Self {
        let mut copy = PowerArith::new(self.num.clone(), self.den.clone());
        copy.exact_bits = self.exact_bits;
        copy
    }
}

impl PowerArith {
    /// Base `num/den`; requires `num > den > 0`.
    pub(crate) fn new(num: BigUint, den: BigUint) -> Self {
        assert!(num > den && !den.is_zero(), "base must exceed one");
        let bits_per_power = num.bits();
        PowerArith {
            num,
            den,
            bits_per_power,
            exact_bits: EXACT_BITS,
            cache: Mutex::new(Cache::default()),
        }
    }

    fn exact_cost(&self, max_exp: u64) -> u64 {
        max_exp.saturating_mul(self.bits_per_power)
    }

    /// Lower and upper bounds of `b^t·2^P`.
    fn enclosure(&self, prec: u32, t: u64) -> (BigUint, BigUint) {
        if let Some(e) = self.cache.lock().unwrap().enclosures.get(&(prec, t)) {
            return e.clone();
        }
        let one = BigUint::one() << prec;
        let scaled = &self.num << prec;
        let base_lo = &scaled / &self.den;
        let base_hi = if (&base_lo * &self.den) == scaled {
            base_lo.clone()
        } else {
            &base_lo + 1u32
        };
        let mask = &one - 1u32;
        let mul_lo = |a: &BigUint, b: &BigUint| (a * b) >> prec;
        let mul_hi = |a: &BigUint, b: &BigUint| ((a * b) + &mask) >> prec;
        let (mut lo, mut hi) = (one.clone(), one);
        let (mut blo, mut bhi) = (base_lo, base_hi);
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                lo = mul_lo(&lo, &blo);
                hi = mul_hi(&hi, &bhi);
            }
            e >>= 1;
            if e > 0 {
                blo = mul_lo(&blo, &blo);
                bhi = mul_hi(&bhi, &bhi);
            }
        }
        self.cache
            .lock()
            .unwrap()
            .enclosures
            .insert((prec, t), (lo.clone(), hi.clone()));
        (lo, hi)
    }

    fn num_pow(&self, t: u64) -> BigUint {
        let mut cache = self.cache.lock().unwrap();
        cache
            .num_powers
            .entry(t)
            .or_insert_with(|| num_traits::pow(self.num.clone(), t as usize))
            .clone()
    }

    fn den_pow(&self, t: u64) -> BigUint {
        let mut cache = self.cache.lock().unwrap();
        cache
            .den_powers
            .entry(t)
            .or_insert_with(|| num_traits::pow(self.den.clone(), t as usize))
            .clone()
    }

    /// `Σ b^x` over `xs`, scaled by `den^top` so that it is an integer.
    fn exact_sum(&self, xs: &[u64], top: u64) -> BigUint {
        xs.iter().map(|&x| self.num_pow(x) * self.den_pow(top - x)).sum()
    }

    /// Compares `Σ_{x∈a} b^x` with `Σ_{y∈b} b^y`.
    pub(crate) fn cmp_sums(&self, a: &[u64], b: &[u64]) -> Ordering {
        let (mut a, mut b) = cancel(a, b);
        if a.is_empty() || b.is_empty() {
            return a.len().cmp(&b.len());
        }
        // Dividing both sides by b^min keeps the order and shrinks exponents.
        let low = a.iter().chain(&b).copied().min().unwrap();
        a.iter_mut().chain(b.iter_mut()).for_each(|x| *x -= low);
        let top = a.iter().chain(&b).copied().max().unwrap();
        let cost = self.exact_cost(top);
        if cost <= self.exact_bits {
            return self.exact_sum(&a, top).cmp(&self.exact_sum(&b, top));
        }
        let mut prec = START_PRECISION;
        while (prec as u64) < cost.saturating_add(64) {
            let (alo, ahi) = self.sum_enclosure(prec, &a);
            let (blo, bhi) = self.sum_enclosure(prec, &b);
            if alo > bhi {
                return Ordering::Greater;
            }
            if ahi < blo {
                return Ordering::Less;
            }
            prec *= 2;
        }
        self.exact_sum(&a, top).cmp(&self.exact_sum(&b, top))
    }

    fn sum_enclosure(&self, prec: u32, xs: &[u64]) -> (BigUint, BigUint) {
        let mut lo = BigUint::zero();
        let mut hi = BigUint::zero();
        for &x in xs {
            let (l, h) = self.enclosure(prec, x);
            lo += l;
            hi += h;
        }
        (lo, hi)
    }

    /// Compares `b^t` with a positive integer.
    pub(crate) fn cmp_power_int(&self, t: u64, v: u64) -> Ordering {
        let cost = self.exact_cost(t);
        if cost <= self.exact_bits {
            return self.num_pow(t).cmp(&(self.den_pow(t) * v));
        }
        let mut prec = START_PRECISION;
        while (prec as u64) < cost.saturating_add(64) {
            let (lo, hi) = self.enclosure(prec, t);
            let target = BigUint::from(v) << prec;
            if lo > target {
                return Ordering::Greater;
            }
            if hi < target {
                return Ordering::Less;
            }
            prec *= 2;
        }
        self.num_pow(t).cmp(&(self.den_pow(t) * v))
    }

    /// `b^t` as an exact fraction `(num^t, den^t)`.
    pub(crate) fn materialise(&self, t: u64) -> (BigUint, BigUint) {
        (self.num_pow(t), self.den_pow(t))
    }
}

/// Removes the common sub-multiset of two exponent lists.
fn cancel(a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (mut ra, mut rb) = (Vec::with_capacity(a.len()), Vec::with_capacity(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                ra.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                rb.push(b[j]);
                j += 1;
            }
        }
    }
    ra.extend_from_slice(&a[i..]);
    rb.extend_from_slice(&b[j..]);
    (ra, rb)
}
