use std::cmp::Ordering;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::market::rounding::RoundedInstance;
use crate::model::Allocation;
use crate::rational::Rational;

/// Integral Fisher-market outcome over a rounded instance.
///
/// Prices are `(1+ε)^e_j` and are stored as the exponents `e_j`; the MBB ratio
/// of agent `i` is `(1+ε)^B_i` with `B_i = max_j (t_ij − e_j)`.
#[derive(Debug, Clone)]
pub struct MarketState {
    rounded: RoundedInstance,
    allocation: Allocation,
    price_exp: Vec<i64>,
    mbb_exp: Vec<Option<i64>>,
}

/// Breadth-first levels of the MBB-allocation graph from the reference agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityLevels {
    pub reference: usize,
    /// Level of each agent; `n` marks unreachable agents.
    pub level: Vec<usize>,
    /// `(predecessor, good)` realising a shortest alternating path.
    pub parent_edge: Vec<Option<(usize, usize)>>,
    /// Agents grouped by level, each group in increasing index order.
    pub layers: Vec<Vec<usize>>,
}

impl ReachabilityLevels {
    pub fn is_reachable(&self, agent: usize) -> bool {
        self.level[agent] < self.level.len()
    }

    pub fn reachable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.level.len()).filter(|&a| self.is_reachable(a))
    }

    /// Alternating path `reference, g1, a1, …, g_l, agent` from the parent edges.
    pub fn path_to(&self, agent: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        let mut cur = agent;
        while let Some((pred, good)) = self.parent_edge[cur] {
            path.push((pred, good));
            cur = pred;
        }
        path.reverse();
        path
    }
}

/// An ε-path-violator: `agent` loses `good` to `predecessor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathViolator {
    pub agent: usize,
    pub predecessor: usize,
    pub good: usize,
}

impl MarketState {
    /// Assigns every good to a highest rounded bidder (smallest index on ties)
    /// and prices it at that bidder's value.
    pub fn phase1(rounded: RoundedInstance) -> Result<Self> {
        let n = rounded.n_agents();
        let m = rounded.n_goods();
        let mut owners = Vec::with_capacity(m);
        let mut price_exp = Vec::with_capacity(m);
        for j in 0..m {
            let mut best: Option<(usize, u64)> = None;
            for i in 0..n {
                if let Some(t) = rounded.exponent(i, j) {
                    if best.is_none_or(|(_, bt)| t > bt) {
                        best = Some((i, t));
                    }
                }
            }
            let (owner, t) = best.ok_or(Error::NotPositive)?;
            owners.push(owner);
            price_exp.push(t as i64);
        }
        let allocation = Allocation::from_owners_unchecked(n, owners);
        Ok(Self::from_parts(rounded, allocation, price_exp))
    }

    pub(crate) fn from_parts(rounded: RoundedInstance, allocation: Allocation, price_exp: Vec<i64>) -> Self {
        let mut state = MarketState {
            rounded,
            allocation,
            price_exp,
            mbb_exp: Vec::new(),
        };
        state.refresh_mbb();
        state
    }

    fn refresh_mbb(&mut self) {
        let n = self.rounded.n_agents();
        self.mbb_exp = (0..n)
            .map(|i| (0..self.price_exp.len()).filter_map(|j| self.bang_exp(i, j)).max())
            .collect();
    }

    /// `log_{1+ε}(w_ij / p_j)`, or `None` when `w_ij = 0`.
    pub fn bang_exp(&self, agent: usize, good: usize) -> Option<i64> {
        self.rounded
            .exponent(agent, good)
            .map(|t| t as i64 - self.price_exp[good])
    }

    pub fn rounded(&self) -> &RoundedInstance {
        &self.rounded
    }

    pub fn allocation(&self) -> &Allocation {
        &self.allocation
    }

    pub fn price_exponents(&self) -> &[i64] {
        &self.price_exp
    }

    /// `p_j` as an exact rational.
    pub fn price(&self, good: usize) -> Rational {
        let e = self.price_exp[good];
        if e >= 0 {
            self.rounded.power(e as u64)
        } else {
            self.rounded.power(e.unsigned_abs()).recip()
        }
    }

    /// `B_i` with MBB ratio `β_i = (1+ε)^B_i`; `None` if the agent values nothing.
    pub fn mbb_exponent(&self, agent: usize) -> Option<i64> {
        self.mbb_exp[agent]
    }

    pub fn mbb_ratio(&self, agent: usize) -> Option<Rational> {
        self.mbb_exp[agent].map(|b| {
            if b >= 0 {
                self.rounded.power(b as u64)
            } else {
                self.rounded.power(b.unsigned_abs()).recip()
            }
        })
    }

    pub fn in_mbb(&self, agent: usize, good: usize) -> bool {
        matches!((self.bang_exp(agent, good), self.mbb_exp[agent]), (Some(a), Some(b)) if a == b)
    }

    pub fn mbb_set(&self, agent: usize) -> Vec<usize> {
        (0..self.price_exp.len()).filter(|&j| self.in_mbb(agent, j)).collect()
    }

    /// `s_i = Σ_{j∈A_i} p_j`.
    pub fn spending(&self, agent: usize) -> Rational {
        self.allocation
            .bundle(agent)
            .iter()
            .fold(Rational::zero(), |acc, &j| acc + self.price(j))
    }

    /// Every positively valued owned good lies in its owner's MBB set.
    pub fn is_mbb_consistent(&self) -> bool {
        self.allocation.owners().iter().enumerate().all(|(j, &i)| {
            self.rounded.exponent(i, j).is_none() || self.in_mbb(i, j)
        })
    }

    pub(crate) fn utility_terms(&self, agent: usize) -> Vec<u64> {
        self.rounded.terms(agent, self.allocation.bundle(agent).iter().copied())
    }

    /// Compares rounded utilities `w_a(A_a)` and `w_b(A_b)`.
    pub fn cmp_utilities(&self, a: usize, b: usize) -> Ordering {
        self.rounded.cmp_terms(&self.utility_terms(a), &self.utility_terms(b))
    }

    /// Least rounded utility, smallest index on ties.
    pub fn reference_agent(&self) -> usize {
        (1..self.rounded.n_agents()).fold(0, |best, i| {
            if self.cmp_utilities(i, best) == Ordering::Less {
                i
            } else {
                best
            }
        })
    }

    /// `(1+ε)·w_ref(A_ref)` as exponent terms.
    fn scaled_reference_terms(&self, reference: usize) -> Vec<u64> {
        self.utility_terms(reference).into_iter().map(|t| t + 1).collect()
    }

    /// `w_k(A_k \ {j}) > (1+ε)·w_ref(A_ref)`.
    fn exceeds_after_removal(&self, agent: usize, good: usize, scaled_ref: &[u64]) -> bool {
        let rest = self.rounded.terms(
            agent,
            self.allocation.bundle(agent).iter().copied().filter(|&g| g != good),
        );
        self.rounded.cmp_terms(&rest, scaled_ref) == Ordering::Greater
    }

    /// Agents that stay above `(1+ε)` times the reference after losing any one good.
    pub fn eps_violators(&self) -> Vec<usize> {
        let reference = self.reference_agent();
        let scaled = self.scaled_reference_terms(reference);
        (0..self.rounded.n_agents())
            .filter(|&k| {
                let bundle = self.allocation.bundle(k);
                // Removing the most valuable good is the weakest test.
                let best = bundle
                    .iter()
                    .copied()
                    .max_by_key(|&g| self.rounded.exponent(k, g).map_or(-1, |t| t as i64));
                best.is_some_and(|g| self.exceeds_after_removal(k, g, &scaled))
            })
            .collect()
    }

    /// ε-EQ1 with respect to the rounded valuations.
    pub fn is_eps_eq1(&self) -> bool {
        self.eps_violators().is_empty()
    }

    pub fn build_reachability(&self) -> ReachabilityLevels {
        self.reachability_from(self.reference_agent())
    }

    pub fn reachability_from(&self, reference: usize) -> ReachabilityLevels {
        let n = self.rounded.n_agents();
        let mut level = vec![n; n];
        let mut parent_edge = vec![None; n];
        level[reference] = 0;
        let mut layers = vec![vec![reference]];
        loop {
            let current = layers.last().unwrap();
            let mut next: Vec<usize> = Vec::new();
            for &g in current {
                for j in self.mbb_set(g) {
                    let h = self.allocation.owner(j);
                    if level[h] == n {
                        level[h] = layers.len();
                        parent_edge[h] = Some((g, j));
                        next.push(h);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_unstable();
            layers.push(next);
        }
        ReachabilityLevels {
            reference,
            level,
            parent_edge,
            layers,
        }
    }

    /// Scans levels `1, 2, …`, agents in increasing order, and for each agent
    /// every last edge `(predecessor at level ℓ−1, good)` in increasing order.
    pub fn find_eps_path_violator(&self, levels: &ReachabilityLevels) -> Option<PathViolator> {
        let scaled = self.scaled_reference_terms(levels.reference);
        for l in 1..levels.layers.len() {
            for &h in &levels.layers[l] {
                for &pred in &levels.layers[l - 1] {
                    for &j in self.allocation.bundle(h) {
                        if self.in_mbb(pred, j) && self.exceeds_after_removal(h, j, &scaled) {
                            return Some(PathViolator {
                                agent: h,
                                predecessor: pred,
                                good: j,
                            });
                        }
                    }
                }
            }
        }
        None
    }

    /// Moves `good` from `from` to `to`; the good must be MBB for `to`.
    pub fn swap(&mut self, good: usize, from: usize, to: usize) -> Result<()> {
        if self.allocation.owner(good) != from {
            return Err(Error::InvariantBreach(format!("good {good} is not owned by agent {from}")));
        }
        if !self.in_mbb(to, good) {
            return Err(Error::InvariantBreach(format!("good {good} is not MBB for agent {to}")));
        }
        self.allocation.transfer(good, to);
        Ok(())
    }

    /// Exponent `k` of the smallest price-rise factor `Δ = (1+ε)^k` that adds
    /// an MBB edge from a reachable agent to an unreachable good.
    pub fn price_rise_exponent(&self, levels: &ReachabilityLevels) -> Result<u64> {
        let reachable_good = |j: usize| levels.is_reachable(self.allocation.owner(j));
        let mut best: Option<i64> = None;
        for h in levels.reachable() {
            let Some(beta) = self.mbb_exp[h] else { continue };
            for j in (0..self.price_exp.len()).filter(|&j| !reachable_good(j)) {
                if let Some(bang) = self.bang_exp(h, j) {
                    let k = beta - bang;
                    best = Some(best.map_or(k, |b: i64| b.min(k)));
                }
            }
        }
        match best {
            None => Err(Error::InvariantBreach(
                "price rise requested but no unreachable good is valued by a reachable agent".into(),
            )),
            Some(k) if k < 1 => Err(Error::InvariantBreach(format!(
                "price-rise exponent {k} is not positive"
            ))),
            Some(k) => Ok(k as u64),
        }
    }

    /// Multiplies the prices of all reachable goods by `(1+ε)^k`; returns the raised goods.
    pub fn raise_prices(&mut self, levels: &ReachabilityLevels, k: u64) -> Vec<usize> {
        let goods: Vec<usize> = (0..self.price_exp.len())
            .filter(|&j| levels.is_reachable(self.allocation.owner(j)))
            .collect();
        self.apply_rise(&goods, k);
        goods
    }

    pub(crate) fn apply_rise(&mut self, goods: &[usize], k: u64) {
        for &j in goods {
            self.price_exp[j] += k as i64;
        }
        self.refresh_mbb();
    }

    /// Computes and applies a price rise. Fails if every agent is reachable.
    pub fn price_rise(&mut self, levels: &ReachabilityLevels) -> Result<(u64, Vec<usize>)> {
        if levels.reachable().count() == self.rounded.n_agents() {
            return Err(Error::InvariantBreach(
                "price rise with every agent reachable; no ε-violator can remain".into(),
            ));
        }
        let k = self.price_rise_exponent(levels)?;
        let goods = self.raise_prices(levels, k);
        Ok((k, goods))
    }

    /// Same allocation and prices.
    pub fn same_outcome(&self, other: &MarketState) -> bool {
        self.allocation == other.allocation && self.price_exp == other.price_exp
    }
}
