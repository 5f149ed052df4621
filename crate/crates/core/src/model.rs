//! Instances, integral allocations and fractional allocations.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Additive valuations of `n` agents over `m` indivisible goods.
///
/// The derived flags and `v_max` are computed once on construction; the
/// matrix is immutable afterwards, so they can never drift out of sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    valuations: Vec<Vec<u64>>,
    n_goods: usize,
    v_max: u64,
    is_binary: bool,
    is_positive: bool,
    is_identical: bool,
}

impl Instance {
    /// Builds an instance from a row-major `n × m` matrix.
    ///
    /// Rejects empty matrices, ragged rows, and rows whose total would
    /// overflow `u64` (bundle values are summed in `u64`).
    pub fn new(valuations: Vec<Vec<u64>>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidInstance("at least one agent is required".into()));
        }
        let n_goods = valuations[0].len();
        if n_goods == 0 {
            return Err(Error::InvalidInstance("at least one good is required".into()));
        }
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != n_goods {
                return Err(Error::InvalidInstance(format!(
                    "row {i} has {} entries, expected {n_goods}",
                    row.len()
                )));
            }
            row.iter()
                .try_fold(0u64, |acc, &v| acc.checked_add(v))
                .ok_or_else(|| Error::InvalidInstance(format!("row {i} total overflows u64")))?;
        }
        let v_max = valuations.iter().flatten().copied().max().unwrap_or(0);
        let is_binary = valuations.iter().flatten().all(|&v| v <= 1);
        let is_positive = valuations.iter().flatten().all(|&v| v >= 1);
        let is_identical = valuations.windows(2).all(|w| w[0] == w[1]);
        Ok(Instance {
            valuations,
            n_goods,
            v_max,
            is_binary,
            is_positive,
            is_identical,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn n_goods(&self) -> usize {
        self.n_goods
    }

    #[inline]
    pub fn value(&self, agent: usize, good: usize) -> u64 {
        self.valuations[agent][good]
    }

    pub fn row(&self, agent: usize) -> &[u64] {
        &self.valuations[agent]
    }

    pub fn valuations(&self) -> &[Vec<u64>] {
        &self.valuations
    }

    pub fn v_max(&self) -> u64 {
        self.v_max
    }

    pub fn is_binary(&self) -> bool {
        self.is_binary
    }

    pub fn is_positive(&self) -> bool {
        self.is_positive
    }

    pub fn is_identical(&self) -> bool {
        self.is_identical
    }

    /// Value of `agent` for an arbitrary set of goods.
    pub fn bundle_value(&self, agent: usize, goods: &[usize]) -> u64 {
        goods.iter().map(|&g| self.valuations[agent][g]).sum()
    }

    /// `n^m`, the number of integral allocations.
    pub fn search_space_size(&self) -> u128 {
        search_space_size(self.n_agents(), self.n_goods())
    }
}

pub(crate) fn search_space_size(n: usize, m: usize) -> u128 {
    (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX)
}

/// A complete partition of the goods into one (possibly empty) bundle per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AllocationRepr", into = "AllocationRepr")]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
    owners: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct AllocationRepr {
    bundles: Vec<Vec<usize>>,
}

impl TryFrom<AllocationRepr> for Allocation {
    type Error = Error;

    fn try_from(repr: AllocationRepr) -> Result<Self> {
        let m = repr.bundles.iter().map(Vec::len).sum();
        Allocation::new(m, repr.bundles)
    }
}

impl From<Allocation> for AllocationRepr {
    fn from(alloc: Allocation) -> Self {
        AllocationRepr {
            bundles: alloc.bundles,
        }
    }
}

impl Allocation {
    /// Builds an allocation of goods `0..n_goods` from explicit bundles.
    pub fn new(n_goods: usize, bundles: Vec<Vec<usize>>) -> Result<Self> {
        if bundles.is_empty() {
            return Err(Error::InvalidAllocation("no bundles".into()));
        }
        let mut owners = vec![usize::MAX; n_goods];
        for (agent, bundle) in bundles.iter().enumerate() {
            for &good in bundle {
                if good >= n_goods {
                    return Err(Error::InvalidAllocation(format!(
                        "good {good} out of range for {n_goods} goods"
                    )));
                }
                if owners[good] != usize::MAX {
                    return Err(Error::InvalidAllocation(format!(
                        "good {good} assigned to agents {} and {agent}",
                        owners[good]
                    )));
                }
                owners[good] = agent;
            }
        }
        if let Some(good) = owners.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidAllocation(format!("good {good} is unassigned")));
        }
        Ok(Self::from_owners_unchecked(bundles.len(), owners))
    }

    /// Builds an allocation from the owner of each good.
    pub fn from_owners(n_agents: usize, owners: Vec<usize>) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidAllocation("no agents".into()));
        }
        if let Some((good, &agent)) = owners.iter().enumerate().find(|(_, &a)| a >= n_agents) {
            return Err(Error::InvalidAllocation(format!(
                "good {good} owned by agent {agent}, but there are only {n_agents} agents"
            )));
        }
        Ok(Self::from_owners_unchecked(n_agents, owners))
    }

    pub(crate) fn from_owners_unchecked(n_agents: usize, owners: Vec<usize>) -> Self {
        let mut bundles = vec![Vec::new(); n_agents];
        for (good, &agent) in owners.iter().enumerate() {
            bundles[agent].push(good);
        }
        Allocation { bundles, owners }
    }

    pub fn n_agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn n_goods(&self) -> usize {
        self.owners.len()
    }

    /// Goods held by `agent`, in increasing index order.
    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn owner(&self, good: usize) -> usize {
        self.owners[good]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owners
    }

    /// Moves `good` to `to`, keeping bundles sorted.
    pub fn transfer(&mut self, good: usize, to: usize) {
        let from = self.owners[good];
        if from == to {
            return;
        }
        self.bundles[from].retain(|&g| g != good);
        let pos = self.bundles[to].partition_point(|&g| g < good);
        self.bundles[to].insert(pos, good);
        self.owners[good] = to;
    }

    /// Checks that the allocation matches the instance dimensions.
    pub fn validate_for(&self, instance: &Instance) -> Result<()> {
        if self.n_agents() != instance.n_agents() || self.n_goods() != instance.n_goods() {
            return Err(Error::InvalidAllocation(format!(
                "allocation is {}×{}, instance is {}×{}",
                self.n_agents(),
                self.n_goods(),
                instance.n_agents(),
                instance.n_goods()
            )));
        }
        Ok(())
    }
}

/// A fractional assignment `x[i][j] ∈ [0,1]` with every good's column summing to at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAllocation {
    shares: Vec<Vec<Rational>>,
}

impl FractionalAllocation {
    pub fn new(shares: Vec<Vec<Rational>>) -> Result<Self> {
        let m = shares.first().map(Vec::len).unwrap_or(0);
        if shares.is_empty() || shares.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidAllocation("share matrix must be non-empty and rectangular".into()));
        }
        let one = Rational::one();
        for j in 0..m {
            let mut column = Rational::zero();
            for row in &shares {
                if row[j] < Rational::zero() || row[j] > one {
                    return Err(Error::InvalidAllocation(format!("share of good {j} outside [0,1]")));
                }
                column += &row[j];
            }
            if column > one {
                return Err(Error::InvalidAllocation(format!("good {j} allocated more than once")));
            }
        }
        Ok(FractionalAllocation { shares })
    }

    pub fn from_integral(alloc: &Allocation) -> Self {
        let mut shares = vec![vec![Rational::zero(); alloc.n_goods()]; alloc.n_agents()];
        for (good, &agent) in alloc.owners().iter().enumerate() {
            shares[agent][good] = Rational::one();
        }
        FractionalAllocation { shares }
    }

    pub fn share(&self, agent: usize, good: usize) -> &Rational {
        &self.shares[agent][good]
    }

    pub fn shares(&self) -> &[Vec<Rational>] {
        &self.shares
    }

    /// `Σ_j x[i][j] · values[i][j]` for every agent.
    pub fn utilities(&self, values: &[Vec<Rational>]) -> Vec<Rational> {
        self.shares
            .iter()
            .zip(values)
            .map(|(row, vals)| row.iter().zip(vals).map(|(x, v)| x * v).sum())
            .collect()
    }
}
