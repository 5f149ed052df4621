//! Polynomial-time procedures for binary (approve/disapprove) valuations.

use std::collections::VecDeque;

use crate::checks::{check_property, utilities, Property};
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};

mod flow;

pub use flow::{FlowNetwork, FlowResult, TransformationGraph};

fn require_binary(instance: &Instance) -> Result<()> {
    if instance.is_binary() {
        Ok(())
    } else {
        Err(Error::NotBinary)
    }
}

fn approved_goods(instance: &Instance) -> usize {
    (0..instance.n_goods())
        .filter(|&j| (0..instance.n_agents()).any(|i| instance.value(i, j) > 0))
        .count()
}

/// An equitable and Pareto-optimal allocation with the largest common
/// utility, if one exists.
pub fn eq_po_binary(instance: &Instance) -> Result<Option<Allocation>> {
    require_binary(instance)?;
    let n = instance.n_agents();
    let m = instance.n_goods();
    let approved = approved_goods(instance);
    if approved == 0 {
        return Ok(Some(Allocation::from_owners_unchecked(n, vec![0; m])));
    }
    for c in (1..=m / n).rev() {
        // Under PO every approved good reaches an approver, so the total utility is `approved`.
        if approved != n * c {
            continue;
        }
        let flow = FlowNetwork::new(instance, c as u64).max_flow();
        if flow.value == (n * c) as u64 {
            let owners = flow.assignment.iter().map(|a| a.unwrap_or(0)).collect();
            return Ok(Some(Allocation::from_owners_unchecked(n, owners)));
        }
    }
    Ok(None)
}

/// A maximum Nash welfare allocation.
///
/// Starts from a greedy assignment of each approved good to its poorest
/// approver, then moves goods along shortest exchange paths from an agent `s`
/// to an agent `t` with `u_s ≥ u_t + 2` until none remain.
pub fn nash_optimal_binary(instance: &Instance) -> Result<Allocation> {
    require_binary(instance)?;
    let n = instance.n_agents();
    let m = instance.n_goods();
    let mut alloc = Allocation::from_owners_unchecked(n, vec![0; m]);
    let mut u = vec![0u64; n];
    for j in 0..m {
        let poorest = (0..n)
            .filter(|&i| instance.value(i, j) > 0)
            .min_by_key(|&i| (u[i], i));
        if let Some(i) = poorest {
            alloc.transfer(j, i);
            u[i] += 1;
        }
    }
    while let Some(path) = improving_path(instance, &alloc, &u) {
        for &(_, to, good) in &path {
            alloc.transfer(good, to);
        }
        let (s, t) = (path[0].0, path[path.len() - 1].1);
        u[s] -= 1;
        u[t] += 1;
    }
    Ok(alloc)
}

/// Transfers `(from, to, good)` along a shortest path from the richest
/// possible source to a target at least two units poorer.
fn improving_path(instance: &Instance, alloc: &Allocation, u: &[u64]) -> Option<Vec<(usize, usize, usize)>> {
    let n = instance.n_agents();
    let mut sources: Vec<usize> = (0..n).collect();
    sources.sort_by_key(|&i| (std::cmp::Reverse(u[i]), i));
    for s in sources {
        if u[s] < 2 {
            break;
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for &g in alloc.bundle(i) {
                if instance.value(i, g) == 0 {
                    continue;
                }
                for k in 0..n {
                    if dist[k] == usize::MAX && instance.value(k, g) > 0 {
                        dist[k] = dist[i] + 1;
                        parent[k] = Some((i, g));
                        queue.push_back(k);
                    }
                }
            }
        }
        let target = (0..n)
            .filter(|&t| dist[t] != usize::MAX && t != s && u[t] + 2 <= u[s])
            .min_by_key(|&t| (dist[t], t));
        if let Some(t) = target {
            let mut path = Vec::new();
            let mut k = t;
            while let Some((i, g)) = parent[k] {
                path.push((i, k, g));
                k = i;
            }
            path.reverse();
            return Some(path);
        }
    }
    None
}

/// An EQ1 + EF1 + PO allocation if one exists.
///
/// Every Nash-optimal allocation is EF1 and PO, and if any EQ1 + EF1 + PO
/// allocation exists then every Nash-optimal one is EQ1.
pub fn decide_eq1_ef1_po_binary(instance: &Instance) -> Result<Option<Allocation>> {
    let alloc = nash_optimal_binary(instance)?;
    let eq1 = check_property(instance, &alloc, &Property::Eq1)?.holds;
    Ok(eq1.then_some(alloc))
}

/// Sorted utilities of the Nash-optimal allocation.
pub fn nash_profile_binary(instance: &Instance) -> Result<Vec<u64>> {
    let alloc = nash_optimal_binary(instance)?;
    let mut u = utilities(instance, &alloc);
    u.sort_unstable();
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{nash_key, utility_profile};
    use crate::instio::fixture;

    #[test]
    fn all_approved_splits_evenly() {
        let inst = Instance::new(vec![vec![1; 4], vec![1; 4]]).unwrap();
        let a = eq_po_binary(&inst).unwrap().unwrap();
        assert_eq!(utilities(&inst, &a), vec![2, 2]);
        assert!(check_property(&inst, &a, &Property::Ef).unwrap().holds);
        assert_eq!(utility_profile(&inst, &nash_optimal_binary(&inst).unwrap()), vec![2, 2]);
        assert!(decide_eq1_ef1_po_binary(&inst).unwrap().is_some());
    }

    #[test]
    fn example1_decisions() {
        let inst = fixture("example1").unwrap().instance;
        assert_eq!(eq_po_binary(&inst).unwrap(), None);
        let a = nash_optimal_binary(&inst).unwrap();
        assert_eq!(utility_profile(&inst, &a), vec![1, 2, 3]);
        assert_eq!(nash_key(&inst, &a).product, 6u32.into());
        assert_eq!(decide_eq1_ef1_po_binary(&inst).unwrap(), None);
    }

    #[test]
    fn unapproved_goods_are_parked() {
        let inst = Instance::new(vec![vec![1, 0, 1], vec![1, 0, 1]]).unwrap();
        let a = eq_po_binary(&inst).unwrap().unwrap();
        assert_eq!(a.owner(1), 0);
        assert_eq!(utilities(&inst, &a), vec![1, 1]);
        let nash = nash_optimal_binary(&inst).unwrap();
        assert_eq!(utility_profile(&inst, &nash), vec![1, 1]);
    }

    #[test]
    fn nobody_approves_anything() {
        let inst = Instance::new(vec![vec![0, 0], vec![0, 0]]).unwrap();
        let a = eq_po_binary(&inst).unwrap().unwrap();
        assert_eq!(a.owners(), &[0, 0]);
    }

    #[test]
    fn rejects_non_binary() {
        let inst = Instance::new(vec![vec![2, 0]]).unwrap();
        assert!(matches!(eq_po_binary(&inst), Err(Error::NotBinary)));
        assert!(matches!(nash_optimal_binary(&inst), Err(Error::NotBinary)));
    }

    #[test]
    fn exchange_path_balances() {
        let inst = Instance::new(vec![vec![1, 1, 1, 0], vec![0, 0, 0, 1], vec![1, 1, 1, 1]]).unwrap();
        let a = nash_optimal_binary(&inst).unwrap();
        let key = nash_key(&inst, &a);
        let best = crate::oracle::mnw_bf(&inst).unwrap();
        assert_eq!(key, nash_key(&inst, &best));
    }
}
