use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::model::{search_space_size, Allocation, Instance};

pub const DEFAULT_CAP: u64 = 10_000_000;

pub(crate) fn check_cap(n: usize, m: usize, cap: u64) -> Result<u128> {
    let size = search_space_size(n, m);
    if size > cap as u128 {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(size)
}

/// Every assignment of `m` goods to `n` agents, as owner vectors in
/// lexicographic order (the last good changes fastest).
#[derive(Debug, Clone)]
pub struct Allocations {
    n: usize,
    owners: Vec<usize>,
    done: bool,
}

impl Iterator for Allocations {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.done {
            return None;
        }
        let current = Allocation::from_owners_unchecked(self.n, self.owners.clone());
        self.done = !advance(&mut self.owners, self.n);
        Some(current)
    }
}

fn advance(owners: &mut [usize], n: usize) -> bool {
    for g in (0..owners.len()).rev() {
        owners[g] += 1;
        if owners[g] < n {
            return true;
        }
        owners[g] = 0;
    }
    false
}

pub fn enumerate_allocations(n: usize, m: usize) -> Result<Allocations> {
    enumerate_allocations_capped(n, m, DEFAULT_CAP)
}

pub fn enumerate_allocations_capped(n: usize, m: usize, cap: u64) -> Result<Allocations> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInstance("need at least one agent and one good".into()));
    }
    check_cap(n, m, cap)?;
    Ok(Allocations {
        n,
        owners: vec![0; m],
        done: false,
    })
}

/// Walks all allocations of `instance` in enumeration order, maintaining the
/// utility vector incrementally. The visitor sees `(owners, utilities)`.
pub(crate) fn walk<B>(
    instance: &Instance,
    cap: u64,
    mut visit: impl FnMut(&[usize], &[u64]) -> ControlFlow<B>,
) -> Result<Option<B>> {
    let n = instance.n_agents();
    let m = instance.n_goods();
    check_cap(n, m, cap)?;
    let mut owners = vec![0usize; m];
    let mut utils = vec![0u64; n];
    utils[0] = instance.row(0).iter().sum();
    loop {
        if let ControlFlow::Break(b) = visit(&owners, &utils) {
            return Ok(Some(b));
        }
        let mut g = m;
        loop {
            if g == 0 {
                return Ok(None);
            }
            g -= 1;
            let from = owners[g];
            let to = if from + 1 == n { 0 } else { from + 1 };
            utils[from] -= instance.value(from, g);
            utils[to] += instance.value(to, g);
            owners[g] = to;
            if to != 0 {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(enumerate_allocations(2, 1).unwrap().count(), 2);
        assert_eq!(enumerate_allocations(3, 6).unwrap().count(), 729);
        assert_eq!(enumerate_allocations(3, 7).unwrap().count(), 2187);
    }

    #[test]
    fn lexicographic_order() {
        let owners: Vec<Vec<usize>> = enumerate_allocations(2, 2)
            .unwrap()
            .map(|a| a.owners().to_vec())
            .collect();
        assert_eq!(owners, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_allocations_capped(3, 7, 2186),
            Err(Error::CapExceeded { size: 2187, cap: 2186 })
        ));
        assert!(enumerate_allocations(10, 10).is_err());
    }

    #[test]
    fn walk_tracks_utilities() {
        let inst = Instance::new(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).unwrap();
        let mut seen = 0;
        let allocs: Vec<Allocation> = enumerate_allocations(3, 3).unwrap().collect();
        walk::<()>(&inst, DEFAULT_CAP, |owners, utils| {
            let a = &allocs[seen];
            assert_eq!(owners, a.owners());
            for (i, &u) in utils.iter().enumerate() {
                assert_eq!(u, inst.bundle_value(i, a.bundle(i)));
            }
            seen += 1;
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(seen, 27);
    }
}
