use num_traits::{One, Zero};

use crate::error::Result;
use crate::model::{Allocation, FractionalAllocation, Instance};
use crate::oracle::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{from_int, Rational};

pub(crate) fn integer_values(instance: &Instance) -> Vec<Vec<Rational>> {
    instance
        .valuations()
        .iter()
        .map(|row| row.iter().map(|&v| from_int(v)).collect())
        .collect()
}

/// True iff no fractional allocation weakly improves every agent and
/// strictly improves one.
pub fn is_fpo_lp(instance: &Instance, allocation: &Allocation) -> Result<bool> {
    allocation.validate_for(instance)?;
    Ok(fractional_dominator(&integer_values(instance), allocation).is_none())
}

/// fPO test for arbitrary non-negative rational valuations (e.g. rounded instances).
pub fn is_fpo_values(values: &[Vec<Rational>], allocation: &Allocation) -> bool {
    fractional_dominator(values, allocation).is_none()
}

/// Maximises total utility subject to every agent keeping at least its
/// current utility. Returns a dominating fractional allocation when the
/// optimum exceeds the current total.
pub fn fractional_dominator(values: &[Vec<Rational>], allocation: &Allocation) -> Option<FractionalAllocation> {
    let n = values.len();
    let m = allocation.n_goods();
    // Only pairs with positive value matter: giving a good to an agent that
    // values it at zero never helps anyone.
    let vars: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| values[i][j] > Rational::zero())
        .collect();
    let current: Vec<Rational> = (0..n)
        .map(|i| allocation.bundle(i).iter().map(|&j| values[i][j].clone()).sum())
        .collect();
    let total: Rational = current.iter().sum();
    let mut lp = LinearProgram::new(vars.len());
    lp.objective = vars.iter().map(|&(i, j)| values[i][j].clone()).collect();
    for j in 0..m {
        let coeffs = vars
            .iter()
            .map(|&(_, g)| if g == j { Rational::one() } else { Rational::zero() })
            .collect();
        lp.add(coeffs, Relation::Le, Rational::one());
    }
    for (i, u) in current.iter().enumerate() {
        if u.is_zero() {
            continue;
        }
        let coeffs = vars
            .iter()
            .map(|&(a, g)| if a == i { values[a][g].clone() } else { Rational::zero() })
            .collect();
        lp.add(coeffs, Relation::Ge, u.clone());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, point } if value > total => {
            let mut shares = vec![vec![Rational::zero(); m]; n];
            for (&(i, j), x) in vars.iter().zip(point) {
                shares[i][j] = x;
            }
            Some(FractionalAllocation::new(shares).expect("LP solution respects column sums"))
        }
        LpOutcome::Optimal { .. } => None,
        other => unreachable!("fPO program is feasible and bounded, got {other:?}"),
    }
}

/// Optimal value and a witness of the fractional max-min problem.
pub fn fractional_maximin(instance: &Instance) -> (Rational, FractionalAllocation) {
    let n = instance.n_agents();
    let m = instance.n_goods();
    let values = integer_values(instance);
    // Variables: x_ij row-major, then z.
    let z = n * m;
    let mut lp = LinearProgram::new(z + 1);
    lp.objective[z] = Rational::one();
    for j in 0..m {
        let mut coeffs = vec![Rational::zero(); z + 1];
        for i in 0..n {
            coeffs[i * m + j] = Rational::one();
        }
        lp.add(coeffs, Relation::Le, Rational::one());
    }
    for i in 0..n {
        let mut coeffs = vec![Rational::zero(); z + 1];
        coeffs[i * m..(i + 1) * m].clone_from_slice(&values[i]);
        coeffs[z] = -Rational::one();
        lp.add(coeffs, Relation::Ge, Rational::zero());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, point } => {
            let shares = (0..n).map(|i| point[i * m..(i + 1) * m].to_vec()).collect();
            (value, FractionalAllocation::new(shares).expect("column sums bounded"))
        }
        other => unreachable!("max-min program is feasible and bounded, got {other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_owner_is_fpo() {
        let inst = Instance::new(vec![vec![3, 4, 5]]).unwrap();
        let alloc = Allocation::from_owners(1, vec![0, 0, 0]).unwrap();
        assert!(is_fpo_lp(&inst, &alloc).unwrap());
    }

    #[test]
    fn eqx_allocation_is_fractionally_dominated() {
        let inst = Instance::new(vec![vec![2, 1024, 1], vec![1, 1024, 2]]).unwrap();
        let alloc = Allocation::new(3, vec![vec![1], vec![0, 2]]).unwrap();
        let x = fractional_dominator(&integer_values(&inst), &alloc).expect("dominated");
        let u = x.utilities(&integer_values(&inst));
        assert!(u[0] >= from_int(1024) && u[1] >= from_int(3));
        assert!(u[0] > from_int(1024) || u[1] > from_int(3));
    }

    #[test]
    fn wasteful_allocation_is_not_fpo() {
        let inst = Instance::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let alloc = Allocation::from_owners(2, vec![1, 0]).unwrap();
        assert!(!is_fpo_lp(&inst, &alloc).unwrap());
    }

    #[test]
    fn fractional_maximin_splits_contested_good() {
        let inst = Instance::new(vec![vec![3, 3, 10], vec![2, 2, 12], vec![2, 2, 12]]).unwrap();
        let (value, x) = fractional_maximin(&inst);
        assert_eq!(value, from_int(6));
        let u = x.utilities(&integer_values(&inst));
        assert!(u.iter().all(|ui| *ui >= from_int(6)));
    }
}
