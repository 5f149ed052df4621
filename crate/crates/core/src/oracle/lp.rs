//! Dense two-phase simplex over exact rationals.
//!
//! Bland's rule is used for both the entering and the leaving variable, so
//! the method cannot cycle. Problem sizes here are tiny (a few dozen
//! variables), which keeps a dense tableau practical.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective·x` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![Rational::zero(); n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.n_vars, "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n_cols: usize,
    first_artificial: usize,
}

enum Simplex {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.n_vars;
        let n_slack = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        // After sign normalisation, `≤` rows get a basic slack; everything else needs an artificial.
        let normalised: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -c.rhs.clone())
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let n_art = normalised.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_artificial = n + n_slack;
        let n_cols = first_artificial + n_art;
        let mut rows = Vec::with_capacity(normalised.len());
        let mut basis = Vec::with_capacity(normalised.len());
        let (mut slack, mut art) = (n, first_artificial);
        for (coeffs, relation, rhs) in normalised {
            let mut row = vec![Rational::zero(); n_cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[n_cols] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            n_cols,
            first_artificial,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    fn optimise(&mut self, cost: &[Rational], allowed: usize) -> Simplex {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        d -= &cost[b] * &row[j];
                    }
                }
                d.is_positive()
            });
            let Some(j) = entering else {
                return Simplex::Optimal;
            };
            let rhs = self.n_cols;
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[j];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, j),
                None => return Simplex::Unbounded,
            }
        }
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.rows
            .iter()
            .zip(&self.basis)
            .map(|(row, &b)| &cost[b] * &row[self.n_cols])
            .sum()
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        if self.first_artificial < self.n_cols {
            let mut phase1 = vec![Rational::zero(); self.n_cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = -Rational::one();
            }
            self.optimise(&phase1, self.n_cols);
            if self.objective_value(&phase1).is_negative() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis, dropping redundant rows.
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                        Some(j) => self.pivot(r, j),
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut cost = vec![Rational::zero(); self.n_cols];
        cost[..lp.n_vars].clone_from_slice(&lp.objective);
        match self.optimise(&cost, self.first_artificial) {
            Simplex::Unbounded => LpOutcome::Unbounded,
            Simplex::Optimal => {
                let mut point = vec![Rational::zero(); lp.n_vars];
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if b < lp.n_vars {
                        point[b] = row[self.n_cols].clone();
                    }
                }
                LpOutcome::Optimal {
                    value: self.objective_value(&cost),
                    point,
                }
            }
        }
    }
}
