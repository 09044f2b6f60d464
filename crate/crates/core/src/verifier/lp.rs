//! Dense two-phase simplex over exact rationals, Bland's rule throughout.
//! Variables are non-negative; the objective is maximized.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Scalar>,
    pub relation: Relation,
    pub rhs: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Scalar, x: Vec<Scalar> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub objective: Vec<Scalar>,
    pub constraints: Vec<Constraint>,
}

impl Lp {
    pub fn new(objective: Vec<Scalar>) -> Lp {
        Lp { objective, constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<Scalar>, relation: Relation, rhs: Scalar) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    /// Each row holds the column coefficients followed by the right-hand side.
    rows: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    /// Reduced costs followed by minus the objective value.
    obj: Vec<Scalar>,
    vars: usize,
    /// Columns at or past this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let vars = lp.objective.len();
        let mut normalized: Vec<(Vec<Scalar>, Relation, Scalar)> = Vec::with_capacity(lp.constraints.len());
        for c in &lp.constraints {
            if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                normalized.push((c.coeffs.iter().map(|x| -x).collect(), flipped, -&c.rhs));
            } else {
                normalized.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
            }
        }
        let slacks = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let artificials = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_artificial = vars + slacks;
        let cols = first_artificial + artificials;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut s, mut a) = (vars, first_artificial);
        for (coeffs, rel, rhs) in normalized {
            let mut row = coeffs;
            row.resize(cols + 1, Scalar::zero());
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = Scalar::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -Scalar::one();
                    s += 1;
                    row[a] = Scalar::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Scalar::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, obj: vec![Scalar::zero(); cols + 1], vars, first_artificial }
    }

    fn cols(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Scalar::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Scalar>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Returns `false` if the objective is unbounded.
    fn optimize(&mut self, entering_limit: usize) -> bool {
        loop {
            let Some(c) = (0..entering_limit).find(|&j| self.obj[j].is_positive()) else { return true };
            let rhs = self.cols();
            let mut best: Option<(usize, Scalar)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }

    fn solve(mut self, objective: &[Scalar]) -> LpResult {
        let cols = self.cols();
        if self.first_artificial < cols {
            for j in self.first_artificial..cols {
                self.obj[j] = -Scalar::one();
            }
            for i in 0..self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    for j in 0..=cols {
                        let add = self.rows[i][j].clone();
                        self.obj[j] += add;
                    }
                }
            }
            self.optimize(cols);
            if !self.obj[cols].is_zero() {
                return LpResult::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        self.obj = vec![Scalar::zero(); cols + 1];
        self.obj[..self.vars].clone_from_slice(objective);
        for i in 0..self.rows.len() {
            let cb = if self.basis[i] < self.vars { objective[self.basis[i]].clone() } else { Scalar::zero() };
            if !cb.is_zero() {
                for j in 0..=cols {
                    let sub = &cb * &self.rows[i][j];
                    self.obj[j] -= sub;
                }
            }
        }
        if !self.optimize(self.first_artificial) {
            return LpResult::Unbounded;
        }
        let mut x = vec![Scalar::zero(); self.vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.vars {
                x[b] = self.rows[i][cols].clone();
            }
        }
        LpResult::Optimal { value: -&self.obj[cols], x }
    }
}
