//! Dense two-phase primal simplex with Bland's rule.

use crate::error::{Error, Result};

pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

/// Minimize `objective . x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![0.0; n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pr = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f.abs() > 0.0 {
                for (v, pv) in row.iter_mut().zip(&pr) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        let m = self.rows.len();
        let rhs = self.width - 1;
        for _ in 0..100_000 {
            // Reduced costs: c_j - c_B B^-1 A_j.
            let mut enter = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..m {
                    rc -= cost[self.basis[i]] * self.rows[i][j];
                }
                if rc < -TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.rows[i][c];
                if a > TOL {
                    let ratio = self.rows[i][rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - TOL || (ratio <= lr + TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c);
        }
        Err(Error::Solver("iteration limit".into()))
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.n_vars;
    let m = lp.constraints.len();
    let n_slack = lp
        .constraints
        .iter()
        .filter(|c| c.rel != Relation::Eq)
        .count();
    let n_art = m;
    let width = n + n_slack + n_art + 1;
    let mut rows = vec![vec![0.0; width]; m];
    let mut basis = vec![0; m];
    let mut slack = n;
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            rows[i][j] += a;
        }
        match c.rel {
            Relation::Le => {
                rows[i][slack] = 1.0;
                slack += 1;
            }
            Relation::Ge => {
                rows[i][slack] = -1.0;
                slack += 1;
            }
            Relation::Eq => {}
        }
        rows[i][width - 1] = c.rhs;
        if c.rhs < 0.0 {
            for v in rows[i].iter_mut() {
                *v = -*v;
            }
        }
        rows[i][n + n_slack + i] = 1.0;
        basis[i] = n + n_slack + i;
    }
    let mut t = Tableau { rows, basis, width };

    let mut phase1 = vec![0.0; width - 1];
    for v in phase1.iter_mut().skip(n + n_slack) {
        *v = 1.0;
    }
    t.optimize(&phase1, width - 1)?;
    let infeas: f64 = (0..m)
        .filter(|&i| t.basis[i] >= n + n_slack)
        .map(|i| t.rows[i][width - 1])
        .sum();
    if infeas > 1e-7 {
        return Err(Error::Solver("infeasible".into()));
    }
    // Drive remaining artificials out of the basis.
    for i in 0..m {
        if t.basis[i] >= n + n_slack {
            if let Some(j) = (0..n + n_slack).find(|&j| t.rows[i][j].abs() > TOL) {
                t.pivot(i, j);
            }
        }
    }

    let mut cost = vec![0.0; width - 1];
    cost[..n].copy_from_slice(&lp.objective);
    if !t.optimize(&cost, n + n_slack)? {
        return Err(Error::Solver("unbounded".into()));
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rows[i][width - 1];
        }
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_over_two_arcs() {
        // min U : a + b = 1, a <= U, b <= U.
        let mut lp = LinearProgram::new(3);
        lp.objective[2] = 1.0;
        lp.add(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add(vec![(0, 1.0), (2, -1.0)], Relation::Le, 0.0);
        lp.add(vec![(1, 1.0), (2, -1.0)], Relation::Le, 0.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-9);
        assert!((s.x[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_arc_forced() {
        let mut lp = LinearProgram::new(2);
        lp.objective[1] = 1.0;
        lp.add(vec![(0, 1.0)], Relation::Eq, 1.0);
        lp.add(vec![(0, 1.0), (1, -1.0)], Relation::Le, 0.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y : x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-3.0, -5.0];
        lp.add(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.add(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.add(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn ge_rows_and_infeasibility() {
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = 1.0;
        lp.add(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert!((solve(&lp).unwrap().x[0] - 2.0).abs() < 1e-9);
        lp.add(vec![(0, 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve(&lp), Err(Error::Solver(_))));
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = -1.0;
        lp.add(vec![(0, 1.0)], Relation::Ge, 0.0);
        assert!(matches!(solve(&lp), Err(Error::Solver(_))));
    }
}
