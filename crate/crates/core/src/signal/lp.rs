//! Dense two-phase simplex for small linear programs.
//!
//! Solves `max cᵀx` subject to `A_ub x ≤ b_ub`, `A_eq x = b_eq`, `x ≥ 0`.
//! Pivoting follows Bland's rule, so the method cannot cycle.

use thiserror::Error;

const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    // rows × (cols + 1); last column is the right-hand side
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `obj·x` over the current basis, restricted to columns
    /// for which `allowed` is true.
    fn optimize(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<(), LpError> {
        let limit = 50_000;
        for _ in 0..limit {
            // reduced costs: obj_j − Σ_i obj_{basis_i}·a_ij
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = obj[j];
                for (i, row) in self.rows.iter().enumerate() {
                    rc -= obj[self.basis[i]] * row[j];
                }
                if rc > TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > TOL {
                    let ratio = row[self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => ratio < lr - TOL || (ratio <= lr + TOL && self.basis[i] < self.basis[li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return Err(LpError::Unbounded) };
            self.pivot(r, c);
        }
        Err(LpError::IterationLimit(limit))
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.c.len();
        if self.a_ub.len() != self.b_ub.len() || self.a_eq.len() != self.b_eq.len() {
            return Err(LpError::Malformed("row and right-hand-side counts differ".into()));
        }
        if self.a_ub.iter().chain(&self.a_eq).any(|r| r.len() != n) {
            return Err(LpError::Malformed(format!("every row needs {n} coefficients")));
        }

        // Columns: originals, one slack/surplus per inequality, one
        // artificial per row that lacks a ready basic column.
        let m_ub = self.a_ub.len();
        let m = m_ub + self.a_eq.len();
        let mut needs_art = Vec::with_capacity(m);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (a, &b) in self.a_ub.iter().zip(&self.b_ub) {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            rows.push(a.iter().map(|v| sign * v).collect::<Vec<_>>());
            rhs.push(sign * b);
            needs_art.push(b < 0.0);
        }
        for (a, &b) in self.a_eq.iter().zip(&self.b_eq) {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            rows.push(a.iter().map(|v| sign * v).collect());
            rhs.push(sign * b);
            needs_art.push(true);
        }
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let cols = n + m_ub + n_art;
        let mut tab = Tableau { rows: vec![vec![0.0; cols + 1]; m], basis: vec![0; m], cols };
        let mut art = n + m_ub;
        for i in 0..m {
            tab.rows[i][..n].copy_from_slice(&rows[i]);
            tab.rows[i][cols] = rhs[i];
            if i < m_ub {
                // slack (+1) or, for a flipped row, surplus (−1)
                tab.rows[i][n + i] = if needs_art[i] { -1.0 } else { 1.0 };
                tab.basis[i] = n + i;
            }
            if needs_art[i] {
                tab.rows[i][art] = 1.0;
                tab.basis[i] = art;
                art += 1;
            }
        }

        let first_art = n + m_ub;
        if n_art > 0 {
            let phase1: Vec<f64> = (0..cols).map(|j| if j >= first_art { -1.0 } else { 0.0 }).collect();
            tab.optimize(&phase1, &|_| true)?;
            let infeas: f64 =
                tab.basis.iter().zip(&tab.rows).filter(|(&b, _)| b >= first_art).map(|(_, r)| r[cols]).sum();
            if infeas > 1e-7 {
                return Err(LpError::Infeasible);
            }
            // drive remaining artificials out of the basis, dropping redundant rows
            let mut i = 0;
            while i < tab.rows.len() {
                if tab.basis[i] >= first_art {
                    match (0..first_art).find(|&j| tab.rows[i][j].abs() > TOL) {
                        Some(j) => {
                            tab.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            tab.rows.remove(i);
                            tab.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        let mut obj = vec![0.0; cols];
        obj[..n].copy_from_slice(&self.c);
        tab.optimize(&obj, &|j| j < first_art)?;

        let mut x = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rows[i][cols].max(0.0);
            }
        }
        let objective = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective })
    }
}
