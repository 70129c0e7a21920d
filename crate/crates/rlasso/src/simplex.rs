//! Dense two-phase simplex for the small linear programs the recovery
//! oracle enumerates. Maximizes c^T x over { A x (<= or =) b, x >= 0 }
//! with Bland's anti-cycling rule.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintOp {
    Le,
    Eq,
}

/// maximize objective . x  subject to  rows[i] . x (ops[i]) rhs[i],  x >= 0.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub ops: Vec<ConstraintOp>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = tab[r][c];
    for x in tab[r].iter_mut() {
        *x /= p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
        }
    }
    basis[r] = c;
}

/// Runs simplex iterations on a canonical tableau whose last row is the
/// reduced-cost row and last column the right-hand side. Only columns below
/// `enter_limit` may enter the basis. Returns Err(Unbounded) or
/// Err(CycleLimit) as appropriate.
fn run(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    enter_limit: usize,
    max_pivots: usize,
) -> Result<()> {
    let m = tab.len() - 1;
    let rhs_col = tab[0].len() - 1;
    for _ in 0..max_pivots {
        // Bland: the lowest-index column with positive reduced cost enters.
        let Some(entering) = (0..enter_limit).find(|&j| tab[m][j] > TOL) else {
            return Ok(());
        };
        // Ratio test in two passes: the exact minimum first, then Bland's
        // tie-break (lowest basic variable index among the minimizers). A
        // one-pass tolerance-band comparison is not transitive and can cycle
        // on degenerate tableaus.
        let mut min_ratio = f64::INFINITY;
        for r in 0..m {
            if tab[r][entering] > TOL {
                min_ratio = min_ratio.min(tab[r][rhs_col] / tab[r][entering]);
            }
        }
        if !min_ratio.is_finite() {
            return Err(Error::Unbounded);
        }
        let r = (0..m)
            .filter(|&r| {
                tab[r][entering] > TOL
                    && tab[r][rhs_col] / tab[r][entering] <= min_ratio + TOL
            })
            .min_by_key(|&r| basis[r])
            .expect("a minimizing row exists");
        pivot(tab, basis, r, entering);
    }
    Err(Error::CycleLimit(max_pivots))
}

/// Installs the reduced-cost row for `costs` (zero-padded) given the basis.
fn canonicalize_objective(tab: &mut [Vec<f64>], basis: &[usize], costs: &[f64]) {
    let m = tab.len() - 1;
    let width = tab[0].len();
    for j in 0..width {
        tab[m][j] = costs.get(j).copied().unwrap_or(0.0);
    }
    tab[m][width - 1] = 0.0;
    for r in 0..m {
        let c = costs.get(basis[r]).copied().unwrap_or(0.0);
        if c != 0.0 {
            let row = tab[r].clone();
            for (x, v) in tab[m].iter_mut().zip(&row) {
                *x -= c * v;
            }
        }
    }
}

pub fn solve(lp: &LinearProgram, max_pivots: usize) -> Result<LpSolution> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    if lp.ops.len() != m || lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("inconsistent program shape".into()));
    }

    let n_slack = lp.ops.iter().filter(|o| **o == ConstraintOp::Le).count();
    let n_real = n + n_slack;
    let width = n_real + m + 1; // worst case: one artificial per row, plus rhs
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut basis = Vec::with_capacity(m);
    let mut n_art = 0usize;
    let mut slack_idx = n;
    for i in 0..m {
        let mut row = vec![0.0; width];
        row[..n].copy_from_slice(&lp.rows[i]);
        let mut slack_col = None;
        if lp.ops[i] == ConstraintOp::Le {
            row[slack_idx] = 1.0;
            slack_col = Some(slack_idx);
            slack_idx += 1;
        }
        let mut b = lp.rhs[i];
        if b < 0.0 {
            for x in row.iter_mut() {
                *x = -*x;
            }
            b = -b;
            slack_col = None; // slack coefficient is now -1, unusable as basis
        }
        *row.last_mut().unwrap() = b;
        match slack_col {
            Some(j) => basis.push(j),
            None => {
                let j = n_real + n_art;
                row[j] = 1.0;
                basis.push(j);
                n_art += 1;
            }
        }
        tab.push(row);
    }
    tab.push(vec![0.0; width]);

    if n_art > 0 {
        // Phase one: maximize minus the sum of artificials.
        let mut costs = vec![0.0; n_real + n_art];
        for c in costs.iter_mut().skip(n_real) {
            *c = -1.0;
        }
        canonicalize_objective(&mut tab, &basis, &costs);
        run(&mut tab, &mut basis, n_real, max_pivots)?;
        let width_now = tab[0].len();
        let phase1 = -tab[m][width_now - 1];
        if phase1 < -1e-7 {
            return Err(Error::Infeasible(format!(
                "phase-one optimum {phase1:.3e} below zero"
            )));
        }
        // Pivot lingering zero-level artificials out of the basis; rows with
        // no eligible column are redundant and dropped.
        let mut r = 0;
        while r + 1 < tab.len() {
            if basis[r] >= n_real {
                if let Some(c) = (0..n_real).find(|&j| tab[r][j].abs() > TOL) {
                    pivot(&mut tab, &mut basis, r, c);
                } else {
                    tab.remove(r);
                    basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
    }

    canonicalize_objective(&mut tab, &basis, &lp.objective);
    run(&mut tab, &mut basis, n_real, max_pivots)?;

    let rows_left = tab.len() - 1;
    let rhs_col = tab[0].len() - 1;
    let mut x = vec![0.0; n];
    for r in 0..rows_left {
        if basis[r] < n {
            x[basis[r]] = tab[r][rhs_col];
        }
    }
    Ok(LpSolution {
        objective: -tab[rows_left][rhs_col],
        x,
    })
}
