//! Brute-force certification at desk scale: the l1 NSP shape constant tau10
//! by LP enumeration, and exhaustive exact-recovery checks locating the same
//! threshold empirically.

use crate::error::{Error, Result};
use crate::matrix::{lq_norm, DenseMatrix, DenseVector, NormExponent, SupportSet};
use crate::rng::{RngSeed, SplitMix64};
use crate::simplex::{self, ConstraintOp, LinearProgram};
use crate::solver::{solve_rlasso_from, SolveStatus, SolverConfig};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

const MAX_N: usize = 12;
const MAX_S: usize = 3;
const MAX_PIVOTS: usize = 200_000;

/// The l1 NSP shape constant of a matrix together with the maximizing
/// support, sign pattern and direction.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeResult {
    pub tau10: f64,
    pub witness_support: SupportSet,
    pub witness_sign: Vec<i8>,
    pub witness_v: DenseVector,
}

fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(s);
    fn rec(start: usize, n: usize, s: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == s {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, s, current, out);
            current.pop();
        }
    }
    rec(0, n, s, &mut current, &mut out);
    out
}

/// Builds the per-orthant LP: with u_i = s_i v_i >= 0, maximize
/// sum_{i in T} u_i - sum_{i notin T} u_i over ||A diag(s) u||_1 <= bound,
/// linearized with one auxiliary t_m per row of A.
fn orthant_lp(a: &DenseMatrix, support: &[usize], signs: &[f64], bound: f64) -> LinearProgram {
    let m = a.rows();
    let n = a.cols();
    let vars = n + m;
    let mut objective = vec![-1.0; n];
    for &i in support {
        objective[i] = 1.0;
    }
    objective.extend(std::iter::repeat(0.0).take(m));

    let mut rows = Vec::with_capacity(2 * m + 1);
    let mut ops = Vec::new();
    let mut rhs = Vec::new();
    for row_idx in 0..m {
        // +(A diag(s) u)_row - t_row <= 0 and -(A diag(s) u)_row - t_row <= 0.
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; vars];
            for j in 0..n {
                row[j] = sign * a.get(row_idx, j) * signs[j];
            }
            row[n + row_idx] = -1.0;
            rows.push(row);
            ops.push(ConstraintOp::Le);
            rhs.push(0.0);
        }
    }
    let mut sum_t = vec![0.0; vars];
    for t in sum_t.iter_mut().skip(n) {
        *t = 1.0;
    }
    rows.push(sum_t);
    ops.push(ConstraintOp::Le);
    rhs.push(bound);
    LinearProgram {
        objective,
        rows,
        ops,
        rhs,
    }
}

/// The kernel-restricted LP: maximize the same objective over
/// A diag(s) u = 0, sum u = 1, u >= 0. A nonnegative optimum exhibits a
/// kernel direction defeating the strict inequality; infeasibility means the
/// kernel meets this orthant only at the origin.
fn kernel_orthant_lp(a: &DenseMatrix, support: &[usize], signs: &[f64]) -> LinearProgram {
    let m = a.rows();
    let n = a.cols();
    let mut objective = vec![-1.0; n];
    for &i in support {
        objective[i] = 1.0;
    }
    let mut rows = Vec::with_capacity(m + 1);
    for row_idx in 0..m {
        rows.push((0..n).map(|j| a.get(row_idx, j) * signs[j]).collect());
    }
    rows.push(vec![1.0; n]);
    let mut rhs = vec![0.0; m];
    rhs.push(1.0);
    LinearProgram {
        objective,
        rows,
        ops: vec![ConstraintOp::Eq; m + 1],
        rhs,
    }
}

struct OrthantOutcome {
    value: f64,
    v: Vec<f64>,
    violation: Option<Vec<f64>>,
}

fn solve_orthant(a: &DenseMatrix, support: &[usize], signs: &[f64]) -> Result<OrthantOutcome> {
    let n = a.cols();
    // Kernel-restricted LP first: a nonnegative optimum on the kernel slice
    // means some kernel vector defeats the strict NSP inequality.
    let violation = match simplex::solve(&kernel_orthant_lp(a, support, signs), MAX_PIVOTS) {
        Ok(sol) if sol.objective >= -1e-7 => {
            Some((0..n).map(|i| signs[i] * sol.x[i]).collect())
        }
        Ok(_) => None,
        Err(Error::Infeasible(_)) => None, // trivial kernel slice in this orthant
        Err(e) => return Err(e),
    };
    let sol = simplex::solve(&orthant_lp(a, support, signs, 1.0), MAX_PIVOTS)?;
    Ok(OrthantOutcome {
        value: sol.objective,
        v: (0..n).map(|i| signs[i] * sol.x[i]).collect(),
        violation,
    })
}

/// Exact l1 NSP shape constant by enumerating all (support, sign) orthants
/// and solving one LP per orthant. Errors with `NspViolation` if the matrix
/// fails the strict l1 null space property of order `s`.
pub fn nsp_shape_constant_l1(a: &DenseMatrix, s: usize) -> Result<ShapeResult> {
    let n = a.cols();
    if n > MAX_N || s > MAX_S {
        return Err(Error::BudgetExceeded(format!(
            "N = {n}, S = {s} exceeds the enumeration budget N <= {MAX_N}, S <= {MAX_S}"
        )));
    }
    if s == 0 || s > n {
        return Err(Error::Domain(format!("order {s} out of range [1, {n}]")));
    }
    let supports = combinations(n, s);
    // Each support sweeps all 2^N sign orthants in binary order; the results
    // are reduced afterwards in that same canonical order.
    let per_support: Vec<Result<Vec<OrthantOutcome>>> = supports
        .par_iter()
        .map(|support| {
            (0..1u64 << n)
                .map(|mask| {
                    let signs: Vec<f64> = (0..n)
                        .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                        .collect();
                    solve_orthant(a, support, &signs)
                })
                .collect()
        })
        .collect();

    let mut best: Option<(f64, usize, u64, Vec<f64>)> = None;
    for (t_idx, outcomes) in per_support.iter().enumerate() {
        let outcomes = match outcomes {
            Ok(o) => o,
            Err(e) => return Err(e.clone()),
        };
        for (mask, out) in outcomes.iter().enumerate() {
            if let Some(w) = &out.violation {
                return Err(Error::NspViolation {
                    order: s,
                    witness: w.clone(),
                });
            }
            if best.as_ref().map(|(v, ..)| out.value > *v).unwrap_or(true) {
                best = Some((out.value, t_idx, mask as u64, out.v.clone()));
            }
        }
    }
    let (tau10, t_idx, mask, v) = best.expect("at least one orthant");
    let witness_support =
        SupportSet::new(supports[t_idx].iter().map(|i| i + 1).collect(), n)?;
    let witness_sign = (0..n)
        .map(|i| if mask >> i & 1 == 1 { -1i8 } else { 1i8 })
        .collect();
    Ok(ShapeResult {
        tau10,
        witness_support,
        witness_sign,
        witness_v: DenseVector::new(v)?,
    })
}

/// Outcome of `exhaustive_recovery_check`.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryCheck {
    pub success: bool,
    pub witness: Option<DenseVector>,
    pub trials_run: usize,
}

fn oracle_solver_config(lambda: f64) -> SolverConfig {
    // The duality gap cannot close below the floating-point floor of the
    // lambda-weighted fidelity term, so the tolerance grows with lambda.
    SolverConfig {
        max_iter: 400_000,
        tol: 1e-11_f64.max(lambda * 1e-14),
        step_ratio: 1.0,
        check_every: 50,
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut b: u128 = 1;
    for i in 0..k {
        b = b * (n - i) as u128 / (i + 1) as u128;
    }
    b
}

fn recovers(
    a: &DenseMatrix,
    x: &DenseVector,
    lambda: f64,
    q: NormExponent,
    rng: &mut SplitMix64,
) -> Result<bool> {
    let y = a.matvec(x);
    let cfg = oracle_solver_config(lambda);
    let x_norm = lq_norm(x, q).max(f64::MIN_POSITIVE);
    let zero = DenseVector::zeros(a.cols());
    // Two starts: cold, and a perturbation of the target, so non-unique
    // minimizer sets are caught even when one start happens to land on x.
    let jitter: Vec<f64> = (0..a.cols())
        .map(|i| {
            let g: f64 = StandardNormal.sample(rng);
            x[i] + 0.5 * x_norm * g
        })
        .collect();
    for z0 in [zero, DenseVector::new(jitter)?] {
        let sol = solve_rlasso_from(a, &y, lambda, q, &cfg, z0)?;
        if sol.status == SolveStatus::IterLimit {
            return Err(Error::Inconclusive);
        }
        let err = lq_norm(&sol.x_hat.sub(x), q);
        if err > 1e-6 * x_norm {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tests exact uniform recovery of S-sparse signals at tuning parameter
/// `lambda`: all +/- canonical patterns on every support when that count
/// fits in `trials`, random sphere signals otherwise.
pub fn exhaustive_recovery_check(
    a: &DenseMatrix,
    s: usize,
    lambda: f64,
    q: NormExponent,
    trials: usize,
    seed: RngSeed,
) -> Result<RecoveryCheck> {
    let n = a.cols();
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if s == 0 || s > n {
        return Err(Error::Domain(format!("sparsity {s} out of range [1, {n}]")));
    }
    let canonical_count = binomial(n, s) * (1u128 << s);
    let mut rng = SplitMix64::new(seed);
    let mut trials_run = 0usize;
    if canonical_count <= trials as u128 {
        for support in combinations(n, s) {
            for mask in 0..1u64 << s {
                let mut x = vec![0.0; n];
                for (bit, &i) in support.iter().enumerate() {
                    x[i] = if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
                }
                let x = DenseVector::new(x)?;
                trials_run += 1;
                if !recovers(a, &x, lambda, q, &mut rng)? {
                    return Ok(RecoveryCheck {
                        success: false,
                        witness: Some(x),
                        trials_run,
                    });
                }
            }
        }
    } else {
        for t in 0..trials as u64 {
            let x = crate::ensembles::sparse_signal_on_sphere(n, s, q, seed.stream(t + 1))?;
            trials_run += 1;
            if !recovers(a, &x, lambda, q, &mut rng)? {
                return Ok(RecoveryCheck {
                    success: false,
                    witness: Some(x),
                    trials_run,
                });
            }
        }
    }
    Ok(RecoveryCheck {
        success: true,
        witness: None,
        trials_run,
    })
}

const BRACKET_LO: f64 = 1e-3;
const BRACKET_HI: f64 = 1e6;

/// Locates the empirical recovery threshold by bisection on lambda:
/// the returned value succeeds at lambda*(1+tol) and fails at
/// lambda*(1-tol).
pub fn empirical_tau10(a: &DenseMatrix, s: usize, q: NormExponent, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tol must lie in (0, 1), got {tol}")));
    }
    let n = a.cols();
    let trials = (binomial(n, s) * (1u128 << s)).min(usize::MAX as u128) as usize;
    let seed = RngSeed(0x0007_A100_5EED);
    let check = |lambda: f64| -> Result<bool> {
        Ok(exhaustive_recovery_check(a, s, lambda, q, trials, seed)?.success)
    };
    let mut lo = BRACKET_LO;
    let mut hi = BRACKET_HI;
    if check(lo)? || !check(hi)? {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo > 0.5 * tol * (lo + hi) {
        let mid = 0.5 * (lo + hi);
        if check(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_constant_identity() {
        let r = nsp_shape_constant_l1(&DenseMatrix::identity(2), 1).unwrap();
        assert!((r.tau10 - 1.0).abs() < 1e-8);
        // Witness certifies its own value.
        let a = DenseMatrix::identity(2);
        let t = &r.witness_support;
        let on: f64 = t.indices().iter().map(|&i| r.witness_v[i - 1].abs()).sum();
        let off: f64 = (0..2)
            .filter(|i| !t.contains(i + 1))
            .map(|i| r.witness_v[i].abs())
            .sum();
        let denom = lq_norm(&a.matvec(&r.witness_v), NormExponent::One);
        assert!(((on - off) / denom - r.tau10).abs() < 1e-8);
    }

    #[test]
    fn shape_constant_identity_family() {
        for n in 2..=4usize {
            for s in 1..n.min(4) {
                if s > 3 {
                    continue;
                }
                let r = nsp_shape_constant_l1(&DenseMatrix::identity(n), s).unwrap();
                assert!((r.tau10 - 1.0).abs() < 1e-8, "n={n} s={s} got {}", r.tau10);
            }
        }
    }

    #[test]
    fn shape_constant_detects_violation() {
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        match nsp_shape_constant_l1(&a, 1) {
            Err(Error::NspViolation { order, witness }) => {
                assert_eq!(order, 1);
                // Witness is a kernel direction with |v_T| >= |v_Tc|.
                assert!((witness[0] + witness[1]).abs() < 1e-6);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn shape_constant_budget() {
        let a = DenseMatrix::zeros(2, 13);
        assert!(matches!(
            nsp_shape_constant_l1(&a, 1),
            Err(Error::BudgetExceeded(_))
        ));
        let a = DenseMatrix::identity(5);
        assert!(matches!(
            nsp_shape_constant_l1(&a, 4),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn shape_constant_scaling_covariance() {
        // A bipartite-graph matrix this small often repeats columns and so
        // fails the strict NSP; a Gaussian draw is generic.
        let a = crate::ensembles::gaussian_matrix(5, 7, RngSeed(44)).unwrap();
        let base = nsp_shape_constant_l1(&a, 1).unwrap().tau10;
        for c in [0.5, 2.0, 10.0] {
            let scaled = nsp_shape_constant_l1(&a.scale(c), 1).unwrap().tau10;
            assert!(
                (scaled - base / c).abs() < 1e-7 * base.max(1.0),
                "c={c}: {scaled} vs {}",
                base / c
            );
        }
    }

    #[test]
    fn recovery_check_identity_examples() {
        let a = DenseMatrix::identity(2);
        let ok =
            exhaustive_recovery_check(&a, 1, 2.0, NormExponent::One, 100, RngSeed(1)).unwrap();
        assert!(ok.success);

        let bad =
            exhaustive_recovery_check(&a, 1, 0.5, NormExponent::One, 100, RngSeed(1)).unwrap();
        assert!(!bad.success);
        let w = bad.witness.unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn recovery_above_lambda_infinity_bound() {
        let a = DenseMatrix::identity(3);
        let bound =
            crate::tuning::lambda_infinity_bound(&a, NormExponent::One).unwrap();
        for s in 1..=3usize {
            let r = exhaustive_recovery_check(
                &a,
                s,
                bound * 1.01,
                NormExponent::One,
                1000,
                RngSeed(6),
            )
            .unwrap();
            assert!(r.success, "s={s}");
        }
    }

    #[test]
    fn empirical_matches_lp_on_identities() {
        let a = DenseMatrix::identity(2);
        let t = empirical_tau10(&a, 1, NormExponent::One, 1e-3).unwrap();
        assert!((t - 1.0).abs() < 2e-3, "{t}");

        let t = empirical_tau10(&a.scale(2.0), 1, NormExponent::One, 1e-3).unwrap();
        assert!((t - 0.5).abs() < 1e-3, "{t}");

        let a3 = DenseMatrix::identity(3);
        let t = empirical_tau10(&a3, 2, NormExponent::One, 1e-3).unwrap();
        assert!((t - 1.0).abs() < 2e-3, "{t}");
    }

    #[test]
    fn empirical_rejects_bad_bracket() {
        // A matrix with nontrivial kernel never recovers at any lambda.
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            empirical_tau10(&a, 1, NormExponent::One, 1e-2),
            Err(Error::Bracket { .. })
        ));
    }
}
