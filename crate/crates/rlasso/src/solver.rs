//! First-order primal-dual engine and the four decoders built on it.
//!
//! Every program is cast as `min_z G(z) + F(Az)` and solved with the
//! primal-dual hybrid gradient iteration. G and F vary per decoder but all
//! their proximal maps are closed-form, so one engine serves rLASSO, BP,
//! BPDN and CLR. Termination is certified by a scaled dual witness, not by
//! iterate stagnation.

use crate::error::{Error, Result};
use crate::matrix::{lq_norm, DenseMatrix, DenseVector, NormExponent};
use crate::prox::{project_l1_ball, project_l2_ball, project_linf_ball, prox_l1};
use crate::svd::{operator_norm_estimate, svd};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Relative duality-gap / KKT tolerance.
    pub tol: f64,
    /// Primal/dual step balance; sigma * tau * ||A||^2 <= 1 is kept either way.
    pub step_ratio: f64,
    pub check_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 50_000,
            tol: 1e-9,
            step_ratio: 1.0,
            check_every: 50,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol <= 0.0 {
            return Err(Error::Domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if self.step_ratio <= 0.0 {
            return Err(Error::Domain("step_ratio must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    IterLimit,
}

/// Solver output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solution {
    #[serde(skip)]
    pub x_hat: DenseVector,
    pub objective: f64,
    pub residual_norm: f64,
    pub l1_norm: f64,
    pub iterations: usize,
    pub gap: f64,
    pub status: SolveStatus,
}

#[derive(Clone, Copy, Debug)]
enum Program {
    Rlasso { lambda: f64 },
    Bp,
    Bpdn { epsilon: f64 },
    Clr { tau_budget: f64 },
}

fn dual_exponent(q: NormExponent) -> NormExponent {
    match q {
        NormExponent::One => NormExponent::Inf,
        NormExponent::Two => NormExponent::Two,
        NormExponent::Inf => NormExponent::One,
    }
}

fn check_fidelity_exponent(q: NormExponent) -> Result<()> {
    match q {
        NormExponent::One | NormExponent::Two => Ok(()),
        NormExponent::Inf => Err(Error::UnsupportedNorm(
            "fidelity norm must be q = 1 or q = 2".into(),
        )),
    }
}

/// Projection of y onto Range(A) via the thin SVD; returns (projection
/// residual in l2, rank).
fn range_residual(a: &DenseMatrix, y: &DenseVector) -> Result<f64> {
    let f = svd(a)?;
    // ||y - U U^T y||_2
    let mut uty = vec![0.0; f.rank];
    for (k, u) in uty.iter_mut().enumerate() {
        for i in 0..a.rows() {
            *u += f.u.get(i, k) * y[i];
        }
    }
    let mut res = 0.0;
    for i in 0..a.rows() {
        let mut proj = 0.0;
        for (k, u) in uty.iter().enumerate() {
            proj += f.u.get(i, k) * u;
        }
        res += (y[i] - proj) * (y[i] - proj);
    }
    Ok(res.sqrt())
}

struct Certificate {
    gap: f64,
    feasible: bool,
    primal: f64,
}

fn certificate(
    program: Program,
    q: NormExponent,
    a: &DenseMatrix,
    y: &DenseVector,
    z: &DenseVector,
    w: &DenseVector,
    tol: f64,
) -> Certificate {
    let residual = y.sub(&a.matvec(z));
    let res_q = lq_norm(&residual, q);
    let l1 = lq_norm(z, NormExponent::One);
    let atw = a.matvec_transpose(w);
    let atw_inf = lq_norm(&atw, NormExponent::Inf);
    let w_dual = lq_norm(w, dual_exponent(q));
    // The saddle point is min_z max_w <Az, w> - F*(w) + G(z) with
    // F*(w) = <w, y> + (constraints), so the dual objective carries -<w, y>.
    let wy = -y.dot(w);
    match program {
        Program::Rlasso { lambda } => {
            let primal = l1 + lambda * res_q;
            // Dual: max -<w, y> s.t. ||A^T w||_inf <= 1, ||w||_dual <= lambda.
            let scale = atw_inf.max(if lambda > 0.0 { w_dual / lambda } else { 1.0 }).max(1.0);
            let dual = wy / scale;
            Certificate {
                gap: primal - dual,
                feasible: true,
                primal,
            }
        }
        Program::Bp => {
            let primal = l1;
            let scale = atw_inf.max(1.0);
            let dual = wy / scale;
            let feasible = lq_norm(&residual, NormExponent::Two)
                <= tol * lq_norm(y, NormExponent::Two).max(f64::MIN_POSITIVE);
            Certificate {
                gap: primal - dual,
                feasible,
                primal,
            }
        }
        Program::Bpdn { epsilon } => {
            let primal = l1;
            let scale = atw_inf.max(1.0);
            // Dual: max -<w, y> - eps ||w||_dual s.t. ||A^T w||_inf <= 1.
            let dual = (wy - epsilon * w_dual) / scale;
            let feasible = res_q <= epsilon * (1.0 + tol) + tol * tol;
            Certificate {
                gap: primal - dual,
                feasible,
                primal,
            }
        }
        Program::Clr { tau_budget } => {
            let primal = res_q;
            // Dual: max -<w, y> - tau ||A^T w||_inf s.t. ||w||_dual <= 1.
            let scale = w_dual.max(1.0);
            let dual = (wy - tau_budget * atw_inf) / scale;
            Certificate {
                gap: primal - dual,
                feasible: true,
                primal,
            }
        }
    }
}

fn prox_dual(
    program: Program,
    q: NormExponent,
    v: &DenseVector,
    y: &DenseVector,
    sigma: f64,
) -> DenseVector {
    let shifted = v.sub(&y.scale(sigma));
    let zero = DenseVector::zeros(v.len());
    match program {
        Program::Rlasso { lambda } => match q {
            NormExponent::Two => project_l2_ball(&shifted, &zero, lambda),
            _ => project_linf_ball(&shifted, &zero, lambda),
        },
        Program::Bp => shifted,
        Program::Bpdn { epsilon } => match q {
            NormExponent::Two => {
                let norm = lq_norm(&shifted, NormExponent::Two);
                let threshold = sigma * epsilon;
                if norm <= threshold {
                    zero
                } else {
                    shifted.scale(1.0 - threshold / norm)
                }
            }
            _ => shifted.sub(&project_l1_ball(&shifted, sigma * epsilon)),
        },
        Program::Clr { .. } => match q {
            NormExponent::Two => project_l2_ball(&shifted, &zero, 1.0),
            _ => project_linf_ball(&shifted, &zero, 1.0),
        },
    }
}

fn prox_primal(program: Program, v: &DenseVector, tau_step: f64) -> DenseVector {
    match program {
        Program::Clr { tau_budget } => project_l1_ball(v, tau_budget),
        _ => prox_l1(v, tau_step),
    }
}

fn pdhg(
    program: Program,
    a: &DenseMatrix,
    y: &DenseVector,
    q: NormExponent,
    cfg: &SolverConfig,
    init: Option<(DenseVector, DenseVector)>,
) -> Result<Solution> {
    cfg.validate()?;
    if a.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but y has length {}",
            a.rows(),
            y.len()
        )));
    }
    let norm_estimate = operator_norm_estimate(a, 1e-7, 5_000);
    let op_norm = if norm_estimate > 0.0 {
        norm_estimate * 1.01
    } else {
        1.0
    };
    let tau_step = cfg.step_ratio / op_norm;
    let sigma = 1.0 / (cfg.step_ratio * op_norm);

    let (mut z, mut w) = match init {
        Some((z0, w0)) => (z0, w0),
        None => (DenseVector::zeros(a.cols()), DenseVector::zeros(a.rows())),
    };
    let mut z_bar = z.clone();
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut status = SolveStatus::IterLimit;

    for k in 1..=cfg.max_iter {
        iterations = k;
        let w_arg = w.add(&a.matvec(&z_bar).scale(sigma));
        w = prox_dual(program, q, &w_arg, y, sigma);
        let z_arg = z.sub(&a.matvec_transpose(&w).scale(tau_step));
        let z_next = prox_primal(program, &z_arg, tau_step);
        z_bar = z_next.scale(2.0).sub(&z);
        z = z_next;

        if k % cfg.check_every == 0 || k == cfg.max_iter {
            let cert = certificate(program, q, a, y, &z, &w, cfg.tol);
            gap = cert.gap;
            if cert.feasible && cert.gap <= cfg.tol * (1.0 + cert.primal.abs()) {
                status = SolveStatus::Converged;
                break;
            }
        }
    }

    let residual = y.sub(&a.matvec(&z));
    let residual_norm = lq_norm(&residual, q);
    let l1_norm = lq_norm(&z, NormExponent::One);
    let objective = match program {
        Program::Rlasso { lambda } => l1_norm + lambda * residual_norm,
        Program::Bp | Program::Bpdn { .. } => l1_norm,
        Program::Clr { .. } => residual_norm,
    };
    Ok(Solution {
        x_hat: z,
        objective,
        residual_norm,
        l1_norm,
        iterations,
        gap,
        status,
    })
}

/// min ||z||_1 + lambda ||y - A z||_q.
pub fn solve_rlasso(
    a: &DenseMatrix,
    y: &DenseVector,
    lambda: f64,
    q: NormExponent,
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_fidelity_exponent(q)?;
    if lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be nonnegative, got {lambda}")));
    }
    pdhg(Program::Rlasso { lambda }, a, y, q, cfg, None)
}

/// rLASSO started from a given primal/dual pair. Used by the recovery oracle
/// to probe uniqueness of minimizers.
pub(crate) fn solve_rlasso_from(
    a: &DenseMatrix,
    y: &DenseVector,
    lambda: f64,
    q: NormExponent,
    cfg: &SolverConfig,
    z0: DenseVector,
) -> Result<Solution> {
    check_fidelity_exponent(q)?;
    let w0 = DenseVector::zeros(a.rows());
    pdhg(Program::Rlasso { lambda }, a, y, q, cfg, Some((z0, w0)))
}

/// min ||z||_1 s.t. A z = y. Requires y in Range(A) up to tolerance.
pub fn solve_bp(a: &DenseMatrix, y: &DenseVector, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let y_norm = lq_norm(y, NormExponent::Two);
    let min_res = range_residual(a, y)?;
    if min_res > cfg.tol * y_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Infeasible(format!(
            "y is outside Range(A): least-squares residual {min_res:.3e} exceeds {:.3e}",
            cfg.tol * y_norm
        )));
    }
    pdhg(Program::Bp, a, y, NormExponent::Two, cfg, None)
}

/// min ||z||_1 s.t. ||A z - y||_q <= epsilon.
pub fn solve_bpdn(
    a: &DenseMatrix,
    y: &DenseVector,
    epsilon: f64,
    q: NormExponent,
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_fidelity_exponent(q)?;
    if epsilon < 0.0 {
        return Err(Error::Domain(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    // ||r||_q >= ||r||_2 for q in {1, 2}, so an l2 range residual above
    // epsilon certifies infeasibility for both fidelity norms.
    if epsilon == 0.0 {
        let min_res = range_residual(a, y)?;
        if min_res > cfg.tol * lq_norm(y, NormExponent::Two).max(f64::MIN_POSITIVE) {
            return Err(Error::Infeasible(format!(
                "epsilon = 0 but y is outside Range(A) by {min_res:.3e}"
            )));
        }
    } else {
        let min_res = range_residual(a, y)?;
        if min_res > epsilon * (1.0 + 1e-12) {
            return Err(Error::Infeasible(format!(
                "epsilon {epsilon:.3e} is below the minimal residual {min_res:.3e}"
            )));
        }
    }
    pdhg(Program::Bpdn { epsilon }, a, y, q, cfg, None)
}

/// min ||A z - y||_q s.t. ||z||_1 <= tau_budget.
pub fn solve_clr(
    a: &DenseMatrix,
    y: &DenseVector,
    tau_budget: f64,
    q: NormExponent,
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_fidelity_exponent(q)?;
    if tau_budget < 0.0 {
        return Err(Error::Domain(format!(
            "tau budget must be nonnegative, got {tau_budget}"
        )));
    }
    pdhg(Program::Clr { tau_budget }, a, y, q, cfg, None)
}
