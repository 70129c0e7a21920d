//! Closed-form tuning rules: the effective stableness rho', the threshold
//! above which rho' = rho, recovery error coefficients, the Gaussian
//! phase-transition rule, the finite-convergence upper bound and the
//! expander constants.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, NormExponent};
use crate::svd::{inf_to_inf_norm, pseudoinverse_of_transpose};
use serde::{Deserialize, Serialize};

/// Constants (q, S, rho, tau) of a robust null space property.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NspConstants {
    pub q: NormExponent,
    pub order: usize,
    pub rho: f64,
    pub tau: f64,
}

impl NspConstants {
    pub fn new(q: NormExponent, order: usize, rho: f64, tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Domain(format!("rho must lie in [0, 1), got {rho}")));
        }
        if tau <= 0.0 {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        if order == 0 {
            return Err(Error::Domain("order must be at least 1".into()));
        }
        Ok(NspConstants {
            q,
            order,
            rho,
            tau,
        })
    }

    /// tau * S^(1 - 1/q), the strict lower threshold on lambda.
    pub fn lambda_floor(&self) -> f64 {
        self.tau * (self.order as f64).powf(1.0 - self.q.inverse())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TuningSource {
    GaussianRule,
    ExpanderRule,
    Eq1Rule,
    FiniteConvergenceBound,
}

/// A computed tuning parameter together with the inputs that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuningReport {
    pub lambda: f64,
    pub source: TuningSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl TuningReport {
    fn bare(lambda: f64, source: TuningSource) -> Self {
        TuningReport {
            lambda,
            source,
            tau: None,
            m: None,
            n: None,
            s: None,
            rho: None,
            eta: None,
            theta: None,
            p: None,
        }
    }
}

/// Effective stableness constant rho' for a tuning parameter above the
/// threshold tau * S^(1 - 1/q). Guaranteed to lie in [rho, 1).
pub fn rho_prime(lambda: f64, c: &NspConstants) -> Result<f64> {
    let floor = c.lambda_floor();
    if lambda <= floor {
        return Err(Error::Threshold {
            lambda,
            threshold: floor,
        });
    }
    let s = c.order as f64;
    let value = match c.q {
        NormExponent::One => 2.0 * c.tau / lambda - 1.0,
        _ => {
            let s_pow = s.powf(1.0 - c.q.inverse());
            let inner = 8.0 * (lambda / c.tau) * s.powf(c.q.inverse() - 1.0) + 1.0;
            (c.tau * s_pow) / (2.0 * lambda) * (1.0 + inner.sqrt()) - 1.0
        }
    };
    Ok(value.max(c.rho))
}

/// Smallest lambda with rho' = rho: (3+rho)/(1+rho)^2 * tau * S^(1-1/q) for
/// q > 1 and 2 tau / (1+rho) for q = 1.
pub fn lambda_threshold_eq1(c: &NspConstants) -> f64 {
    match c.q {
        NormExponent::One => 2.0 * c.tau / (1.0 + c.rho),
        _ => {
            (3.0 + c.rho) / ((1.0 + c.rho) * (1.0 + c.rho))
                * c.tau
                * (c.order as f64).powf(1.0 - c.q.inverse())
        }
    }
}

/// Coefficients (C, D) of the recovery error bound
/// ||x# - x||_q <= C S^(1/q - 1) d_1(x, Sigma_S) + D ||y - A x||.
pub fn error_bound_coeffs(rho_eff: f64, c: &NspConstants, lambda: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&rho_eff) {
        return Err(Error::Domain(format!(
            "effective rho must lie in [0, 1), got {rho_eff}"
        )));
    }
    let one_minus = 1.0 - rho_eff;
    let one_plus = 1.0 + rho_eff;
    Ok(match c.q {
        NormExponent::One => {
            let cc = 2.0 * one_plus / one_minus;
            let dd = 2.0 * c.tau / one_minus + one_plus / one_minus * lambda;
            (cc, dd)
        }
        _ => {
            let s_pow = (c.order as f64).powf(c.q.inverse() - 1.0);
            let cc = 2.0 * one_plus * one_plus / one_minus;
            let dd = (3.0 + rho_eff) / one_minus * c.tau
                + one_plus * one_plus / one_minus * s_pow * lambda;
            (cc, dd)
        }
    })
}

// Lanczos approximation, g = 7 with 9 coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z < 0.5 {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
        return (std::f64::consts::PI / (std::f64::consts::PI * z).sin()).ln()
            - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Gordon's constant E_M = sqrt(2/M) Gamma((M+1)/2) / Gamma(M/2), the
/// expected l2 norm of an M-vector of i.i.d. N(0, 1/M) entries.
pub fn gordon_constant(m: usize) -> f64 {
    assert!(m >= 1);
    let m = m as f64;
    ((2.0 / m).ln() * 0.5 + ln_gamma((m + 1.0) / 2.0) - ln_gamma(m / 2.0)).exp()
}

/// Tuning rule for Gaussian measurement ensembles. Returns both lambda and
/// the robustness constant tau the rule is built on.
pub fn gaussian_lambda(
    m: usize,
    n: usize,
    s: usize,
    rho: f64,
    eta: f64,
) -> Result<TuningReport> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    if !(0.0 < eta && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    if s == 0 || s > n {
        return Err(Error::Domain(format!("sparsity {s} out of range [1, {n}]")));
    }
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let mf = m as f64;
    let nf = n as f64;
    let sf = s as f64;
    let e_m = gordon_constant(m);
    let mesh = (1.0 + (1.0 + 1.0 / rho) * (1.0 + 1.0 / rho)).sqrt()
        * ((2.0 * sf / mf * (std::f64::consts::E * nf / sf).ln()).sqrt() + (sf / mf).sqrt());
    let confidence = (2.0 / mf * (1.0 / eta).ln()).sqrt();
    let denom = e_m - mesh - confidence;
    if denom <= 0.0 {
        return Err(Error::InsufficientMeasurements(denom));
    }
    let tau = 1.0 / denom;
    let lambda = (3.0 + rho) / ((1.0 + rho) * (1.0 + rho)) * tau * sf.sqrt();
    let mut report = TuningReport::bare(lambda, TuningSource::GaussianRule);
    report.tau = Some(tau);
    report.m = Some(m);
    report.n = Some(n);
    report.s = Some(s);
    report.rho = Some(rho);
    report.eta = Some(eta);
    Ok(report)
}

/// Upper bound M^(1/p) ||(A^T)^+||_{inf->inf} on the finite-convergence
/// parameter lambda_inf: any lambda strictly above it makes every rLASSO
/// minimizer a BP minimizer.
pub fn lambda_infinity_bound(a: &DenseMatrix, p: NormExponent) -> Result<f64> {
    let p_inv = match p {
        NormExponent::One => 1.0,
        NormExponent::Two => 0.5,
        NormExponent::Inf => {
            return Err(Error::UnsupportedNorm("p must be 1 or 2".into()));
        }
    };
    let pinv_t = pseudoinverse_of_transpose(a)?;
    Ok((a.rows() as f64).powf(p_inv) * inf_to_inf_norm(&pinv_t))
}

/// Constants of the left-regular bipartite graph recovery guarantee:
/// rho = 2 theta / (1 - 4 theta), tau = 1 / (1 - 4 theta),
/// lambda = 2 / (1 - 2 theta) in (2, 3),
/// D = ceil((2/theta) ln(e N / (2 S))) and the minimum number of rows.
pub fn expander_constants(
    theta: f64,
    n: usize,
    s: usize,
) -> Result<(NspConstants, f64, usize, usize)> {
    if !(theta > 0.0 && theta < 1.0 / 6.0) {
        return Err(Error::Domain(format!(
            "theta must lie in (0, 1/6), got {theta}"
        )));
    }
    if s == 0 || 2 * s > n {
        return Err(Error::Domain(format!(
            "need 1 <= S and 2S <= N, got S = {s}, N = {n}"
        )));
    }
    let rho = 2.0 * theta / (1.0 - 4.0 * theta);
    let tau = 1.0 / (1.0 - 4.0 * theta);
    let lambda = 2.0 / (1.0 - 2.0 * theta);
    let log_term = (std::f64::consts::E * n as f64 / (2.0 * s as f64)).ln();
    let d = (2.0 / theta * log_term).ceil() as usize;
    let m_min = (4.0 / theta * (2.0 / theta).exp() * s as f64 * log_term).ceil() as usize;
    let c = NspConstants::new(NormExponent::One, s, rho, tau)?;
    Ok((c, lambda, d, m_min))
}

/// `expander_constants` packaged as a report.
pub fn expander_report(theta: f64, n: usize, s: usize) -> Result<TuningReport> {
    let (c, lambda, _, _) = expander_constants(theta, n, s)?;
    let mut report = TuningReport::bare(lambda, TuningSource::ExpanderRule);
    report.tau = Some(c.tau);
    report.rho = Some(c.rho);
    report.theta = Some(theta);
    report.n = Some(n);
    report.s = Some(s);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(q: NormExponent, s: usize, rho: f64, tau: f64) -> NspConstants {
        NspConstants::new(q, s, rho, tau).unwrap()
    }

    #[test]
    fn rho_prime_q1_examples() {
        let c = consts(NormExponent::One, 1, 0.0, 1.0);
        assert_eq!(rho_prime(2.0, &c).unwrap(), 0.0);

        let c = consts(NormExponent::One, 1, 0.2, 1.0);
        let r = rho_prime(1.5, &c).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rho_prime_q2_example() {
        // lambda / tau * S^(-1/2) = 3 makes the q > 1 branch collapse to 0.
        let c = consts(NormExponent::Two, 1, 0.0, 1.0);
        let r = rho_prime(3.0, &c).unwrap();
        assert!(r.abs() < 1e-14);
        // Cross-check: EQ1 at rho = 0 gives exactly lambda = 3.
        assert!((lambda_threshold_eq1(&c) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rho_prime_rejects_lambda_at_threshold() {
        let c = consts(NormExponent::One, 4, 0.1, 2.0);
        assert!(matches!(
            rho_prime(2.0, &c),
            Err(Error::Threshold { .. })
        ));
    }

    #[test]
    fn rho_prime_range_and_eq1_consistency() {
        // lambda >= eq1 threshold iff rho' == rho, over a grid.
        for q in [NormExponent::One, NormExponent::Two, NormExponent::Inf] {
            for s in [1usize, 2, 5, 16] {
                for rho in [0.0, 0.2, 0.5, 0.9] {
                    for tau in [0.5, 1.0, 3.0] {
                        let c = consts(q, s, rho, tau);
                        let eq1 = lambda_threshold_eq1(&c);
                        let floor = c.lambda_floor();
                        for factor in [1.0001, 1.01, 1.2, 2.0, 5.0, 50.0] {
                            let lambda = floor * factor;
                            let r = rho_prime(lambda, &c).unwrap();
                            assert!(r >= rho - 1e-12 && r < 1.0, "rho'={r}");
                            let at_rho = (r - rho).abs() <= 1e-10;
                            let above = lambda >= eq1 * (1.0 - 1e-12);
                            assert_eq!(
                                at_rho, above,
                                "q={q} s={s} rho={rho} tau={tau} lambda={lambda} r={r} eq1={eq1}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rho_prime_approaches_one_near_floor() {
        let c = consts(NormExponent::Two, 4, 0.0, 1.0);
        let floor = c.lambda_floor();
        let r = rho_prime(floor * (1.0 + 1e-9), &c).unwrap();
        assert!(r > 0.999);
    }

    #[test]
    fn eq1_examples() {
        // Expander theorem at theta = 0.1: 2 tau / (1 + rho) = 2.5.
        let c = consts(NormExponent::One, 3, 1.0 / 3.0, 5.0 / 3.0);
        assert!((lambda_threshold_eq1(&c) - 2.5).abs() < 1e-15);

        let c = consts(NormExponent::Two, 4, 0.0, 1.0);
        assert!((lambda_threshold_eq1(&c) - 6.0).abs() < 1e-15);

        let c = consts(NormExponent::One, 1, 0.999_999_999, 1.0);
        assert!((lambda_threshold_eq1(&c) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn error_bound_examples() {
        // theta = 0.1 expander: C = 4, D = 10.
        let c = consts(NormExponent::One, 3, 1.0 / 3.0, 5.0 / 3.0);
        let (cc, dd) = error_bound_coeffs(1.0 / 3.0, &c, 2.5).unwrap();
        assert!((cc - 4.0).abs() < 1e-12);
        assert!((dd - 10.0).abs() < 1e-12);

        let c = consts(NormExponent::One, 1, 0.0, 1.0);
        let (cc, dd) = error_bound_coeffs(0.0, &c, 2.0).unwrap();
        assert!((cc - 2.0).abs() < 1e-15);
        assert!((dd - 4.0).abs() < 1e-15);

        let c = consts(NormExponent::Two, 1, 0.0, 1.0);
        let (cc, dd) = error_bound_coeffs(0.0, &c, 3.0).unwrap();
        assert!((cc - 2.0).abs() < 1e-15);
        assert!((dd - 6.0).abs() < 1e-15);
    }

    #[test]
    fn error_bound_rejects_rho_one() {
        let c = consts(NormExponent::One, 1, 0.0, 1.0);
        assert!(error_bound_coeffs(1.0, &c, 2.0).is_err());
    }

    #[test]
    fn gordon_constant_values() {
        assert!((gordon_constant(1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
        assert!((gordon_constant(4) - 0.939_986).abs() < 1e-6);
        let e256 = gordon_constant(256);
        assert!(e256 >= (256.0f64 / 257.0).sqrt() && e256 <= 1.0);
    }

    #[test]
    fn gordon_constant_bounds_and_monotone() {
        let mut prev = 0.0;
        let mut m = 1usize;
        while m <= 1_000_000 {
            let e = gordon_constant(m);
            assert!(e >= (m as f64 / (m as f64 + 1.0)).sqrt() - 1e-12, "m={m}");
            assert!(e <= 1.0 + 1e-12, "m={m} e={e}");
            assert!(e >= prev - 1e-12, "not monotone at m={m}");
            prev = e;
            m = (m as f64 * 1.3).ceil() as usize;
        }
    }

    #[test]
    fn gaussian_lambda_feasible_case() {
        let report = gaussian_lambda(1024, 1024, 2, 0.9, 0.5).unwrap();
        assert!(report.lambda.is_finite() && report.lambda > 0.0);
        assert!(report.tau.unwrap() > 0.0);
        // Regression anchor computed from the formula with the log-gamma
        // Gordon constant.
        let expected = {
            let e_m = gordon_constant(1024);
            let mesh = (1.0 + (1.0 + 1.0 / 0.9f64) * (1.0 + 1.0 / 0.9)).sqrt()
                * ((2.0 * (2.0 / 1024.0) * (std::f64::consts::E * 512.0f64).ln()).sqrt()
                    + (2.0f64 / 1024.0).sqrt());
            let conf = ((2.0 / 1024.0) * 2.0f64.ln()).sqrt();
            (3.9 / (1.9 * 1.9)) / (e_m - mesh - conf) * 2.0f64.sqrt()
        };
        assert!((report.lambda - expected).abs() < 1e-12, "{}", report.lambda);
        assert!((report.lambda - 3.27).abs() < 0.05, "{}", report.lambda);
    }

    #[test]
    fn gaussian_lambda_infeasible_cases() {
        assert!(matches!(
            gaussian_lambda(16, 1024, 8, 0.5, 0.01),
            Err(Error::InsufficientMeasurements(_))
        ));
        assert!(matches!(
            gaussian_lambda(8, 8, 8, 0.99, 0.5),
            Err(Error::InsufficientMeasurements(_))
        ));
        // Exact evaluation shows the published bound is too loose to be
        // feasible even at a generous 4x oversampling with S = 2.
        assert!(matches!(
            gaussian_lambda(256, 1024, 2, 0.9, 0.5),
            Err(Error::InsufficientMeasurements(_))
        ));
    }

    #[test]
    fn lambda_infinity_examples() {
        let i2 = DenseMatrix::identity(2);
        assert!((lambda_infinity_bound(&i2, NormExponent::One).unwrap() - 2.0).abs() < 1e-10);
        assert!(
            (lambda_infinity_bound(&i2, NormExponent::Two).unwrap() - std::f64::consts::SQRT_2)
                .abs()
                < 1e-10
        );
        let a = DenseMatrix::identity(3).scale(2.0);
        assert!((lambda_infinity_bound(&a, NormExponent::One).unwrap() - 1.5).abs() < 1e-10);
    }

    #[test]
    fn expander_constants_examples() {
        let (c, lambda, _, _) = expander_constants(0.1, 1024, 4).unwrap();
        assert!((c.rho - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.tau - 5.0 / 3.0).abs() < 1e-15);
        assert!((lambda - 2.5).abs() < 1e-15);

        let (_, lambda, _, _) = expander_constants(1.0 / 6.0 - 1e-9, 1024, 4).unwrap();
        assert!((lambda - 3.0).abs() < 1e-8);

        let (_, _, d, _) = expander_constants(0.1, 1024, 4).unwrap();
        assert_eq!(d, 118);

        assert!(expander_constants(0.2, 1024, 4).is_err());
        assert!(expander_constants(0.1, 8, 5).is_err());
    }
}
