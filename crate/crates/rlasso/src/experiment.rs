//! Monte Carlo benchmark harness: configuration, trial execution, sweep
//! aggregation and CSV persistence.

use crate::ensembles::{
    gaussian_matrix, lrbg_matrix, noise_on_sphere, sparse_signal_on_sphere, GraphSpec,
};
use crate::error::{Error, Result};
use crate::matrix::{lq_norm, DenseMatrix, DenseVector, NormExponent};
use crate::rng::RngSeed;
use crate::solver::{
    solve_bpdn, solve_clr, solve_rlasso, Solution, SolveStatus, SolverConfig,
};
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::Path;
use std::time::Instant;

// Seed stream offsets per trial, kept above the trial-index range so the
// XOR-derived streams of different trials never collide.
const STREAM_MATRIX: u64 = 0x1_0000_0000;
const STREAM_SIGNAL: u64 = 0x2_0000_0000;
const STREAM_NOISE: u64 = 0x3_0000_0000;

/// Defaults used by the `gaussian` rule when the config gives no explicit
/// stableness/confidence inputs.
const GAUSSIAN_RULE_RHO: f64 = 0.9;
const GAUSSIAN_RULE_ETA: f64 = 0.5;
/// Default expansion quality for the `expander` rule.
const EXPANDER_RULE_THETA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    Rlasso,
    Bp,
    Bpdn,
    Clr,
}

impl Decoder {
    fn name(self) -> &'static str {
        match self {
            Decoder::Rlasso => "rlasso",
            Decoder::Bp => "bp",
            Decoder::Bpdn => "bpdn",
            Decoder::Clr => "clr",
        }
    }
}

/// A named tuning-parameter rule: `sqrtS:c`, `sqrtM:c`, `const:c`,
/// `gaussian`, `expander`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaRule {
    SqrtS(f64),
    SqrtM(f64),
    Const(f64),
    Gaussian,
    Expander,
}

impl LambdaRule {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config {
            field: "lambda_rules".into(),
            message: format!("{msg}: `{s}`"),
        };
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let coeff = |arg: Option<&str>| -> Result<f64> {
            let arg = arg.ok_or_else(|| bad("rule needs a coefficient"))?;
            let c: f64 = arg.parse().map_err(|_| bad("bad coefficient"))?;
            if !c.is_finite() || c < 0.0 {
                return Err(bad("coefficient must be finite and nonnegative"));
            }
            Ok(c)
        };
        match name {
            "sqrtS" => Ok(LambdaRule::SqrtS(coeff(arg)?)),
            "sqrtM" => Ok(LambdaRule::SqrtM(coeff(arg)?)),
            "const" => Ok(LambdaRule::Const(coeff(arg)?)),
            "gaussian" if arg.is_none() => Ok(LambdaRule::Gaussian),
            "expander" if arg.is_none() => Ok(LambdaRule::Expander),
            _ => Err(bad("unknown lambda rule")),
        }
    }

    /// Evaluates the rule at the given problem dimensions.
    pub fn evaluate(self, m: usize, n: usize, s: usize) -> Result<f64> {
        Ok(match self {
            LambdaRule::SqrtS(c) => c * (s as f64).sqrt(),
            LambdaRule::SqrtM(c) => c * (m as f64).sqrt(),
            LambdaRule::Const(c) => c,
            LambdaRule::Gaussian => {
                crate::tuning::gaussian_lambda(m, n, s, GAUSSIAN_RULE_RHO, GAUSSIAN_RULE_ETA)?
                    .lambda
            }
            LambdaRule::Expander => {
                crate::tuning::expander_constants(EXPANDER_RULE_THETA, n, s)?.1
            }
        })
    }
}

impl std::fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaRule::SqrtS(c) => write!(f, "sqrtS:{c}"),
            LambdaRule::SqrtM(c) => write!(f, "sqrtM:{c}"),
            LambdaRule::Const(c) => write!(f, "const:{c}"),
            LambdaRule::Gaussian => write!(f, "gaussian"),
            LambdaRule::Expander => write!(f, "expander"),
        }
    }
}

impl Serialize for LambdaRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LambdaRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LambdaRule::parse(&s).map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Lambda,
    Snr,
    S,
    M,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_m() -> usize {
    64
}
fn default_n() -> usize {
    256
}
fn default_s() -> usize {
    8
}
fn default_d() -> usize {
    10
}
fn default_q() -> NormExponent {
    NormExponent::Two
}
fn default_snr() -> f64 {
    100.0
}
fn default_trials() -> usize {
    100
}
fn default_lambda_rules() -> Vec<LambdaRule> {
    vec![LambdaRule::SqrtM(0.65)]
}
fn default_decoders() -> Vec<Decoder> {
    vec![Decoder::Rlasso, Decoder::Bp, Decoder::Bpdn, Decoder::Clr]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_s")]
    pub s: usize,
    /// Left degree of the bipartite-graph ensemble (q = 1 only).
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_q")]
    pub q: NormExponent,
    #[serde(default = "default_snr")]
    pub snr: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_lambda_rules")]
    pub lambda_rules: Vec<LambdaRule>,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<Decoder>,
    #[serde(default)]
    pub seed: RngSeed,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: default_m(),
            n: default_n(),
            s: default_s(),
            d: default_d(),
            q: default_q(),
            snr: default_snr(),
            trials: default_trials(),
            lambda_rules: default_lambda_rules(),
            decoders: default_decoders(),
            seed: RngSeed::default(),
            solver: SolverConfig::default(),
            sweep: None,
        }
    }
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(config_err("m", "must be at least 1"));
        }
        if self.s == 0 || self.s > self.n {
            return Err(config_err("s", format!("must lie in [1, {}]", self.n)));
        }
        if !(self.snr > 0.0) {
            return Err(config_err("snr", "must be positive"));
        }
        if self.trials == 0 {
            return Err(config_err("trials", "must be at least 1"));
        }
        match self.q {
            NormExponent::One => {
                if self.d == 0 || self.d > self.m {
                    return Err(config_err(
                        "d",
                        format!("left degree must lie in [1, {}]", self.m),
                    ));
                }
            }
            NormExponent::Two => {}
            NormExponent::Inf => {
                return Err(config_err("q", "fidelity exponent must be 1 or 2"));
            }
        }
        if self.decoders.is_empty() {
            return Err(config_err("decoders", "at least one decoder required"));
        }
        let sweeping_lambda = matches!(
            &self.sweep,
            Some(s) if s.parameter == SweepParameter::Lambda
        );
        if self.decoders.contains(&Decoder::Rlasso)
            && self.lambda_rules.is_empty()
            && !sweeping_lambda
        {
            return Err(config_err("lambda_rules", "rlasso needs a lambda rule"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(config_err("sweep.values", "must be nonempty"));
            }
            for &v in &sweep.values {
                let ok = match sweep.parameter {
                    SweepParameter::Lambda | SweepParameter::Snr => v.is_finite() && v > 0.0,
                    SweepParameter::S | SweepParameter::M => {
                        v.is_finite() && v >= 1.0 && v.fract() == 0.0
                    }
                };
                if !ok {
                    return Err(config_err("sweep.values", format!("bad value {v}")));
                }
            }
        }
        self.solver.validate()?;
        Ok(())
    }

    /// The config with one sweep value substituted and the sweep removed.
    fn at_sweep_value(&self, value: f64) -> ExperimentConfig {
        let mut cfg = self.clone();
        if let Some(sweep) = &self.sweep {
            match sweep.parameter {
                SweepParameter::Lambda => cfg.lambda_rules = vec![LambdaRule::Const(value)],
                SweepParameter::Snr => cfg.snr = value,
                SweepParameter::S => cfg.s = value as usize,
                SweepParameter::M => cfg.m = value as usize,
            }
        }
        cfg.sweep = None;
        cfg
    }

    /// CSV labels: plain decoder names, except one `rlasso:<rule>` entry per
    /// configured rule when several rules run side by side.
    fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in &self.decoders {
            match d {
                Decoder::Rlasso if self.lambda_rules.len() > 1 => {
                    for rule in &self.lambda_rules {
                        out.push(format!("rlasso:{rule}"));
                    }
                }
                other => out.push(other.name().to_string()),
            }
        }
        out
    }
}

/// One decoder's outcome within one trial.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub label: String,
    pub error: f64,
    pub error_per_noise: f64,
    pub status: SolveStatus,
    pub wall_ms: f64,
}

/// Aggregated CSV row for one (sweep value, decoder) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub sweep_value: f64,
    pub decoder: String,
    pub mean_rel_error: f64,
    pub mean_error_per_noise: f64,
    pub status_converged: usize,
    pub status_iterlimit: usize,
    pub wall_ms: f64,
}

fn run_decoder(
    label: &str,
    x: &DenseVector,
    e_norm: f64,
    q: NormExponent,
    solve: impl FnOnce() -> Result<Solution>,
) -> Result<TrialResult> {
    let start = Instant::now();
    let sol = solve()?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let error = lq_norm(&sol.x_hat.sub(x), q);
    Ok(TrialResult {
        label: label.to_string(),
        error,
        error_per_noise: error / e_norm,
        status: sol.status,
        wall_ms,
    })
}

/// Runs every configured decoder on a fixed instance (A, x, e). Exposed so
/// tests can pin the matrix and noise.
pub fn run_trial_given(
    a: &DenseMatrix,
    x: &DenseVector,
    e: &DenseVector,
    cfg: &ExperimentConfig,
) -> Result<Vec<TrialResult>> {
    let q = cfg.q;
    let y = a.matvec(x).add(e);
    let e_norm = lq_norm(e, q);
    let many_rules = cfg.lambda_rules.len() > 1;
    let mut out = Vec::new();
    for d in &cfg.decoders {
        match d {
            Decoder::Rlasso => {
                for rule in &cfg.lambda_rules {
                    let lambda = rule.evaluate(cfg.m, cfg.n, cfg.s)?;
                    let label = if many_rules {
                        format!("rlasso:{rule}")
                    } else {
                        "rlasso".to_string()
                    };
                    out.push(run_decoder(&label, x, e_norm, q, || {
                        solve_rlasso(a, &y, lambda, q, &cfg.solver)
                    })?);
                }
            }
            Decoder::Bp => {
                // On noisy data the equality program is solved as BPDN with a
                // tolerance-sized slack; for surjective A this is the same
                // minimizer set up to solver accuracy.
                let eps = 10.0 * cfg.solver.tol;
                out.push(run_decoder("bp", x, e_norm, q, || {
                    solve_bpdn(a, &y, eps, q, &cfg.solver)
                })?);
            }
            Decoder::Bpdn => {
                out.push(run_decoder("bpdn", x, e_norm, q, || {
                    solve_bpdn(a, &y, e_norm, q, &cfg.solver)
                })?);
            }
            Decoder::Clr => {
                let budget = lq_norm(x, NormExponent::One);
                out.push(run_decoder("clr", x, e_norm, q, || {
                    solve_clr(a, &y, budget, q, &cfg.solver)
                })?);
            }
        }
    }
    Ok(out)
}

/// Draws the k-th instance (measurement matrix, signal, noise) and runs all
/// configured decoders on it.
pub fn run_trial(cfg: &ExperimentConfig, k: u64) -> Result<Vec<TrialResult>> {
    let base = cfg.seed.stream(k);
    let a = match cfg.q {
        NormExponent::One => lrbg_matrix(
            GraphSpec {
                m: cfg.m,
                n: cfg.n,
                d: cfg.d,
            },
            base.stream(STREAM_MATRIX),
        )?,
        _ => gaussian_matrix(cfg.m, cfg.n, base.stream(STREAM_MATRIX))?,
    };
    let x = sparse_signal_on_sphere(cfg.n, cfg.s, cfg.q, base.stream(STREAM_SIGNAL))?;
    let radius = lq_norm(&a.matvec(&x), cfg.q) / cfg.snr;
    let e = noise_on_sphere(cfg.m, cfg.q, radius, base.stream(STREAM_NOISE))?;
    run_trial_given(&a, &x, &e, cfg)
}

fn aggregate(
    sweep_value: f64,
    labels: &[String],
    trials: &[Vec<TrialResult>],
) -> Vec<ExperimentRecord> {
    labels
        .iter()
        .map(|label| {
            let mut rec = ExperimentRecord {
                sweep_value,
                decoder: label.clone(),
                mean_rel_error: 0.0,
                mean_error_per_noise: 0.0,
                status_converged: 0,
                status_iterlimit: 0,
                wall_ms: 0.0,
            };
            let mut count = 0usize;
            for trial in trials {
                for r in trial.iter().filter(|r| &r.label == label) {
                    rec.mean_rel_error += r.error;
                    rec.mean_error_per_noise += r.error_per_noise;
                    rec.wall_ms += r.wall_ms;
                    match r.status {
                        SolveStatus::Converged => rec.status_converged += 1,
                        SolveStatus::IterLimit => rec.status_iterlimit += 1,
                    }
                    count += 1;
                }
            }
            rec.mean_rel_error /= count as f64;
            rec.mean_error_per_noise /= count as f64;
            rec
        })
        .collect()
}

/// Runs the configured sweep (or a single point when no sweep is set),
/// `trials` seeded trials per point, in parallel. Output is a pure function
/// of the config except for the wall-time column.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let sweep_values: Vec<f64> = match &cfg.sweep {
        Some(s) => s.values.clone(),
        None => vec![0.0],
    };
    let mut records = Vec::new();
    for value in sweep_values {
        let point_cfg = cfg.at_sweep_value(value);
        point_cfg.validate().map_err(|e| match e {
            Error::Config { field, message } => Error::Config {
                field: format!("sweep({field})"),
                message,
            },
            other => other,
        })?;
        let trials: Vec<Result<Vec<TrialResult>>> = (0..point_cfg.trials as u64)
            .into_par_iter()
            .map(|k| run_trial(&point_cfg, k))
            .collect();
        let trials: Result<Vec<_>> = trials.into_iter().collect();
        records.extend(aggregate(value, &point_cfg.labels(), &trials?));
    }
    Ok(records)
}

pub const CSV_HEADER: &str =
    "sweep_value,decoder,mean_rel_error,mean_error_per_noise,status_converged,status_iterlimit,wall_ms";

pub fn format_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.sweep_value,
            r.decoder,
            r.mean_rel_error,
            r.mean_error_per_noise,
            r.status_converged,
            r.status_iterlimit,
            r.wall_ms.round() as u64,
        ));
    }
    out
}

pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    std::fs::write(path, format_csv(records))?;
    Ok(())
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Config {
        field: "json".into(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
