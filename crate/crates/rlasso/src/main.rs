use clap::{Args, Parser, Subcommand, ValueEnum};
use rlasso::ensembles::{gaussian_matrix, lrbg_matrix, GraphSpec};
use rlasso::experiment::{read_config, run_experiment, write_csv};
use rlasso::io;
use rlasso::oracle::{empirical_tau10, nsp_shape_constant_l1};
use rlasso::solver::{solve_bp, solve_bpdn, solve_clr, solve_rlasso, SolverConfig};
use rlasso::tuning::{
    expander_report, gaussian_lambda, lambda_infinity_bound, lambda_threshold_eq1, NspConstants,
    TuningReport, TuningSource,
};
use rlasso::{Error, NormExponent, RngSeed};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rlasso",
    about = "Noise-blind sparse recovery: rLASSO solvers, tuning rules and certification oracles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Lrbg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecoderArg {
    Rlasso,
    Bp,
    Bpdn,
    Clr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    Gaussian,
    Expander,
    Eq1,
    LambdaInf,
}

fn parse_q(v: &str) -> Result<NormExponent, String> {
    match v {
        "1" => Ok(NormExponent::One),
        "2" => Ok(NormExponent::Two),
        other => Err(format!("unsupported fidelity exponent {other}; use 1 or 2")),
    }
}

#[derive(Args)]
struct GenMatrixArgs {
    #[arg(long, value_enum)]
    ensemble: EnsembleArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Left degree (lrbg only).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    decoder: DecoderArg,
    #[arg(long, value_parser = parse_q, default_value = "2")]
    q: NormExponent,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tau_budget: Option<f64>,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    y: PathBuf,
    /// Where to write the estimate (core text vector format).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long, value_enum)]
    rule: RuleArg,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_parser = parse_q)]
    q: Option<NormExponent>,
    /// Outer norm exponent p for lambda-inf (1 or 2).
    #[arg(long, value_parser = parse_q)]
    p: Option<NormExponent>,
    /// Matrix path (lambda-inf only).
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct NspOracleArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    s: usize,
    /// Also bisect the empirical recovery threshold.
    #[arg(long)]
    empirical: bool,
    #[arg(long, value_parser = parse_q, default_value = "1")]
    q: NormExponent,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded random measurement matrix and write it to a file.
    GenMatrix(GenMatrixArgs),
    /// Run one decoder on a (matrix, measurement) pair.
    Solve(SolveArgs),
    /// Evaluate a tuning rule and print the report as JSON.
    Tune(TuneArgs),
    /// Certify the l1 NSP shape constant of a small matrix.
    NspOracle(NspOracleArgs),
    /// Run a configured Monte Carlo experiment and write a CSV.
    Experiment(ExperimentArgs),
}

fn missing(flag: &str) -> Error {
    Error::Config {
        field: flag.into(),
        message: "required by this subcommand".into(),
    }
}

fn gen_matrix(args: GenMatrixArgs) -> Result<(), Error> {
    let seed = RngSeed(args.seed);
    let a = match args.ensemble {
        EnsembleArg::Gaussian => gaussian_matrix(args.m, args.n, seed)?,
        EnsembleArg::Lrbg => {
            let d = args.d.ok_or_else(|| missing("--d"))?;
            lrbg_matrix(
                GraphSpec {
                    m: args.m,
                    n: args.n,
                    d,
                },
                seed,
            )?
        }
    };
    io::write_matrix(&a, &args.out)?;
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), Error> {
    let a = io::read_matrix(&args.matrix)?;
    let y = io::read_vector(&args.y)?;
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "y has {} entries but the matrix has {} rows",
            y.len(),
            a.rows()
        )));
    }
    let mut cfg = SolverConfig::default();
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    if let Some(max_iter) = args.max_iter {
        cfg.max_iter = max_iter;
    }
    cfg.validate()?;
    let sol = match args.decoder {
        DecoderArg::Rlasso => {
            let lambda = args.lambda.ok_or_else(|| missing("--lambda"))?;
            solve_rlasso(&a, &y, lambda, args.q, &cfg)?
        }
        DecoderArg::Bp => solve_bp(&a, &y, &cfg)?,
        DecoderArg::Bpdn => {
            let epsilon = args.epsilon.ok_or_else(|| missing("--epsilon"))?;
            solve_bpdn(&a, &y, epsilon, args.q, &cfg)?
        }
        DecoderArg::Clr => {
            let tau_budget = args.tau_budget.ok_or_else(|| missing("--tau-budget"))?;
            solve_clr(&a, &y, tau_budget, args.q, &cfg)?
        }
    };
    println!(
        "objective {} residual {} iterations {} status {}",
        sol.objective,
        sol.residual_norm,
        sol.iterations,
        match sol.status {
            rlasso::solver::SolveStatus::Converged => "converged",
            rlasso::solver::SolveStatus::IterLimit => "iter-limit",
        }
    );
    if let Some(out) = args.out {
        io::write_vector(&sol.x_hat, &out)?;
    }
    Ok(())
}

fn tune(args: TuneArgs) -> Result<(), Error> {
    let report: TuningReport = match args.rule {
        RuleArg::Gaussian => gaussian_lambda(
            args.m.ok_or_else(|| missing("--m"))?,
            args.n.ok_or_else(|| missing("--n"))?,
            args.s.ok_or_else(|| missing("--s"))?,
            args.rho.ok_or_else(|| missing("--rho"))?,
            args.eta.ok_or_else(|| missing("--eta"))?,
        )?,
        RuleArg::Expander => expander_report(
            args.theta.ok_or_else(|| missing("--theta"))?,
            args.n.ok_or_else(|| missing("--n"))?,
            args.s.ok_or_else(|| missing("--s"))?,
        )?,
        RuleArg::Eq1 => {
            let c = NspConstants::new(
                args.q.ok_or_else(|| missing("--q"))?,
                args.s.ok_or_else(|| missing("--s"))?,
                args.rho.ok_or_else(|| missing("--rho"))?,
                args.tau.ok_or_else(|| missing("--tau"))?,
            )?;
            let mut r = TuningReport {
                lambda: lambda_threshold_eq1(&c),
                source: TuningSource::Eq1Rule,
                tau: Some(c.tau),
                m: None,
                n: None,
                s: Some(c.order),
                rho: Some(c.rho),
                eta: None,
                theta: None,
                p: None,
            };
            r.tau = Some(c.tau);
            r
        }
        RuleArg::LambdaInf => {
            let matrix = args.matrix.ok_or_else(|| missing("--matrix"))?;
            let p = args.p.ok_or_else(|| missing("--p"))?;
            let a = io::read_matrix(&matrix)?;
            TuningReport {
                lambda: lambda_infinity_bound(&a, p)?,
                source: TuningSource::FiniteConvergenceBound,
                tau: None,
                m: Some(a.rows()),
                n: Some(a.cols()),
                s: None,
                rho: None,
                eta: None,
                theta: None,
                p: Some(p.as_f64()),
            }
        }
    };
    println!(
        "{}",
        serde_json::to_string(&report).map_err(|e| Error::Io(e.to_string()))?
    );
    Ok(())
}

fn nsp_oracle(args: NspOracleArgs) -> Result<(), Error> {
    let a = io::read_matrix(&args.matrix)?;
    let shape = nsp_shape_constant_l1(&a, args.s)?;
    let mut out = serde_json::to_value(&shape).map_err(|e| Error::Io(e.to_string()))?;
    if args.empirical {
        let empirical = empirical_tau10(&a, args.s, args.q, args.tol)?;
        out["empirical_tau10"] = serde_json::json!(empirical);
    }
    println!("{out}");
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Error> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config {
                field: "threads".into(),
                message: e.to_string(),
            })?;
    }
    let cfg = read_config(&args.config)?;
    let records = run_experiment(&cfg)?;
    write_csv(&records, &args.out)?;
    Ok(())
}

/// Exit code 2 for configuration/usage problems, 3 for numerical failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Io(_)
        | Error::Dimension(_)
        | Error::Domain(_)
        | Error::Index(_)
        | Error::UnsupportedNorm(_)
        | Error::BudgetExceeded(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenMatrix(args) => gen_matrix(args),
        Command::Solve(args) => solve(args),
        Command::Tune(args) => tune(args),
        Command::NspOracle(args) => nsp_oracle(args),
        Command::Experiment(args) => experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
