//! Subcommand definitions and dispatch.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fracpois::experiments::{self, ExperimentReport, ReportFormat};
use fracpois::laplace::InversionConfig;
use fracpois::processes::{self, JumpDistribution, StableLawParams};
use fracpois::rates::RateFunction;
use fracpois::specfun::{self, EvalAccuracy};
use fracpois::subordinator::{
    build_limit_density_grid, InverseSamplingMethod, InverseSubordinatorLaw,
};
use fracpois::{RngStream, StabilityIndex};

/// A CLI failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

/// Maps library errors onto exit codes: domain/validation failures are
/// usage errors (2), runtime numerics are numerical errors (3).
trait IntoCli {
    fn into_cli(self) -> CliError;
}

impl IntoCli for fracpois::specfun::SpecFunError {
    fn into_cli(self) -> CliError {
        match self {
            Self::Domain(m) => CliError::Usage(m),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl IntoCli for fracpois::rates::RateError {
    fn into_cli(self) -> CliError {
        match self {
            Self::Domain(m) => CliError::Usage(m),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl IntoCli for fracpois::subordinator::SubordinatorError {
    fn into_cli(self) -> CliError {
        match self {
            Self::Domain(m) => CliError::Usage(m),
            Self::SpecFun(e) => e.into_cli(),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl IntoCli for fracpois::processes::ProcessError {
    fn into_cli(self) -> CliError {
        match self {
            Self::Domain(m) | Self::ConfigRejected(m) => CliError::Usage(m),
            Self::Subordinator(e) => e.into_cli(),
            Self::Rate(e) => e.into_cli(),
            Self::SpecFun(e) => e.into_cli(),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl IntoCli for fracpois::experiments::ExperimentError {
    fn into_cli(self) -> CliError {
        match self {
            Self::Domain(m) => CliError::Usage(m),
            Self::Process(e) => e.into_cli(),
            Self::Subordinator(e) => e.into_cli(),
            Self::Rate(e) => e.into_cli(),
            Self::SpecFun(e) => e.into_cli(),
            Self::Io { .. } => CliError::Io(self.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

macro_rules! numerical {
    ($e:expr) => {
        $e.map_err(IntoCli::into_cli)
    };
}

#[derive(Parser, Debug)]
#[command(
    name = "fracpois",
    about = "Fractional Poisson processes: evaluation, sampling and Monte Carlo experiments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a special function and print the value
    Eval(EvalArgs),
    /// Tabulate a density to CSV (header `x,h`)
    Density(DensityArgs),
    /// Draw samples (header `value`) or paths (header `event_time`) to CSV
    Sample(SampleArgs),
    /// Tabulate the FNPP marginal pmf to CSV (header `k,pmf`)
    Pmf(PmfArgs),
    /// Run a Monte Carlo experiment and emit a JSON/CSV report
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(subcommand)]
    what: EvalWhat,
}

#[derive(Subcommand, Debug)]
enum EvalWhat {
    /// Mittag-Leffler E_alpha(x) for x <= 0
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Waiting-time survival P(J > t) = E_alpha(-(lambda t)^alpha)
    MlSurvival {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        t: f64,
    },
    /// One-sided stable density g_alpha(z)
    StableDensity {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        z: f64,
    },
    /// Inverse-subordinator density h_alpha(t, x)
    H {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum, default_value_t = Route::Series)]
        route: Route,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Route {
    Series,
    Laplace,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(subcommand)]
    what: DensityWhat,
}

#[derive(Subcommand, Debug)]
enum DensityWhat {
    /// h_alpha(t, .) of the inverse stable subordinator
    InvSubordinator {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        t: f64,
        /// `auto` locates the 1-1e-6 quantile; a number fixes the cutoff
        #[arg(long, default_value = "auto")]
        xmax: String,
        #[arg(long, default_value_t = 512)]
        n_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density of ([Y_alpha(t)]^beta), the scaling-limit law
    Limit {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 512)]
        n_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(subcommand)]
    what: SampleWhat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SampleMethod {
    StableIdentity,
    DiscreteInversion,
}

#[derive(Subcommand, Debug)]
enum SampleWhat {
    /// L_alpha(1) draws
    Subordinator {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Y_alpha(t) draws
    InverseSubordinator {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SampleMethod::StableIdentity)]
        method: SampleMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// FNPP marginal counts N_alpha(t)
    Fnpp {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rate: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// FNPP marginal counts through the Gergely record construction
    Gergely {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rate: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compound FNPP marginals Z_alpha(t)
    Compound {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rate: String,
        #[arg(long)]
        jump: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// General stable variates S_alpha(sigma, beta, mu)
    Stable {
        #[arg(long)]
        alpha_s: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta_s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One homogeneous Poisson path
    PoissonPath {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One non-homogeneous Poisson path
    NhppPath {
        #[arg(long)]
        rate: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One FHPP path (Mittag-Leffler renewal)
    FhppPath {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One FNPP path on a discretized inverse subordinator
    FnppPath {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rate: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        grid_step: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PmfArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    rate: String,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 60)]
    k_max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(subcommand)]
    which: ExperimentWhich,
}

#[derive(Args, Debug, Clone)]
struct ExperimentCommon {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Worker threads for replica generation; the output is identical for
    /// any value
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Verdict threshold overrides as key=value (e.g. final_ks=0.05)
    #[arg(long, value_parser = parse_key_value)]
    threshold: Vec<(String, f64)>,
}

fn parse_key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not key=value"))?;
    let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.to_string(), v))
}

#[derive(Subcommand, Debug)]
enum ExperimentWhich {
    /// Martingale CLT of the compensated FNPP
    Clt {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rate: String,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[command(flatten)]
        common: ExperimentCommon,
    },
    /// Scaling limit N_alpha(t)/Lambda(t^alpha) vs ([Y_alpha(1)]^beta)
    Scaling {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rate: String,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[command(flatten)]
        common: ExperimentCommon,
    },
    /// Total-variation distance to Poisson(Lambda(t)) as alpha -> 1
    AlphaToOne {
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long)]
        rate: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 60)]
        k_max: u64,
        #[command(flatten)]
        common: ExperimentCommon,
    },
    /// Relative-stability exceedance profile of the FHPP
    Stability {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        epsilons: Vec<f64>,
        #[command(flatten)]
        common: ExperimentCommon,
    },
    /// Anscombe compound limit vs direct stable draws
    Anscombe {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        jump: String,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        common: ExperimentCommon,
    },
    /// Brownian-mixture limit of the FHPP fluctuation field
    BrownianMixture {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        common: ExperimentCommon,
    },
}

pub fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Eval(args) => run_eval(args),
        Command::Density(args) => run_density(args),
        Command::Sample(args) => run_sample(args),
        Command::Pmf(args) => run_pmf(args),
        Command::Experiment(args) => run_experiment(args),
    }
}

fn stability_index(alpha: f64) -> Result<StabilityIndex, CliError> {
    StabilityIndex::new(alpha).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_rate_spec(s: &str) -> Result<RateFunction, CliError> {
    s.parse::<RateFunction>()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Grammar: `gaussian:mean=<v>,sd=<v>` or `pareto:a=<v>,scale=<v>[,centered=<bool>]`.
fn parse_jump_spec(s: &str) -> Result<JumpDistribution, CliError> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("invalid jump spec `{s}`: expected kind:k=v,...")))?;
    let mut nums = BTreeMap::new();
    let mut centered = true;
    for part in rest.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("invalid jump spec `{s}`: `{part}` is not key=value"))
        })?;
        if k == "centered" {
            centered = v
                .parse::<bool>()
                .map_err(|_| CliError::Usage(format!("`{v}` is not a bool")))?;
        } else {
            let v: f64 = v
                .parse()
                .map_err(|_| CliError::Usage(format!("`{v}` is not a number")))?;
            nums.insert(k.to_string(), v);
        }
    }
    let get = |k: &str| {
        nums.get(k)
            .copied()
            .ok_or_else(|| CliError::Usage(format!("jump spec `{s}` is missing `{k}`")))
    };
    let jump = match kind {
        "gaussian" => JumpDistribution::gaussian(get("mean")?, get("sd")?),
        "pareto" => JumpDistribution::pareto(get("a")?, get("scale")?, centered),
        other => return Err(CliError::Usage(format!("unknown jump kind `{other}`"))),
    };
    jump.map_err(|e| CliError::Usage(e.to_string()))
}

fn write_output(path: Option<&PathBuf>, payload: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, payload)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{payload}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<(), CliError> {
    if values.into_iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numerical(
            "refusing to write non-finite values".into(),
        ));
    }
    Ok(())
}

fn values_csv(values: &[f64]) -> Result<String, CliError> {
    check_finite(values.iter().copied())?;
    let mut out = String::from("value\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    Ok(out)
}

fn path_csv(path: &fracpois::processes::SamplePath) -> Result<String, CliError> {
    check_finite(path.events().iter().copied())?;
    let mut buf = Vec::new();
    path.write_csv(&mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn run_eval(args: EvalArgs) -> Result<i32, CliError> {
    let acc = EvalAccuracy::default();
    let value = match args.what {
        EvalWhat::Ml { alpha, x } => numerical!(specfun::mittag_leffler(alpha, x, &acc))?,
        EvalWhat::MlSurvival { alpha, lambda, t } => {
            numerical!(specfun::ml_survival(alpha, lambda, t, &acc))?
        }
        EvalWhat::StableDensity { alpha, z } => {
            let alpha = stability_index(alpha)?;
            numerical!(specfun::stable_density_g(alpha, z, &acc))?
        }
        EvalWhat::H {
            alpha,
            t,
            x,
            route,
        } => {
            let law = numerical!(InverseSubordinatorLaw::new(stability_index(alpha)?, t))?;
            match route {
                Route::Series => numerical!(law.density(x))?,
                Route::Laplace => {
                    numerical!(law.density_via_laplace(x, &InversionConfig::default()))?
                }
            }
        }
    };
    check_finite([value])?;
    println!("{value}");
    Ok(0)
}

fn run_density(args: DensityArgs) -> Result<i32, CliError> {
    match args.what {
        DensityWhat::InvSubordinator {
            alpha,
            t,
            xmax,
            n_points,
            out,
        } => {
            let law = numerical!(InverseSubordinatorLaw::new(stability_index(alpha)?, t))?;
            let csv = if xmax == "auto" {
                let grid = numerical!(law.build_grid(n_points))?;
                grid.to_csv_string()
            } else {
                let x_hi: f64 = xmax
                    .parse()
                    .map_err(|_| CliError::Usage(format!("--xmax must be `auto` or a number, got `{xmax}`")))?;
                if !(x_hi > 0.0) || n_points < 2 {
                    return Err(CliError::Usage(
                        "--xmax must be positive and --n-points at least 2".into(),
                    ));
                }
                let mut csv = String::from("x,h\n");
                for i in 0..n_points {
                    let x = x_hi * i as f64 / (n_points - 1) as f64;
                    let h = if x == 0.0 {
                        law.density_at_zero()
                    } else {
                        numerical!(law.density(x))?
                    };
                    check_finite([h])?;
                    csv.push_str(&format!("{x:.16e},{h:.16e}\n"));
                }
                csv
            };
            write_output(out.as_ref(), &csv)?;
            Ok(0)
        }
        DensityWhat::Limit {
            alpha,
            beta,
            t,
            n_points,
            out,
        } => {
            let grid = numerical!(build_limit_density_grid(
                stability_index(alpha)?,
                beta,
                t,
                n_points
            ))?;
            write_output(out.as_ref(), &grid.to_csv_string())?;
            Ok(0)
        }
    }
}

fn run_sample(args: SampleArgs) -> Result<i32, CliError> {
    match args.what {
        SampleWhat::Subordinator {
            alpha,
            n,
            seed,
            out,
        } => {
            let alpha = stability_index(alpha)?;
            let mut rng = RngStream::new(seed, 0);
            let values: Vec<f64> = (0..n)
                .map(|_| fracpois::subordinator::sample_stable_subordinator(alpha, &mut rng))
                .collect();
            write_output(out.as_ref(), &values_csv(&values)?)?;
            Ok(0)
        }
        SampleWhat::InverseSubordinator {
            alpha,
            t,
            n,
            seed,
            method,
            out,
        } => {
            let law = numerical!(InverseSubordinatorLaw::new(stability_index(alpha)?, t))?;
            let mut rng = RngStream::new(seed, 0);
            let values = match method {
                SampleMethod::StableIdentity => (0..n)
                    .map(|_| law.sample(&mut rng, InverseSamplingMethod::StableIdentity))
                    .collect::<Result<Vec<_>, _>>(),
                SampleMethod::DiscreteInversion => {
                    // One tabulation, then n cheap inversions.
                    numerical!(law.build_grid(512)).map(|grid| {
                        let sampler = grid.sampler();
                        (0..n).map(|_| sampler.draw(&mut rng)).collect()
                    })
                }
            };
            let values = numerical!(values)?;
            write_output(out.as_ref(), &values_csv(&values)?)?;
            Ok(0)
        }
        SampleWhat::Fnpp {
            alpha,
            rate,
            t,
            n,
            seed,
            out,
        } => {
            let alpha = stability_index(alpha)?;
            let rf = parse_rate_spec(&rate)?;
            let mut rng = RngStream::new(seed, 0);
            let values: Vec<f64> = numerical!((0..n)
                .map(|_| {
                    processes::sample_fnpp_marginal(alpha, &rf, t, &mut rng).map(|c| c as f64)
                })
                .collect::<Result<Vec<_>, _>>())?;
            write_output(out.as_ref(), &values_csv(&values)?)?;
            Ok(0)
        }
        SampleWhat::Gergely {
            alpha,
            rate,
            t,
            n,
            seed,
            out,
        } => {
            let alpha = stability_index(alpha)?;
            let rf = parse_rate_spec(&rate)?;
            let sampler = numerical!(processes::GergelySampler::new(alpha, rf, t))?;
            let mut rng = RngStream::new(seed, 0);
            let values: Vec<f64> = numerical!((0..n)
                .map(|_| sampler.draw(&mut rng).map(|c| c as f64))
                .collect::<Result<Vec<_>, _>>())?;
            write_output(out.as_ref(), &values_csv(&values)?)?;
            Ok(0)
        }
        SampleWhat::Compound {
            alpha,
            rate,
            jump,
            t,
            n,
            seed,
            out,
        } => {
            let alpha = stability_index(alpha)?;
            let rf = parse_rate_spec(&rate)?;
            let jump = parse_jump_spec(&jump)?;
            let mut rng = RngStream::new(seed, 0);
            let values: Vec<f64> = numerical!((0..n)
                .map(|_| processes::sample_compound_marginal(alpha, &rf, &jump, t, &mut rng))
                .collect::<Result<Vec<_>, _>>())?;
            write_output(out.as_ref(), &values_csv(&values)?)?;
            Ok(0)
        }
        SampleWhat::Stable {
            alpha_s,
            sigma,
            beta_s,
            mu,
            n,
            seed,
            out,
        } => {
            let params = numerical!(StableLawParams::new(alpha_s, sigma, beta_s, mu))?;
            let mut rng = RngStream::new(seed, 0);
            let values: Vec<f64> = (0..n)
                .map(|_| processes::sample_stable(&params, &mut rng))
                .collect();
            write_output(out.as_ref(), &values_csv(&values)?)?;
            Ok(0)
        }
        SampleWhat::PoissonPath {
            lambda,
            horizon,
            seed,
            out,
        } => {
            let mut rng = RngStream::new(seed, 0);
            let path = numerical!(processes::sample_poisson_path(lambda, horizon, &mut rng))?;
            write_output(out.as_ref(), &path_csv(&path)?)?;
            Ok(0)
        }
        SampleWhat::NhppPath {
            rate,
            horizon,
            seed,
            out,
        } => {
            let rf = parse_rate_spec(&rate)?;
            let mut rng = RngStream::new(seed, 0);
            let path = numerical!(processes::sample_nhpp(&rf, horizon, &mut rng))?;
            write_output(out.as_ref(), &path_csv(&path)?)?;
            Ok(0)
        }
        SampleWhat::FhppPath {
            alpha,
            lambda,
            horizon,
            seed,
            out,
        } => {
            let alpha = stability_index(alpha)?;
            let mut rng = RngStream::new(seed, 0);
            let path =
                numerical!(processes::sample_fhpp_renewal(alpha, lambda, horizon, &mut rng))?;
            write_output(out.as_ref(), &path_csv(&path)?)?;
            Ok(0)
        }
        SampleWhat::FnppPath {
            alpha,
            rate,
            horizon,
            grid_step,
            seed,
            out,
        } => {
            let alpha = stability_index(alpha)?;
            let rf = parse_rate_spec(&rate)?;
            let mut rng = RngStream::new(seed, 0);
            let path = numerical!(processes::sample_fnpp_path(
                alpha, &rf, horizon, grid_step, &mut rng
            ))?;
            write_output(out.as_ref(), &path_csv(&path)?)?;
            Ok(0)
        }
    }
}

fn run_pmf(args: PmfArgs) -> Result<i32, CliError> {
    let alpha = stability_index(args.alpha)?;
    let rf = parse_rate_spec(&args.rate)?;
    let pmf = numerical!(processes::MarginalPmf::new(alpha, &rf, args.t))?;
    let mut csv = String::from("k,pmf\n");
    for k in 0..=args.k_max {
        let p = numerical!(pmf.pmf(k))?;
        check_finite([p])?;
        csv.push_str(&format!("{k},{p:.16e}\n"));
    }
    write_output(args.out.as_ref(), &csv)?;
    Ok(0)
}

fn run_experiment(args: ExperimentArgs) -> Result<i32, CliError> {
    let (report, common) = build_report(args)?;
    check_finite(report.float_values())?;
    let payload = match common.format {
        OutputFormat::Json => report.to_json_string(),
        OutputFormat::Csv => report.to_csv_string(),
    };
    write_output(common.out.as_ref(), &payload)?;
    Ok(if report.verdict.pass { 0 } else { 1 })
}

fn build_report(args: ExperimentArgs) -> Result<(ExperimentReport, ExperimentCommon), CliError> {
    let common = match &args.which {
        ExperimentWhich::Clt { common, .. }
        | ExperimentWhich::Scaling { common, .. }
        | ExperimentWhich::AlphaToOne { common, .. }
        | ExperimentWhich::Stability { common, .. }
        | ExperimentWhich::Anscombe { common, .. }
        | ExperimentWhich::BrownianMixture { common, .. } => common.clone(),
    };
    let overrides: BTreeMap<String, f64> = common.threshold.iter().cloned().collect();
    let threshold = |key: &str, default: f64| overrides.get(key).copied().unwrap_or(default);

    let run = || -> Result<ExperimentReport, CliError> {
        match args.which {
            ExperimentWhich::Clt {
                alpha,
                rate,
                times,
                ref common,
            } => {
                let report = numerical!(experiments::clt_experiment(
                    stability_index(alpha)?,
                    &parse_rate_spec(&rate)?,
                    &times,
                    common.n,
                    common.seed,
                    threshold("final_ks", experiments::DEFAULT_CLT_THRESHOLD),
                ))?;
                Ok(report)
            }
            ExperimentWhich::Scaling {
                alpha,
                rate,
                times,
                ref common,
            } => {
                let report = numerical!(experiments::scaling_experiment(
                    stability_index(alpha)?,
                    &parse_rate_spec(&rate)?,
                    &times,
                    common.n,
                    common.seed,
                    threshold("final_ks", experiments::DEFAULT_SCALING_THRESHOLD),
                ))?;
                Ok(report)
            }
            ExperimentWhich::AlphaToOne {
                alphas,
                rate,
                t,
                k_max,
                ref common,
            } => {
                let report = numerical!(experiments::alpha_to_one_experiment(
                    &alphas,
                    &parse_rate_spec(&rate)?,
                    t,
                    k_max,
                    common.seed,
                    threshold("final_tv", experiments::DEFAULT_ALPHA_TO_ONE_THRESHOLD),
                ))?;
                Ok(report)
            }
            ExperimentWhich::Stability {
                alpha,
                lambda,
                times,
                epsilons,
                ref common,
            } => {
                let report = numerical!(experiments::stability_experiment(
                    stability_index(alpha)?,
                    lambda,
                    &times,
                    &epsilons,
                    common.n,
                    common.seed,
                    threshold(
                        "max_final_exceedance",
                        experiments::DEFAULT_STABILITY_THRESHOLD
                    ),
                ))?;
                Ok(report)
            }
            ExperimentWhich::Anscombe {
                alpha,
                lambda,
                jump,
                t,
                ref common,
            } => {
                let jump = parse_jump_spec(&jump)?;
                let default = match jump {
                    JumpDistribution::Gaussian { .. } => {
                        experiments::DEFAULT_ANSCOMBE_GAUSSIAN_THRESHOLD
                    }
                    JumpDistribution::Pareto { .. } => {
                        experiments::DEFAULT_ANSCOMBE_PARETO_THRESHOLD
                    }
                };
                let report = numerical!(experiments::anscombe_experiment(
                    stability_index(alpha)?,
                    lambda,
                    &jump,
                    t,
                    common.n,
                    common.seed,
                    threshold("final_ks", default),
                ))?;
                Ok(report)
            }
            ExperimentWhich::BrownianMixture {
                alpha,
                lambdas,
                t,
                ref common,
            } => {
                let report = numerical!(experiments::brownian_mixture_experiment(
                    stability_index(alpha)?,
                    &lambdas,
                    t,
                    common.n,
                    common.seed,
                    threshold("final_ks", experiments::DEFAULT_BROWNIAN_THRESHOLD),
                ))?;
                Ok(report)
            }
        }
    };

    let report = match common.workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            pool.install(run)?
        }
        None => run()?,
    };
    Ok((report, common))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_spec_grammar() {
        assert!(matches!(
            parse_jump_spec("gaussian:mean=0,sd=1").unwrap(),
            JumpDistribution::Gaussian { .. }
        ));
        let p = parse_jump_spec("pareto:a=1.5,scale=1").unwrap();
        assert_eq!(p, JumpDistribution::pareto(1.5, 1.0, true).unwrap());
        let p = parse_jump_spec("pareto:a=0.8,scale=1,centered=false").unwrap();
        assert_eq!(p, JumpDistribution::pareto(0.8, 1.0, false).unwrap());
        assert!(parse_jump_spec("pareto:a=0.8,scale=1").is_err());
        assert!(parse_jump_spec("levy:a=1").is_err());
        assert!(parse_jump_spec("gaussian:mean=0").is_err());
    }
}
