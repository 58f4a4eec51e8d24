mod bound;
mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use frechet::bounds::alpha_constant;
use frechet::estimators::{stochastic_barycenter_approx, BoundKind};
use frechet::mclab::{run_error_experiment, ExperimentConfig, SummaryRow};
use frechet::spaces::{Euclidean, Hyperbolic, PointFormat, Spd, Sphere};
use frechet::{
    empirical_barycenter, enclosing_ball, iterated_barycenter, max_admissible_epsilon,
    validate_domain, ConvexDomainSpec, Execution, Method, SolverOptions, StepSchedule,
};

const THREADS_VAR: &str = "FRECHET_THREADS";

#[derive(Parser)]
#[command(name = "frechet", version, about = "Barycenters in curved metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the barycenter of a point file.
    Solve(SolveArgs),
    /// Approximate the barycenter of a point file by resampling.
    Approx(ApproxArgs),
    /// Evaluate a constant, bound or sample size.
    Bound(bound::BoundArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    Spd,
    Tree,
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long, value_enum)]
    space: SpaceKind,
    /// Curvature of the sphere (default 1) or hyperboloid (default -1).
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Intrinsic dimension (matrix size for spd); inferred from the file
    /// when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    points: PathBuf,
    /// Edge list `node_a,node_b,length` (tree only).
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Domain parameter for positive curvature.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Cyclic,
    Gradient,
    Iterated,
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Harmonic,
    /// `t_k = 2 / (alpha k + 2)`, requires `--epsilon`.
    CatKappa,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "harmonic")]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_rounds: usize,
    /// Gradient step size.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundArg {
    Hoeffding,
    Bernstein,
    Auto,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "auto")]
    bound: BoundArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Results CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Error carrying the exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn main() -> ExitCode {
    // Usage errors are input errors (exit 1); clap would use 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Approx(a) => cmd_approx(&a).map(|_| 0).map_err(Failure::from),
        Command::Bound(a) => bound::cmd_bound(&a).map(|_| 0).map_err(Failure::from),
        Command::Experiment(a) => cmd_experiment(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

/// Reads the point file once to learn its column count.
fn infer_columns(path: &Path) -> Result<usize> {
    Ok(io::read_rows(path)?[0].1.len())
}

fn build_space<R>(args: &SpaceArgs, f: impl SpaceVisitor<Output = R>) -> Result<R> {
    let kappa = args.kappa;
    let flat_kappa = |name: &str| -> Result<()> {
        match kappa {
            Some(k) if k != 0.0 => bail!("--kappa {k} does not apply: the {name} uses the curvature bound 0"),
            _ => Ok(()),
        }
    };
    if args.space != SpaceKind::Tree && args.edges.is_some() {
        bail!("--edges is only used with --space tree");
    }
    match args.space {
        SpaceKind::Euclidean => {
            flat_kappa("euclidean space")?;
            let dim = match args.dim {
                Some(d) => d,
                None => infer_columns(&args.points)?,
            };
            f.visit(&Euclidean::new(dim)?, args)
        }
        SpaceKind::Sphere => {
            let dim = match args.dim {
                Some(d) => d,
                None => infer_columns(&args.points)?.saturating_sub(1),
            };
            f.visit(&Sphere::new(dim, kappa.unwrap_or(1.0))?, args)
        }
        SpaceKind::Hyperbolic => {
            let dim = match args.dim {
                Some(d) => d,
                None => infer_columns(&args.points)?.saturating_sub(1),
            };
            f.visit(&Hyperbolic::new(dim, kappa.unwrap_or(-1.0))?, args)
        }
        SpaceKind::Spd => {
            flat_kappa("SPD manifold")?;
            let dim = match args.dim {
                Some(d) => d,
                None => {
                    let c = infer_columns(&args.points)?;
                    let d = (c as f64).sqrt().round() as usize;
                    if d * d != c {
                        bail!("{} columns is not a square matrix size", c);
                    }
                    d
                }
            };
            f.visit(&Spd::new(dim)?, args)
        }
        SpaceKind::Tree => {
            flat_kappa("metric tree")?;
            let edges = args
                .edges
                .as_ref()
                .ok_or_else(|| anyhow!("--space tree requires --edges FILE"))?;
            f.visit(&io::read_tree(edges)?, args)
        }
    }
}

/// Code generic over the concrete space chosen at run time.
trait SpaceVisitor {
    type Output;
    fn visit<S: PointFormat + 'static>(self, space: &S, args: &SpaceArgs) -> Result<Self::Output>;
}

/// Validates the convex-domain hypothesis for positive curvature and returns
/// the epsilon in force.
fn check_domain<S: PointFormat>(space: &S, points: &[S::Point], epsilon: Option<f64>) -> Result<Option<f64>> {
    let geom = space.geometry();
    if geom.kappa <= 0.0 {
        return Ok(epsilon);
    }
    let (center, radius) = enclosing_ball(space, points, 1000)?;
    let epsilon = match epsilon {
        Some(e) => e,
        None => {
            let e = max_admissible_epsilon(geom.kappa, radius).ok_or_else(|| {
                anyhow!(
                    "the points do not fit a convex domain: enclosing radius {radius} leaves no admissible epsilon"
                )
            })?;
            eprintln!("derived epsilon = {e} (enclosing radius {radius})");
            e
        }
    };
    let spec = ConvexDomainSpec {
        center,
        radius,
        epsilon: Some(epsilon),
    };
    validate_domain(&spec, &geom)
        .into_result()
        .with_context(|| format!("enclosing radius {radius}, epsilon {epsilon}"))?;
    Ok(Some(epsilon))
}

struct Solve<'a>(&'a SolveArgs);

impl SpaceVisitor for Solve<'_> {
    type Output = u8;

    fn visit<S: PointFormat + 'static>(self, space: &S, sargs: &SpaceArgs) -> Result<u8> {
        let a = self.0;
        let points = io::read_points(space, &sargs.points)?;
        let epsilon = check_domain(space, &points, sargs.epsilon)?;
        let opts = SolverOptions {
            tol: a.tol,
            max_rounds: a.max_rounds,
            step: a.step,
        };
        let report = match a.method {
            MethodArg::Iterated => {
                let schedule = match a.schedule {
                    ScheduleArg::Harmonic => StepSchedule::Harmonic,
                    ScheduleArg::CatKappa => {
                        let kappa = space.geometry().kappa;
                        let eps = match (kappa > 0.0, epsilon) {
                            (false, _) => f64::NAN,
                            (true, Some(e)) => e,
                            (true, None) => bail!("--schedule cat-kappa requires --epsilon"),
                        };
                        StepSchedule::positive_curvature(alpha_constant(kappa, eps)?)?
                    }
                };
                iterated_barycenter(space, &points, &schedule)?
            }
            m => {
                if m == MethodArg::Cyclic && !space.is_smooth() {
                    eprintln!("warning: cyclic passes can stall away from the minimizer on trees; --method exact solves them exactly");
                }
                let method = match m {
                    MethodArg::Exact => Method::Exact,
                    MethodArg::Cyclic => Method::Cyclic,
                    MethodArg::Gradient => Method::Gradient,
                    _ => Method::Auto,
                };
                empirical_barycenter(space, &points, method, &opts)?
            }
        };
        eprintln!("method: {:?}", report.method);
        eprintln!("iterations: {}", report.iterations);
        eprintln!("movement: {}", report.movement);
        io::write_point(space, &report.result, a.out.as_deref())?;
        if report.converged {
            Ok(0)
        } else {
            eprintln!("warning: not converged within {} rounds", a.max_rounds);
            Ok(2)
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, Failure> {
    Ok(build_space(&a.space, Solve(a))?)
}

struct Approx<'a>(&'a ApproxArgs, u64);

impl SpaceVisitor for Approx<'_> {
    type Output = ();

    fn visit<S: PointFormat + 'static>(self, space: &S, sargs: &SpaceArgs) -> Result<()> {
        let (a, seed) = (self.0, self.1);
        let points = io::read_points(space, &sargs.points)?;
        let kind = match a.bound {
            BoundArg::Hoeffding => BoundKind::Hoeffding,
            BoundArg::Bernstein => BoundKind::Bernstein,
            BoundArg::Auto => BoundKind::Auto,
        };
        let (p, budget) = stochastic_barycenter_approx(space, &points, a.eps, a.delta, kind, seed)?;
        println!("m = {}", budget.m);
        println!("D = {}", budget.d);
        println!("sigma_tilde2 = {}", budget.sigma_tilde2);
        let corollary = match budget.bound_kind {
            BoundKind::Bernstein => "bernstein (m >= 16/3 max(sigma~^2/eps^2, D/eps) max(1, log 1/delta))",
            _ => "hoeffding (m >= 4 D^2/eps^2 max(1, log 1/delta))",
        };
        println!("budget = {corollary}");
        match &a.out {
            Some(path) => io::write_point(space, &p, Some(path)),
            None => {
                println!("point = {}", io::format_row(&space.point_to_row(&p)));
                Ok(())
            }
        }
    }
}

fn cmd_approx(a: &ApproxArgs) -> Result<()> {
    let seed = a
        .seed
        .ok_or_else(|| anyhow!("--seed is required for approx"))?;
    build_space(&a.space, Approx(a, seed))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        anyhow!("{}: at `{at}`: {}", path.display(), e.into_inner())
    })?;
    cfg.validate()
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(cfg)
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<u8, Failure> {
    let cfg = load_config(&a.config)?;
    let seed = a
        .seed
        .ok_or_else(|| anyhow!("--seed is required for experiment"))?;
    let exec = Execution::from_env(THREADS_VAR);
    let outcome = run_error_experiment(&cfg, Some(seed), exec).map_err(anyhow::Error::from)?;
    let out = io::output(a.out.as_deref())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SummaryRow::CSV_HEADER).map_err(anyhow::Error::from)?;
    for row in &outcome.rows {
        w.write_record(row.to_record()).map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;
    let summary = outcome.summary();
    if a.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    if outcome.all_passed() {
        Ok(0)
    } else {
        Err(Failure {
            code: 2,
            error: anyhow!("{} of {} checks failed", outcome.checks.iter().filter(|c| !c.passed).count(), outcome.checks.len()),
        })
    }
}
