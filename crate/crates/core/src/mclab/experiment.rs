//! Replicate sweeps over a sample-size grid, compared against the bounds.

use std::fmt;

use nalgebra::DVector;
use rand::Rng;
use serde::Deserialize;

use crate::bounds::{
    empirical_expectation_bound, empirical_tail_bound, iterated_expectation_bound,
    iterated_tail_bound_cat0, alpha_constant, BoundQuery, FirstTerm, TailFlavor,
};
use crate::error::{Error, Result};
use crate::estimators::{parallel_barycenter, stochastic_barycenter_approx, BatchPlan, BoundKind};
use crate::exec::Execution;
use crate::geometry::{validate_domain, ConvexDomainSpec, GeodesicSpace, TangentVector};
use crate::mclab::samplers::{
    estimate_total_variance, FixedList, Gaussian, HeteroCaps, Sampler, Symmetrized, TreeLeaves,
    TwoPoint, UniformCap,
};
use crate::mclab::stats;
use crate::rng::{self, StreamRng, VARIANCE_STREAM};
use crate::solvers::{empirical_barycenter, iterated_barycenter, Method, SolverOptions, StepSchedule};
use crate::spaces::{build_figure1_tree, Euclidean, Hyperbolic, MetricTree, PointFormat, Spd, Sphere};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Euclidean {
        dim: usize,
    },
    Sphere {
        dim: usize,
        #[serde(default = "one")]
        kappa: f64,
    },
    Hyperbolic {
        dim: usize,
        #[serde(default = "minus_one")]
        kappa: f64,
    },
    Spd {
        dim: usize,
    },
    Tree {
        /// `[a, b, length]` triples.
        edges: Vec<(usize, usize, f64)>,
    },
    /// Three-arm star whose point list is `p` copies of each leaf.
    Figure1 {
        p: usize,
        #[serde(default = "unit_arms")]
        arms: [f64; 3],
    },
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

fn unit_arms() -> [f64; 3] {
    [1.0; 3]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerConfig {
    UniformCap {
        radius: f64,
    },
    TwoPoint {
        radius: f64,
        /// Tangent direction at the center in the space's ambient
        /// coordinates; defaults to the first tangent basis vector.
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    Gaussian {
        scale: f64,
    },
    HeteroCaps {
        radii: Vec<f64>,
    },
    /// Categorical law on the leaves of a tree space.
    TreeLeaves {
        weights: Vec<f64>,
    },
    /// The fixed point list of a `figure1` space.
    Figure1,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorConfig {
    Empirical,
    Iterated,
    Parallel {
        batches: usize,
    },
    StochasticApprox {
        eps: f64,
        delta: f64,
        #[serde(default = "auto_bound")]
        bound: BoundChoice,
    },
}

fn auto_bound() -> BoundChoice {
    BoundChoice::Auto
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundChoice {
    Hoeffding,
    Bernstein,
    Auto,
}

impl From<BoundChoice> for BoundKind {
    fn from(b: BoundChoice) -> Self {
        match b {
            BoundChoice::Hoeffding => BoundKind::Hoeffding,
            BoundChoice::Bernstein => BoundKind::Bernstein,
            BoundChoice::Auto => BoundKind::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleConfig {
    #[default]
    Harmonic,
    PositiveCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodConfig {
    Exact,
    Cyclic,
    Gradient,
    #[default]
    Auto,
}

impl From<MethodConfig> for Method {
    fn from(m: MethodConfig) -> Self {
        match m {
            MethodConfig::Exact => Method::Exact,
            MethodConfig::Cyclic => Method::Cyclic,
            MethodConfig::Gradient => Method::Gradient,
            MethodConfig::Auto => Method::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TailConfig {
    SubGaussian,
    #[default]
    Hoeffding,
    Bernstein,
}

impl From<TailConfig> for TailFlavor {
    fn from(t: TailConfig) -> Self {
        match t {
            TailConfig::SubGaussian => TailFlavor::SubGaussian,
            TailConfig::Hoeffding => TailFlavor::Hoeffding,
            TailConfig::Bernstein => TailFlavor::Bernstein,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Mean squared error within the expectation bound (3 standard errors).
    Expectation,
    /// Exceedance of the tail bound within `delta + 3 sqrt(delta (1 - delta) / R)`.
    Tail,
    /// Log-log slope of the mean squared error in `[-1.15, -0.85]`.
    Rate,
    /// Mean squared error equal to `sigma^2 / n` within 3 standard errors.
    VarianceEquality,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Expectation => "expectation",
            CheckKind::Tail => "tail",
            CheckKind::Rate => "rate",
            CheckKind::VarianceEquality => "variance_equality",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub radius: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

fn default_delta() -> f64 {
    0.1
}

fn default_mc_draws() -> usize {
    100_000
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub space: SpaceConfig,
    pub sampler: SamplerConfig,
    /// Center in the space's point-row format; defaults to the space's base
    /// point (the root for trees, the barycenter of the list for `figure1`).
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub tail: TailConfig,
    #[serde(default)]
    pub strict_paper: bool,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_mc_draws")]
    pub sigma2_mc_draws: usize,
}

impl ExperimentConfig {
    /// Structural checks that do not need the space.
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::param("n_grid", "must not be empty"));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::param("n_grid", "sample sizes must be at least 1"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("n_grid", "must be strictly ascending"));
        }
        if self.replicates == 0 {
            return Err(Error::param("replicates", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", "must lie in (0, 1)"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.sigma2_mc_draws == 0 {
            return Err(Error::param("sigma2_mc_draws", "must be at least 1"));
        }
        if let EstimatorConfig::Parallel { batches } = self.estimator {
            if let Some(n) = self.n_grid.iter().find(|n| batches == 0 || *n % batches != 0) {
                return Err(Error::param(
                    "estimator.batches",
                    format!("{batches} batches do not divide n = {n}"),
                ));
            }
        }
        if let EstimatorConfig::StochasticApprox { eps, delta, .. } = self.estimator {
            if !(eps > 0.0) {
                return Err(Error::param("estimator.eps", "must be positive"));
            }
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::param("estimator.delta", "must lie in (0, 1)"));
            }
        }
        if self.checks.contains(&CheckKind::Rate) && self.n_grid.len() < 2 {
            return Err(Error::param("checks", "the rate check needs at least two grid points"));
        }
        Ok(())
    }

    fn space_label(&self) -> &'static str {
        match self.space {
            SpaceConfig::Euclidean { .. } => "euclidean",
            SpaceConfig::Sphere { .. } => "sphere",
            SpaceConfig::Hyperbolic { .. } => "hyperbolic",
            SpaceConfig::Spd { .. } => "spd",
            SpaceConfig::Tree { .. } | SpaceConfig::Figure1 { .. } => "tree",
        }
    }

    fn estimator_label(&self) -> String {
        match self.estimator {
            EstimatorConfig::Empirical => "empirical".into(),
            EstimatorConfig::Iterated => match self.schedule {
                ScheduleConfig::Harmonic => "iterated".into(),
                ScheduleConfig::PositiveCurvature => "iterated_pc".into(),
            },
            EstimatorConfig::Parallel { batches } => format!("parallel_{batches}"),
            EstimatorConfig::StochasticApprox { bound, .. } => {
                format!("stochastic_approx_{}", BoundKind::from(bound))
            }
        }
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment_id: String,
    pub space: String,
    pub kappa: f64,
    /// NaN when the domain has no epsilon.
    pub epsilon: f64,
    pub estimator: String,
    pub n: usize,
    pub replicates: usize,
    pub mse: f64,
    pub mse_stderr: f64,
    /// Quantiles of the error distance `d(estimate, b*)`.
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    /// NaN when no bound applies to the estimator.
    pub exp_bound: f64,
    pub tail_bound: f64,
    pub delta: f64,
    pub exceedance: f64,
    pub flags: usize,
    pub seed: u64,
}

impl SummaryRow {
    pub const CSV_HEADER: [&'static str; 18] = [
        "experiment_id",
        "space",
        "kappa",
        "epsilon",
        "estimator",
        "n",
        "replicates",
        "mse",
        "mse_stderr",
        "q50",
        "q90",
        "q99",
        "exp_bound",
        "tail_bound",
        "delta",
        "exceedance",
        "flags",
        "seed",
    ];

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.experiment_id.clone(),
            self.space.clone(),
            self.kappa.to_string(),
            self.epsilon.to_string(),
            self.estimator.clone(),
            self.n.to_string(),
            self.replicates.to_string(),
            self.mse.to_string(),
            self.mse_stderr.to_string(),
            self.q50.to_string(),
            self.q90.to_string(),
            self.q99.to_string(),
            self.exp_bound.to_string(),
            self.tail_bound.to_string(),
            self.delta.to_string(),
            self.exceedance.to_string(),
            self.flags.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub rows: Vec<SummaryRow>,
    pub checks: Vec<CheckResult>,
    /// Total variance used for the bounds (exact, or the MC estimate).
    pub sigma2_hat: f64,
    pub sigma2_stderr: f64,
    pub sigma2_exact: bool,
}

impl ExperimentOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Human-readable report.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let sigma = if self.sigma2_exact {
            format!("sigma2 = {} (exact)", self.sigma2_hat)
        } else {
            format!("sigma2_hat = {} (stderr {})", self.sigma2_hat, self.sigma2_stderr)
        };
        out.push_str(&sigma);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "n = {:>6}  mse = {:.6e} +- {:.2e}  exp_bound = {:.6e}  tail_bound = {:.6e}  exceedance = {:.4}  flags = {}\n",
                r.n, r.mse, r.mse_stderr, r.exp_bound, r.tail_bound, r.exceedance, r.flags
            ));
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {}: {}\n", c.kind, c.detail));
        }
        out
    }
}

/// Tail-coverage verdict: the fraction of errors above `bound`, accepted up
/// to `delta + 3 sqrt(delta (1 - delta) / R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub exceedance: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub fn check_tail_coverage(errors: &[f64], bound: f64, delta: f64) -> CoverageReport {
    let r = errors.len() as f64;
    let exceed = errors.iter().filter(|&&e| e > bound).count() as f64 / r;
    let threshold = delta + 3.0 * (delta * (1.0 - delta) / r).sqrt();
    CoverageReport {
        exceedance: exceed,
        threshold,
        passed: exceed <= threshold,
    }
}

/// Estimator with its solver settings.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorPlan {
    Empirical { method: Method, opts: SolverOptions },
    Iterated { schedule: StepSchedule },
    Parallel { batches: usize, method: Method, opts: SolverOptions },
    /// Error is measured against the empirical barycenter of the sample.
    StochasticApprox { eps: f64, delta: f64, kind: BoundKind, method: Method, opts: SolverOptions },
}

/// Error of one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateError {
    pub distance: f64,
    pub flags: usize,
}

/// Draws `n` points; draw `i` uses index `i`.
pub fn draw_sample<S, T>(space: &S, sampler: &T, n: usize, rng: &mut StreamRng) -> Result<Vec<S::Point>>
where
    S: GeodesicSpace,
    T: Sampler<S> + ?Sized,
{
    (0..n).map(|i| sampler.sample(space, i, rng)).collect()
}

/// Runs the estimator on a fresh sample of size `n`.
pub fn run_replicate<S, T>(
    space: &S,
    sampler: &T,
    plan: &EstimatorPlan,
    n: usize,
    rng: &mut StreamRng,
) -> Result<ReplicateError>
where
    S: GeodesicSpace,
    T: Sampler<S> + ?Sized,
{
    let sample = draw_sample(space, sampler, n, rng)?;
    let b_star = sampler.center();
    let (estimate, flags, target) = match plan {
        EstimatorPlan::Empirical { method, opts } => {
            let r = empirical_barycenter(space, &sample, *method, opts)?;
            (r.result, usize::from(!r.converged), None)
        }
        EstimatorPlan::Iterated { schedule } => (iterated_barycenter(space, &sample, schedule)?.result, 0, None),
        EstimatorPlan::Parallel { batches, method, opts } => {
            let plan = BatchPlan::for_samples(n, *batches)?;
            let r = parallel_barycenter(space, &sample, plan, *method, opts, Execution::Sequential)?;
            (r.result, r.flags, None)
        }
        EstimatorPlan::StochasticApprox { eps, delta, kind, method, opts } => {
            let target = empirical_barycenter(space, &sample, *method, opts)?;
            let seed: u64 = rng.random();
            let (approx, _) = stochastic_barycenter_approx(space, &sample, *eps, *delta, *kind, seed)?;
            (approx, usize::from(!target.converged), Some(target.result))
        }
    };
    let distance = space.distance(&estimate, target.as_ref().unwrap_or(b_star))?;
    Ok(ReplicateError { distance, flags })
}

/// `replicates` independent errors at sample size `n`; replicate `r` uses the
/// stream `(seed, replicate_stream_id(n_index, r))`.
pub fn replicate_errors<S, T>(
    space: &S,
    sampler: &T,
    plan: &EstimatorPlan,
    n: usize,
    n_index: usize,
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ReplicateError>>
where
    S: GeodesicSpace,
    T: Sampler<S> + ?Sized,
{
    exec.try_map_indexed(replicates, |r| {
        let mut g = rng::stream(seed, rng::replicate_stream_id(n_index, r));
        run_replicate(space, sampler, plan, n, &mut g)
    })
}

fn parse_center<S: PointFormat>(space: &S, row: &Option<Vec<f64>>, default: S::Point) -> Result<S::Point> {
    match row {
        None => Ok(default),
        Some(r) => space
            .point_from_row(r)
            .map_err(|e| Error::param("center", e.to_string())),
    }
}

fn mismatch(sampler: &SamplerConfig, space: &str) -> Error {
    Error::param("sampler", format!("{sampler:?} is not available on a {space}"))
}

/// Samplers available on every space that supports the needed operations.
fn generic_sampler<S>(space: &S, cfg: &SamplerConfig, center: S::Point) -> Result<Box<dyn Sampler<S>>>
where
    S: GeodesicSpace + 'static,
    S::Point: 'static,
{
    Ok(match cfg {
        SamplerConfig::UniformCap { radius } => Box::new(UniformCap::new(space, center, *radius)?),
        SamplerConfig::HeteroCaps { radii } => Box::new(HeteroCaps::new(space, center, radii)?),
        SamplerConfig::Gaussian { scale } => Box::new(Gaussian::new(space, center, *scale)?),
        SamplerConfig::TwoPoint { radius, direction } => {
            let dir = match direction {
                Some(d) => TangentVector::new(center.clone(), DVector::from_column_slice(d)),
                None => space
                    .tangent_basis(&center)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| space.unsupported("two-point sampling"))?,
            };
            Box::new(TwoPoint::new(space, center, &dir, *radius)?)
        }
        other => return Err(mismatch(other, space.name())),
    })
}

/// Runs a validated config. `seed` overrides the config's seed.
pub fn run_error_experiment(cfg: &ExperimentConfig, seed: Option<u64>, exec: Execution) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let seed = seed
        .or(cfg.seed)
        .ok_or(Error::MissingField("seed"))?;
    match &cfg.space {
        SpaceConfig::Euclidean { dim } => {
            let s = Euclidean::new(*dim)?;
            let c = parse_center(&s, &cfg.center, s.base_point())?;
            let sampler = generic_sampler(&s, &cfg.sampler, c)?;
            run_with(&s, sampler.as_ref(), cfg, seed, exec)
        }
        SpaceConfig::Sphere { dim, kappa } => {
            let s = Sphere::new(*dim, *kappa)?;
            let c = parse_center(&s, &cfg.center, s.base_point())?;
            let sampler = generic_sampler(&s, &cfg.sampler, c)?;
            run_with(&s, sampler.as_ref(), cfg, seed, exec)
        }
        SpaceConfig::Hyperbolic { dim, kappa } => {
            let s = Hyperbolic::new(*dim, *kappa)?;
            let c = parse_center(&s, &cfg.center, s.base_point())?;
            let sampler = generic_sampler(&s, &cfg.sampler, c)?;
            run_with(&s, sampler.as_ref(), cfg, seed, exec)
        }
        SpaceConfig::Spd { dim } => {
            let s = Spd::new(*dim)?;
            let c = parse_center(&s, &cfg.center, s.base_point())?;
            let sampler = generic_sampler(&s, &cfg.sampler, c)?;
            run_with(&s, sampler.as_ref(), cfg, seed, exec)
        }
        SpaceConfig::Tree { edges } => {
            let t = MetricTree::new(edges)?;
            let sampler: Box<dyn Sampler<MetricTree>> = match &cfg.sampler {
                SamplerConfig::TreeLeaves { weights } => {
                    if cfg.center.is_some() {
                        return Err(Error::param("center", "the center of a leaf law is its barycenter"));
                    }
                    Box::new(TreeLeaves::on_leaves(&t, weights)?)
                }
                other => return Err(mismatch(other, "metric tree")),
            };
            run_with(&t, sampler.as_ref(), cfg, seed, exec)
        }
        SpaceConfig::Figure1 { p, arms } => {
            let (t, pts) = build_figure1_tree(*p, *arms)?;
            let sampler: Box<dyn Sampler<MetricTree>> = match &cfg.sampler {
                SamplerConfig::Figure1 => {
                    let center = t.exact_barycenter(&pts, &vec![1.0; pts.len()])?;
                    Box::new(FixedList::new(&t, pts, center)?)
                }
                SamplerConfig::TreeLeaves { weights } => Box::new(TreeLeaves::on_leaves(&t, weights)?),
                other => return Err(mismatch(other, "metric tree")),
            };
            run_with(&t, sampler.as_ref(), cfg, seed, exec)
        }
    }
}

/// Symmetrizes `base` about `p` and boxes it; convenience for callers
/// assembling laws by hand.
pub fn boxed_symmetrized<S, B>(p: S::Point, base: B) -> Box<dyn Sampler<S>>
where
    S: GeodesicSpace + 'static,
    B: Sampler<S> + 'static,
{
    Box::new(Symmetrized::new(p, base))
}

/// Runs a config on an explicit space and sampler.
pub fn run_with<S, T>(
    space: &S,
    sampler: &T,
    cfg: &ExperimentConfig,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentOutcome>
where
    S: GeodesicSpace,
    T: Sampler<S> + ?Sized,
{
    cfg.validate()?;
    let geom = space.geometry();
    let kappa = geom.kappa;
    let epsilon = cfg.domain.and_then(|d| d.epsilon);

    if let Some(d) = cfg.domain {
        let spec = ConvexDomainSpec {
            center: sampler.center().clone(),
            radius: d.radius,
            epsilon,
        };
        validate_domain(&spec, &geom).into_result()?;
    } else if kappa > 0.0 {
        return Err(Error::MissingField("domain"));
    }
    if kappa > 0.0 || cfg.domain.is_some() {
        let limit = cfg.domain.map(|d| d.radius).unwrap_or(f64::INFINITY);
        match sampler.support_radius() {
            Some(r) if r <= limit * (1.0 + 1e-12) => {}
            Some(r) => {
                return Err(Error::InvalidDomain(format!(
                    "sampler support radius {r} exceeds the domain radius {limit}"
                )))
            }
            None => return Err(Error::InvalidDomain("sampler support is unbounded".into())),
        }
    }

    let opts = SolverOptions::with_tol(cfg.tol);
    let method = Method::from(cfg.method);
    let schedule = match cfg.schedule {
        ScheduleConfig::Harmonic => StepSchedule::Harmonic,
        ScheduleConfig::PositiveCurvature => {
            let eps = epsilon.ok_or(Error::MissingField("domain.epsilon"))?;
            StepSchedule::positive_curvature(alpha_constant(kappa, eps)?)?
        }
    };
    let plan = match cfg.estimator {
        EstimatorConfig::Empirical => EstimatorPlan::Empirical { method, opts },
        EstimatorConfig::Iterated => EstimatorPlan::Iterated { schedule: schedule.clone() },
        EstimatorConfig::Parallel { batches } => EstimatorPlan::Parallel { batches, method, opts },
        EstimatorConfig::StochasticApprox { eps, delta, bound } => EstimatorPlan::StochasticApprox {
            eps,
            delta,
            kind: bound.into(),
            method,
            opts,
        },
    };

    let (sigma2_hat, sigma2_stderr, sigma2_exact) = match sampler.total_variance() {
        Some(v) if !sampler.heteroskedastic() => (v, 0.0, true),
        _ => {
            let mut g = rng::stream(seed, VARIANCE_STREAM);
            let (m, se) = estimate_total_variance(space, sampler, sampler.center(), cfg.sigma2_mc_draws, &mut g)?;
            (m, se, false)
        }
    };
    let sigma2_bound = sigma2_hat + 3.0 * sigma2_stderr;

    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    let mut coverage = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let errs = replicate_errors(space, sampler, &plan, n, ni, cfg.replicates, seed, exec)?;
        let dist: Vec<f64> = errs.iter().map(|e| e.distance).collect();
        let sq: Vec<f64> = dist.iter().map(|d| d * d).collect();
        let flags = errs.iter().map(|e| e.flags).sum();
        let q = stats::quantiles(&dist, &[0.5, 0.9, 0.99]);

        let mut query = BoundQuery::new(n, kappa)
            .sigma2(sigma2_bound)
            .delta(cfg.delta)
            .heteroskedastic(sampler.heteroskedastic());
        if let Some(e) = epsilon {
            query = query.epsilon(e);
        }
        if let Some(r) = sampler.support_radius() {
            query = query.radius(r);
        }
        if let Some(k2) = sampler.subgaussian_k2() {
            query = query.k2(k2);
        }
        let flavor = TailFlavor::from(cfg.tail);
        let first = if cfg.strict_paper { FirstTerm::StrictPaper } else { FirstTerm::Radical };
        let (exp_bound, tail_bound, delta) = match (&plan, cfg.schedule) {
            (EstimatorPlan::Empirical { .. }, _) => (
                empirical_expectation_bound(&query).unwrap_or(f64::NAN),
                empirical_tail_bound(&query, flavor, first).unwrap_or(f64::NAN),
                cfg.delta,
            ),
            (EstimatorPlan::Iterated { .. }, ScheduleConfig::Harmonic) if kappa <= 0.0 => (
                iterated_expectation_bound(&query).unwrap_or(f64::NAN),
                iterated_tail_bound_cat0(&query, flavor).unwrap_or(f64::NAN),
                cfg.delta,
            ),
            (EstimatorPlan::Iterated { .. }, ScheduleConfig::PositiveCurvature) if kappa > 0.0 => {
                (iterated_expectation_bound(&query).unwrap_or(f64::NAN), f64::NAN, cfg.delta)
            }
            (EstimatorPlan::StochasticApprox { eps, delta, .. }, _) => (f64::NAN, *eps, *delta),
            _ => (f64::NAN, f64::NAN, cfg.delta),
        };
        let cov = if tail_bound.is_nan() {
            None
        } else {
            Some(check_tail_coverage(&dist, tail_bound, delta))
        };
        coverage.push(cov);
        rows.push(SummaryRow {
            experiment_id: cfg.experiment_id.clone(),
            space: cfg.space_label().to_string(),
            kappa,
            epsilon: epsilon.unwrap_or(f64::NAN),
            estimator: cfg.estimator_label(),
            n,
            replicates: cfg.replicates,
            mse: stats::mean(&sq),
            mse_stderr: stats::stderr(&sq),
            q50: q[0],
            q90: q[1],
            q99: q[2],
            exp_bound,
            tail_bound,
            delta,
            exceedance: cov.map_or(f64::NAN, |c| c.exceedance),
            flags,
            seed,
        });
    }

    let checks = cfg
        .checks
        .iter()
        .map(|&kind| evaluate_check(kind, &rows, &coverage, sigma2_hat, sigma2_stderr))
        .collect();
    Ok(ExperimentOutcome {
        rows,
        checks,
        sigma2_hat,
        sigma2_stderr,
        sigma2_exact,
    })
}

fn evaluate_check(
    kind: CheckKind,
    rows: &[SummaryRow],
    coverage: &[Option<CoverageReport>],
    sigma2: f64,
    sigma2_stderr: f64,
) -> CheckResult {
    let mut failures = Vec::new();
    let detail;
    match kind {
        CheckKind::Expectation => {
            for r in rows {
                if r.exp_bound.is_nan() {
                    failures.push(format!("n = {}: no expectation bound for this estimator", r.n));
                } else if r.mse > r.exp_bound + 3.0 * r.mse_stderr {
                    failures.push(format!("n = {}: mse {} > bound {} + 3 se", r.n, r.mse, r.exp_bound));
                }
            }
            let worst = rows
                .iter()
                .map(|r| r.mse / r.exp_bound)
                .fold(f64::NAN, f64::max);
            detail = format!("max mse/bound ratio {worst:.4}");
        }
        CheckKind::Tail => {
            for (r, c) in rows.iter().zip(coverage) {
                match c {
                    None => failures.push(format!("n = {}: no tail bound for this estimator", r.n)),
                    Some(c) if !c.passed => failures.push(format!(
                        "n = {}: exceedance {} > {}",
                        r.n, c.exceedance, c.threshold
                    )),
                    Some(_) => {}
                }
            }
            let worst = coverage
                .iter()
                .flatten()
                .map(|c| c.exceedance)
                .fold(f64::NAN, f64::max);
            detail = format!("max exceedance {worst:.4} at delta {}", rows[0].delta);
        }
        CheckKind::Rate => {
            let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.mse.ln()).collect();
            let slope = stats::ols_slope(&x, &y);
            if !(-1.15..=-0.85).contains(&slope) {
                failures.push(format!("slope {slope} outside [-1.15, -0.85]"));
            }
            detail = format!("log-log slope {slope:.4}");
        }
        CheckKind::VarianceEquality => {
            for r in rows {
                let target = sigma2 / r.n as f64;
                let se = (r.mse_stderr.powi(2) + (sigma2_stderr / r.n as f64).powi(2)).sqrt();
                if (r.mse - target).abs() > 3.0 * se {
                    failures.push(format!("n = {}: mse {} vs sigma2/n {}", r.n, r.mse, target));
                }
            }
            detail = "mse = sigma2/n within 3 se".into();
        }
    }
    let passed = failures.is_empty();
    CheckResult {
        kind,
        passed,
        detail: if passed { detail } else { format!("{detail}; {}", failures.join("; ")) },
    }
}
