//! Estimators built on the solvers: bootstrap stochastic approximation of a
//! finite set's barycenter under a PAC sample budget, and the parallel
//! batch-of-batches estimator.

use rand::Rng;

use crate::bounds::{sample_size_bernstein_raw, sample_size_hoeffding_raw};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::GeodesicSpace;
use crate::mclab::samplers::{Sampler, Symmetrized};
use crate::rng;
use crate::solvers::{empirical_barycenter, iterated_barycenter, Method, SolverOptions, StepSchedule};

/// Resampling budgets above this are refused.
pub const MAX_BUDGET: u64 = 1_000_000_000;

/// Diameter `D` and pairwise spread `sigma~^2 = (1/(2 n^2)) sum_{i,j} d(x_i, x_j)^2`.
pub fn pairwise_stats<S: GeodesicSpace + ?Sized>(space: &S, points: &[S::Point]) -> Result<(f64, f64)> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("point list"));
    }
    let mut diam = 0.0_f64;
    let mut sum = 0.0;
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            let d = space.distance(x, y)?;
            diam = diam.max(d);
            sum += d * d;
        }
    }
    // Each unordered pair appears twice among ordered pairs; diagonal terms vanish.
    Ok((diam, 2.0 * sum / (2.0 * (n * n) as f64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Hoeffding,
    Bernstein,
    /// The smaller of the two budgets.
    Auto,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Hoeffding => "hoeffding",
            BoundKind::Bernstein => "bernstein",
            BoundKind::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxBudget {
    pub m: u64,
    /// The budget actually used (never `Auto`).
    pub bound_kind: BoundKind,
    pub eps: f64,
    pub delta: f64,
    pub d: f64,
    pub sigma_tilde2: f64,
}

fn to_budget(raw: f64) -> Result<u64> {
    let m = {
        let r = raw.round();
        if (raw - r).abs() <= 1e-9 * raw.abs().max(1.0) {
            r
        } else {
            raw.ceil()
        }
    }
    .max(1.0);
    if !(m <= MAX_BUDGET as f64) {
        return Err(Error::BudgetOverflow {
            m,
            limit: MAX_BUDGET,
        });
    }
    Ok(m as u64)
}

/// Sample budget for approximating the barycenter of a set with diameter `d`
/// and spread `sigma_tilde2`.
pub fn approx_budget(
    d: f64,
    sigma_tilde2: f64,
    eps: f64,
    delta: f64,
    kind: BoundKind,
) -> Result<ApproxBudget> {
    let hoef = || to_budget(sample_size_hoeffding_raw(d, eps, delta)?);
    let bern = || to_budget(sample_size_bernstein_raw(sigma_tilde2, d, eps, delta)?);
    let (m, bound_kind) = match kind {
        BoundKind::Hoeffding => (hoef()?, BoundKind::Hoeffding),
        BoundKind::Bernstein => (bern()?, BoundKind::Bernstein),
        BoundKind::Auto => {
            // Either may overflow on its own; use whichever fits and is smaller.
            match (hoef(), bern()) {
                (Ok(h), Ok(b)) if b < h => (b, BoundKind::Bernstein),
                (Ok(h), _) => (h, BoundKind::Hoeffding),
                (Err(_), Ok(b)) => (b, BoundKind::Bernstein),
                (Err(e), Err(_)) => return Err(e),
            }
        }
    };
    Ok(ApproxBudget {
        m,
        bound_kind,
        eps,
        delta,
        d,
        sigma_tilde2,
    })
}

/// `m` indices drawn uniformly with replacement from `0..n`.
pub fn resample_indices(n: usize, m: u64, seed: u64) -> Vec<usize> {
    let mut g = rng::stream(seed, 0);
    (0..m).map(|_| g.random_range(0..n)).collect()
}

/// Approximates the empirical barycenter of `points` by the harmonic
/// iterated barycenter of `m` uniform resamples, where `m` guarantees
/// accuracy `eps` with probability at least `1 - delta`.
pub fn stochastic_barycenter_approx<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    eps: f64,
    delta: f64,
    kind: BoundKind,
    seed: u64,
) -> Result<(S::Point, ApproxBudget)> {
    let (d, sigma_tilde2) = pairwise_stats(space, points)?;
    let budget = approx_budget(d, sigma_tilde2, eps, delta, kind)?;
    let indices = resample_indices(points.len(), budget.m, seed);
    let mut iter = indices.iter();
    let mut b = points[*iter.next().expect("m >= 1")].clone();
    for (k, &i) in (2..).zip(iter) {
        b = space.interpolate(&b, &points[i], 1.0 / k as f64)?;
    }
    Ok((b, budget))
}

/// Partition of `n = batches * batch_size` samples into consecutive blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    pub batches: usize,
    pub batch_size: usize,
}

impl BatchPlan {
    pub fn new(batches: usize, batch_size: usize) -> Result<Self> {
        if batches == 0 || batch_size == 0 {
            return Err(Error::param("batches/batch_size", "must be at least 1"));
        }
        Ok(Self {
            batches,
            batch_size,
        })
    }

    /// Plan with `batches` blocks covering exactly `n` samples.
    pub fn for_samples(n: usize, batches: usize) -> Result<Self> {
        if batches == 0 || n % batches != 0 || n == 0 {
            return Err(Error::PartitionMismatch {
                n,
                batches,
                batch_size: if batches == 0 { 0 } else { n / batches },
            });
        }
        Self::new(batches, n / batches)
    }

    pub fn n(&self) -> usize {
        self.batches * self.batch_size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelReport<P> {
    pub result: P,
    pub batch_results: Vec<P>,
    /// Number of non-converged solves among the batch and final solves.
    pub flags: usize,
}

/// Barycenter of the per-batch empirical barycenters.
pub fn parallel_barycenter<S: GeodesicSpace + ?Sized>(
    space: &S,
    samples: &[S::Point],
    plan: BatchPlan,
    method: Method,
    opts: &SolverOptions,
    exec: Execution,
) -> Result<ParallelReport<S::Point>> {
    if samples.len() != plan.n() {
        return Err(Error::PartitionMismatch {
            n: samples.len(),
            batches: plan.batches,
            batch_size: plan.batch_size,
        });
    }
    let reports = exec.try_map_indexed(plan.batches, |j| {
        let block = &samples[j * plan.batch_size..(j + 1) * plan.batch_size];
        empirical_barycenter(space, block, method, opts)
    })?;
    let mut flags = reports.iter().filter(|r| !r.converged).count();
    let batch_results: Vec<S::Point> = reports.into_iter().map(|r| r.result).collect();
    let last = empirical_barycenter(space, &batch_results, method, opts)?;
    flags += usize::from(!last.converged);
    Ok(ParallelReport {
        result: last.result,
        batch_results,
        flags,
    })
}

/// Batch-of-batches with iterated (harmonic) barycenters at both levels;
/// valid in CAT(0) spaces.
pub fn parallel_iterated_barycenter<S: GeodesicSpace + ?Sized>(
    space: &S,
    samples: &[S::Point],
    plan: BatchPlan,
) -> Result<S::Point> {
    if samples.len() != plan.n() {
        return Err(Error::PartitionMismatch {
            n: samples.len(),
            batches: plan.batches,
            batch_size: plan.batch_size,
        });
    }
    let batch: Vec<S::Point> = samples
        .chunks(plan.batch_size)
        .map(|b| iterated_barycenter(space, b, &StepSchedule::Harmonic).map(|r| r.result))
        .collect::<Result<_>>()?;
    Ok(iterated_barycenter(space, &batch, &StepSchedule::Harmonic)?.result)
}

/// Wraps a sampler so that each draw is reflected through `p` with
/// probability 1/2; the result is symmetric about `p`, which is therefore its
/// barycenter.
pub fn symmetrize_sampler<S, B>(p: S::Point, base: B) -> Symmetrized<S, B>
where
    S: GeodesicSpace,
    B: Sampler<S>,
{
    Symmetrized::new(p, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{build_figure1_tree, Euclidean};

    #[test]
    fn pairwise_stats_examples() {
        let e = Euclidean::new(1).unwrap();
        let x = e.point(&[0.0]).unwrap();
        assert_eq!(pairwise_stats(&e, std::slice::from_ref(&x)).unwrap(), (0.0, 0.0));
        let pts = [x, e.point(&[2.0]).unwrap()];
        assert_eq!(pairwise_stats(&e, &pts).unwrap(), (2.0, 1.0));
    }

    #[test]
    fn approx_single_and_identical_points() {
        let e = Euclidean::new(2).unwrap();
        let x = e.point(&[1.0, -3.0]).unwrap();
        let (p, b) = stochastic_barycenter_approx(&e, std::slice::from_ref(&x), 0.1, 0.1, BoundKind::Hoeffding, 1).unwrap();
        assert_eq!(p, x);
        assert_eq!(b.m, 1);
        let pts = vec![x.clone(); 7];
        let (p, _) = stochastic_barycenter_approx(&e, &pts, 0.1, 0.1, BoundKind::Auto, 9).unwrap();
        assert_eq!(p, x);
    }

    #[test]
    fn approx_is_seed_deterministic() {
        let (t, pts) = build_figure1_tree(10, [1.0; 3]).unwrap();
        let a = stochastic_barycenter_approx(&t, &pts, 0.2, 0.1, BoundKind::Bernstein, 5).unwrap();
        let b = stochastic_barycenter_approx(&t, &pts, 0.2, 0.1, BoundKind::Bernstein, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn figure1_budgets() {
        let (t, pts) = build_figure1_tree(10, [1.0; 3]).unwrap();
        let (d, s2) = pairwise_stats(&t, &pts).unwrap();
        assert_eq!(d, 2.0);
        assert!((s2 - 4.0 / 3.0).abs() < 1e-14);
        let h = approx_budget(d, s2, 0.2, 0.1, BoundKind::Hoeffding).unwrap();
        let b = approx_budget(d, s2, 0.2, 0.1, BoundKind::Bernstein).unwrap();
        let a = approx_budget(d, s2, 0.2, 0.1, BoundKind::Auto).unwrap();
        assert_eq!(h.m, (400.0 * 10f64.ln()).ceil() as u64);
        assert_eq!(b.m, (16.0 / 3.0 * (4.0 / 3.0) / 0.04 * 10f64.ln()).ceil() as u64);
        assert!(b.m < h.m);
        assert_eq!((a.m, a.bound_kind), (b.m, BoundKind::Bernstein));
    }

    #[test]
    fn budget_overflow_reports_m() {
        let err = approx_budget(1.0, 0.0, 1e-6, 0.1, BoundKind::Hoeffding).unwrap_err();
        match err {
            Error::BudgetOverflow { m, .. } => assert!(m > 1e9),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn batch_plan_checks() {
        assert!(BatchPlan::for_samples(10, 3).is_err());
        assert_eq!(BatchPlan::for_samples(12, 3).unwrap().batch_size, 4);
        let e = Euclidean::new(1).unwrap();
        let pts: Vec<_> = (0..6).map(|i| e.point(&[i as f64]).unwrap()).collect();
        let plan = BatchPlan::new(2, 2).unwrap();
        assert!(matches!(
            parallel_barycenter(&e, &pts, plan, Method::Exact, &SolverOptions::default(), Execution::Sequential),
            Err(Error::PartitionMismatch { .. })
        ));
    }

    #[test]
    fn single_batch_is_plain_barycenter() {
        let e = Euclidean::new(2).unwrap();
        let pts: Vec<_> = (0..8).map(|i| e.point(&[i as f64, (i * i) as f64]).unwrap()).collect();
        let plan = BatchPlan::for_samples(8, 1).unwrap();
        let opts = SolverOptions::default();
        let p = parallel_barycenter(&e, &pts, plan, Method::Exact, &opts, Execution::Sequential).unwrap();
        let q = empirical_barycenter(&e, &pts, Method::Exact, &opts).unwrap();
        assert_eq!(p.result, q.result);
    }
}
