//! Distributions with a barycenter known by construction.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::subgaussian_of_bounded;
use crate::error::{Error, Result};
use crate::geometry::{point_symmetry, tangent_norm, Diameter, GeodesicSpace, TangentVector};
use crate::mclab::stats;
use crate::rng::StreamRng;
use crate::spaces::{MetricTree, TreeLocus};

/// A law on a space. `index` is the position of the draw within a sample,
/// which lets heteroskedastic samplers vary the law across positions.
pub trait Sampler<S: GeodesicSpace>: Send + Sync {
    fn sample(&self, space: &S, index: usize, rng: &mut StreamRng) -> Result<S::Point>;

    /// The barycenter of the law.
    fn center(&self) -> &S::Point;

    /// Radius of a ball around the center containing the support.
    fn support_radius(&self) -> Option<f64>;

    /// Exact total variance when available in closed form.
    fn total_variance(&self) -> Option<f64> {
        None
    }

    fn subgaussian_k2(&self) -> Option<f64> {
        self.support_radius().and_then(|r| subgaussian_of_bounded(r).ok())
    }

    /// Whether the law depends on the draw index.
    fn heteroskedastic(&self) -> bool {
        false
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

const QUADRATURE_NODES: usize = 32;

/// Radius law of a uniform geodesic ball: density proportional to
/// `s_kappa(t)^(d-1)` on `[0, r]`.
#[derive(Debug, Clone)]
struct RadiusLaw {
    kappa: f64,
    dim: usize,
    r: f64,
    total: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadiusLaw {
    fn new(kappa: f64, dim: usize, r: f64) -> Self {
        let (nodes, weights) = gauss_legendre(QUADRATURE_NODES);
        let mut law = Self {
            kappa,
            dim,
            r,
            total: 1.0,
            nodes,
            weights,
        };
        law.total = law.mass(r);
        law
    }

    fn density(&self, t: f64) -> f64 {
        let s = if self.kappa > 0.0 {
            let c = self.kappa.sqrt();
            (c * t).sin() / c
        } else if self.kappa < 0.0 {
            let c = (-self.kappa).sqrt();
            (c * t).sinh() / c
        } else {
            t
        };
        s.powi(self.dim as i32 - 1)
    }

    /// `int_0^t density`.
    fn mass(&self, t: f64) -> f64 {
        let h = 0.5 * t;
        h * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * self.density(h * (x + 1.0)))
            .sum::<f64>()
    }

    fn cdf(&self, t: f64) -> f64 {
        self.mass(t) / self.total
    }

    /// Inverse CDF by Newton steps safeguarded with bisection.
    fn quantile(&self, u: f64) -> f64 {
        if self.r == 0.0 {
            return 0.0;
        }
        if self.kappa == 0.0 {
            return self.r * u.powf(1.0 / self.dim as f64);
        }
        let (mut lo, mut hi) = (0.0, self.r);
        let mut t = self.r * u.powf(1.0 / self.dim as f64);
        for _ in 0..200 {
            let f = self.cdf(t) - u;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = f * self.total / self.density(t);
            let next = t - step;
            if step.abs() < 1e-15 * self.r {
                t = next.clamp(lo, hi);
                break;
            }
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 * self.r {
                break;
            }
        }
        t
    }
}

/// Uniform law (for the Riemannian volume) on the geodesic ball `B(center, r)`
/// of a constant-curvature space.
#[derive(Debug, Clone)]
pub struct UniformCap<P> {
    center: P,
    radius: f64,
    basis: Vec<TangentVector<P>>,
    law: RadiusLaw,
}

impl<P: Clone> UniformCap<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(space: &S, center: P, radius: f64) -> Result<Self> {
        if !space.has_constant_curvature() {
            return Err(space.unsupported("uniform cap sampling"));
        }
        space.check_point(&center)?;
        let geom = space.geometry();
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::param("r", format!("cap radius must be finite and nonnegative, got {radius}")));
        }
        if let Diameter::Finite(d) = geom.d_kappa {
            if radius >= d / 4.0 {
                return Err(Error::param(
                    "r",
                    format!("cap radius {radius} must be below D_kappa/4 = {}", d / 4.0),
                ));
            }
        }
        let dim = geom.dimension.ok_or_else(|| space.unsupported("uniform cap sampling"))?;
        let basis = space.tangent_basis(&center)?;
        Ok(Self {
            center,
            radius,
            basis,
            law: RadiusLaw::new(geom.kappa, dim, radius),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// CDF of the distance to the center.
    pub fn radius_cdf(&self, t: f64) -> f64 {
        self.law.cdf(t.clamp(0.0, self.radius))
    }

    fn draw<S: GeodesicSpace<Point = P>>(&self, space: &S, rng: &mut StreamRng) -> Result<P> {
        if self.radius == 0.0 {
            return Ok(self.center.clone());
        }
        let z: Vec<f64> = (0..self.basis.len()).map(|_| rng.sample(StandardNormal)).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(self.center.clone());
        }
        let t = self.law.quantile(rng.random::<f64>());
        let mut components = self.basis[0].components.clone() * 0.0;
        for (b, zi) in self.basis.iter().zip(&z) {
            components.axpy(t * zi / norm, &b.components, 1.0);
        }
        space.exp(&TangentVector::new(self.center.clone(), components))
    }
}

impl<S: GeodesicSpace> Sampler<S> for UniformCap<S::Point> {
    fn sample(&self, space: &S, _index: usize, rng: &mut StreamRng) -> Result<S::Point> {
        self.draw(space, rng)
    }

    fn center(&self) -> &S::Point {
        &self.center
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.radius)
    }

    fn total_variance(&self) -> Option<f64> {
        // E t^2 with density d t^(d-1) / r^d.
        (self.law.kappa == 0.0).then(|| {
            let d = self.law.dim as f64;
            d * self.radius * self.radius / (d + 2.0)
        })
    }
}

/// One uniform draw from `B(center, r)`.
pub fn sample_uniform_cap<S: GeodesicSpace>(
    space: &S,
    center: &S::Point,
    r: f64,
    rng: &mut StreamRng,
) -> Result<S::Point> {
    UniformCap::new(space, center.clone(), r)?.draw(space, rng)
}

/// `exp_p(r u)` or `exp_p(-r u)` with equal probability.
#[derive(Debug, Clone)]
pub struct TwoPoint<P> {
    center: P,
    plus: P,
    minus: P,
    r: f64,
}

impl<P: Clone> TwoPoint<P> {
    /// `direction` is normalized; it must be a nonzero tangent vector at `p`.
    pub fn new<S: GeodesicSpace<Point = P>>(
        space: &S,
        p: P,
        direction: &TangentVector<P>,
        r: f64,
    ) -> Result<Self> {
        space.check_point(&p)?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::param("r", "must be finite and nonnegative"));
        }
        let norm = tangent_norm(space, direction)?;
        if !(norm > 0.0) {
            return Err(Error::param("direction", "must be nonzero"));
        }
        let u = direction.scaled(r / norm);
        let plus = space.exp(&TangentVector::new(p.clone(), u.components.clone()))?;
        let minus = space.exp(&TangentVector::new(p.clone(), -u.components))?;
        Ok(Self {
            center: p,
            plus,
            minus,
            r,
        })
    }

    pub fn points(&self) -> (&P, &P) {
        (&self.plus, &self.minus)
    }
}

impl<S: GeodesicSpace> Sampler<S> for TwoPoint<S::Point> {
    fn sample(&self, _space: &S, _index: usize, rng: &mut StreamRng) -> Result<S::Point> {
        Ok(if rng.random_bool(0.5) {
            self.plus.clone()
        } else {
            self.minus.clone()
        })
    }

    fn center(&self) -> &S::Point {
        &self.center
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.r)
    }

    fn total_variance(&self) -> Option<f64> {
        Some(self.r * self.r)
    }
}

/// `exp_p(v)` with `v` standard normal (scaled by `s`) in an orthonormal
/// tangent frame. Symmetric about `p`; on nonpositively curved manifolds
/// `d(p, exp_p v) = |v|`, so the total variance is `d s^2`.
#[derive(Debug, Clone)]
pub struct Gaussian<P> {
    center: P,
    scale: f64,
    basis: Vec<TangentVector<P>>,
    flat: bool,
}

impl<P: Clone> Gaussian<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(space: &S, center: P, scale: f64) -> Result<Self> {
        let geom = space.geometry();
        if geom.kappa > 0.0 || !space.is_smooth() {
            return Err(space.unsupported("gaussian sampling"));
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::param("scale", "must be finite and nonnegative"));
        }
        space.check_point(&center)?;
        let basis = space.tangent_basis(&center)?;
        Ok(Self {
            center,
            scale,
            basis,
            flat: space.has_constant_curvature() && geom.kappa == 0.0,
        })
    }
}

impl<S: GeodesicSpace> Sampler<S> for Gaussian<S::Point> {
    fn sample(&self, space: &S, _index: usize, rng: &mut StreamRng) -> Result<S::Point> {
        let mut components = self.basis[0].components.clone() * 0.0;
        for b in &self.basis {
            let z: f64 = rng.sample(StandardNormal);
            components.axpy(self.scale * z, &b.components, 1.0);
        }
        space.exp(&TangentVector::new(self.center.clone(), components))
    }

    fn center(&self) -> &S::Point {
        &self.center
    }

    fn support_radius(&self) -> Option<f64> {
        None
    }

    fn total_variance(&self) -> Option<f64> {
        Some(self.basis.len() as f64 * self.scale * self.scale)
    }

    fn subgaussian_k2(&self) -> Option<f64> {
        self.flat.then_some(self.scale * self.scale)
    }
}

/// Categorical law on a list of tree loci (typically leaves).
#[derive(Debug, Clone)]
pub struct TreeLeaves {
    loci: Vec<TreeLocus>,
    index: WeightedIndex<f64>,
    center: TreeLocus,
    radius: f64,
    variance: f64,
}

impl TreeLeaves {
    pub fn new(tree: &MetricTree, loci: Vec<TreeLocus>, weights: &[f64]) -> Result<Self> {
        if loci.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: loci.len(),
                got: weights.len(),
            });
        }
        let center = tree.exact_barycenter(&loci, weights)?;
        let index = WeightedIndex::new(weights.iter().copied())
            .map_err(|e| Error::param("weights", e.to_string()))?;
        let total: f64 = weights.iter().sum();
        let mut radius = 0.0_f64;
        let mut variance = 0.0;
        for (x, &w) in loci.iter().zip(weights) {
            let d = tree.distance(x, &center)?;
            if w > 0.0 {
                radius = radius.max(d);
            }
            variance += w * d * d / total;
        }
        Ok(Self {
            loci,
            index,
            center,
            radius,
            variance,
        })
    }

    /// All leaves of the tree with the given weights.
    pub fn on_leaves(tree: &MetricTree, weights: &[f64]) -> Result<Self> {
        let loci: Vec<TreeLocus> = tree.leaves().into_iter().map(|v| tree.node(v)).collect::<Result<_>>()?;
        Self::new(tree, loci, weights)
    }
}

impl Sampler<MetricTree> for TreeLeaves {
    fn sample(&self, _space: &MetricTree, _index: usize, rng: &mut StreamRng) -> Result<TreeLocus> {
        Ok(self.loci[self.index.sample(rng)])
    }

    fn center(&self) -> &TreeLocus {
        &self.center
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.radius)
    }

    fn total_variance(&self) -> Option<f64> {
        Some(self.variance)
    }
}

/// One categorical draw among `loci`.
pub fn sample_tree_leaves(
    tree: &MetricTree,
    loci: &[TreeLocus],
    weights: &[f64],
    rng: &mut StreamRng,
) -> Result<TreeLocus> {
    TreeLeaves::new(tree, loci.to_vec(), weights)?.sample(tree, 0, rng)
}

/// Deterministic list: draw `i` is `points[i mod len]`. The center is the
/// empirical barycenter of one full cycle.
#[derive(Debug, Clone)]
pub struct FixedList<P> {
    points: Vec<P>,
    center: P,
    radius: f64,
}

impl<P: Clone> FixedList<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(space: &S, points: Vec<P>, center: P) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point list"));
        }
        let mut radius = 0.0_f64;
        for p in &points {
            radius = radius.max(space.distance(p, &center)?);
        }
        Ok(Self {
            points,
            center,
            radius,
        })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }
}

impl<S: GeodesicSpace> Sampler<S> for FixedList<S::Point> {
    fn sample(&self, _space: &S, index: usize, _rng: &mut StreamRng) -> Result<S::Point> {
        Ok(self.points[index % self.points.len()].clone())
    }

    fn center(&self) -> &S::Point {
        &self.center
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.radius)
    }
}

/// Reflects each draw of `base` through `p` with probability 1/2.
#[derive(Debug, Clone)]
pub struct Symmetrized<S: GeodesicSpace, B> {
    p: S::Point,
    base: B,
}

impl<S: GeodesicSpace, B: Sampler<S>> Symmetrized<S, B> {
    pub fn new(p: S::Point, base: B) -> Self {
        Self { p, base }
    }

    fn centered(&self) -> bool {
        self.p == *self.base.center()
    }
}

impl<S: GeodesicSpace, B: Sampler<S>> Sampler<S> for Symmetrized<S, B> {
    fn sample(&self, space: &S, index: usize, rng: &mut StreamRng) -> Result<S::Point> {
        let x = self.base.sample(space, index, rng)?;
        if rng.random_bool(0.5) {
            point_symmetry(space, &self.p, &x)
        } else {
            Ok(x)
        }
    }

    fn center(&self) -> &S::Point {
        &self.p
    }

    fn support_radius(&self) -> Option<f64> {
        if self.centered() {
            self.base.support_radius()
        } else {
            None
        }
    }

    fn total_variance(&self) -> Option<f64> {
        if self.centered() {
            self.base.total_variance()
        } else {
            None
        }
    }

    fn heteroskedastic(&self) -> bool {
        self.base.heteroskedastic()
    }
}

/// Uniform caps of cycling radii around a common center: draw `i` uses
/// `radii[i mod k]`.
#[derive(Debug, Clone)]
pub struct HeteroCaps<P> {
    caps: Vec<UniformCap<P>>,
}

impl<P: Clone> HeteroCaps<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(space: &S, center: P, radii: &[f64]) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Empty("radius list"));
        }
        let caps = radii
            .iter()
            .map(|&r| UniformCap::new(space, center.clone(), r))
            .collect::<Result<_>>()?;
        Ok(Self { caps })
    }
}

impl<S: GeodesicSpace> Sampler<S> for HeteroCaps<S::Point> {
    fn sample(&self, space: &S, index: usize, rng: &mut StreamRng) -> Result<S::Point> {
        self.caps[index % self.caps.len()].draw(space, rng)
    }

    fn center(&self) -> &S::Point {
        &self.caps[0].center
    }

    fn support_radius(&self) -> Option<f64> {
        self.caps.iter().map(|c| c.radius).reduce(f64::max)
    }

    fn heteroskedastic(&self) -> bool {
        true
    }
}

/// Monte Carlo estimate of `E d(X, b*)^2` and its standard error. Draw `j`
/// uses index `j`, so index-dependent laws are averaged over positions.
pub fn estimate_total_variance<S, T>(
    space: &S,
    sampler: &T,
    b_star: &S::Point,
    n_mc: usize,
    rng: &mut StreamRng,
) -> Result<(f64, f64)>
where
    S: GeodesicSpace,
    T: Sampler<S> + ?Sized,
{
    if n_mc == 0 {
        return Err(Error::param("n_mc", "must be at least 1"));
    }
    let sq = (0..n_mc)
        .map(|j| {
            let x = sampler.sample(space, j, rng)?;
            let d = space.distance(&x, b_star)?;
            Ok(d * d)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((stats::mean(&sq), stats::stderr(&sq)))
}
