//! The geodesic-space contract shared by every model space, together with
//! curvature metadata and the convex-domain hypotheses that the estimation
//! bounds rely on.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A length that may be infinite. Infinity is an explicit variant and is
/// never produced by overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diameter {
    Finite(f64),
    Infinite,
}

impl Diameter {
    pub fn is_finite(self) -> bool {
        matches!(self, Diameter::Finite(_))
    }

    /// Lossy view as an `f64`, mapping `Infinite` to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            Diameter::Finite(d) => d,
            Diameter::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diameter::Finite(d) => write!(f, "{d}"),
            Diameter::Infinite => f.write_str("+inf"),
        }
    }
}

/// Diameter of the constant-curvature model space: `pi / sqrt(kappa)` for
/// positive curvature, infinite otherwise.
pub fn model_diameter(kappa: f64) -> Diameter {
    if kappa > 0.0 {
        Diameter::Finite(PI / kappa.sqrt())
    } else {
        Diameter::Infinite
    }
}

/// Curvature metadata of a space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySpec {
    /// Upper curvature bound.
    pub kappa: f64,
    pub d_kappa: Diameter,
    /// Intrinsic dimension; `None` for metric trees.
    pub dimension: Option<usize>,
}

impl GeometrySpec {
    pub fn new(kappa: f64, dimension: Option<usize>) -> Self {
        Self {
            kappa,
            d_kappa: model_diameter(kappa),
            dimension,
        }
    }
}

/// A closed ball used as the convex domain hypothesis. `epsilon` is only
/// meaningful for positive curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomainSpec<P> {
    pub center: P,
    pub radius: f64,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainViolation {
    NegativeRadius { radius: f64 },
    MissingEpsilon,
    NonPositiveEpsilon { epsilon: f64 },
    EpsilonTooLarge { epsilon: f64, half_diameter: f64 },
    RadiusNotBelowQuarterDiameter { radius: f64, quarter_diameter: f64 },
    RadiusExceedsEpsilonBall { radius: f64, limit: f64 },
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainViolation::NegativeRadius { radius } => write!(f, "radius {radius} < 0"),
            DomainViolation::MissingEpsilon => {
                f.write_str("epsilon is required when kappa > 0")
            }
            DomainViolation::NonPositiveEpsilon { epsilon } => {
                write!(f, "epsilon {epsilon} <= 0")
            }
            DomainViolation::EpsilonTooLarge {
                epsilon,
                half_diameter,
            } => write!(f, "epsilon {epsilon} >= D_kappa/2 = {half_diameter}"),
            DomainViolation::RadiusNotBelowQuarterDiameter {
                radius,
                quarter_diameter,
            } => write!(f, "radius {radius} >= D_kappa/4 = {quarter_diameter}"),
            DomainViolation::RadiusExceedsEpsilonBall { radius, limit } => {
                write!(f, "radius {radius} > (D_kappa/2 - epsilon)/2 = {limit}")
            }
        }
    }
}

/// Outcome of [`validate_domain`]; lists every violated condition in the
/// order they are checked.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomainReport {
    pub violations: Vec<DomainViolation>,
}

impl DomainReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts the report into an error naming the first violation.
    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidDomain(v.to_string())),
        }
    }
}

pub fn validate_domain<P>(spec: &ConvexDomainSpec<P>, geom: &GeometrySpec) -> DomainReport {
    let mut violations = Vec::new();
    if spec.radius < 0.0 {
        violations.push(DomainViolation::NegativeRadius {
            radius: spec.radius,
        });
    }
    if let Diameter::Finite(d) = geom.d_kappa {
        match spec.epsilon {
            None => violations.push(DomainViolation::MissingEpsilon),
            Some(eps) => {
                if eps <= 0.0 {
                    violations.push(DomainViolation::NonPositiveEpsilon { epsilon: eps });
                }
                if eps >= d / 2.0 {
                    violations.push(DomainViolation::EpsilonTooLarge {
                        epsilon: eps,
                        half_diameter: d / 2.0,
                    });
                }
            }
        }
        if spec.radius >= d / 4.0 {
            violations.push(DomainViolation::RadiusNotBelowQuarterDiameter {
                radius: spec.radius,
                quarter_diameter: d / 4.0,
            });
        }
        if let Some(eps) = spec.epsilon {
            let limit = 0.5 * (d / 2.0 - eps);
            // Allow round-off when the radius is set exactly at the limit.
            if spec.radius > limit * (1.0 + 1e-12) {
                violations.push(DomainViolation::RadiusExceedsEpsilonBall {
                    radius: spec.radius,
                    limit,
                });
            }
        }
    }
    DomainReport { violations }
}

/// Largest `epsilon` for which a ball of the given radius satisfies
/// `radius <= (D_kappa/2 - epsilon)/2`. `None` when no positive value exists
/// or when the curvature is not positive.
pub fn max_admissible_epsilon(kappa: f64, radius: f64) -> Option<f64> {
    match model_diameter(kappa) {
        Diameter::Infinite => None,
        Diameter::Finite(d) => {
            let eps = d / 2.0 - 2.0 * radius;
            (eps > 0.0).then_some(eps)
        }
    }
}

/// A tangent vector, stored in the same coordinate family as its base point
/// (ambient coordinates for the sphere and hyperboloid, a row-major flattened
/// symmetric matrix for SPD).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<P> {
    pub base: P,
    pub components: DVector<f64>,
}

impl<P: Clone> TangentVector<P> {
    pub fn new(base: P, components: DVector<f64>) -> Self {
        Self { base, components }
    }

    pub fn zero(base: P, len: usize) -> Self {
        Self {
            base,
            components: DVector::zeros(len),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            components: &self.components * s,
        }
    }
}

/// A uniquely geodesic metric space (within its admissible region).
///
/// Smooth spaces override the Riemannian hooks (`log`, `exp`, `inner`);
/// the defaults report [`Error::Unsupported`].
pub trait GeodesicSpace: Send + Sync {
    type Point: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;

    fn geometry(&self) -> GeometrySpec;

    /// Membership check for a point of this space.
    fn check_point(&self, x: &Self::Point) -> Result<()>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;

    /// Point at fraction `t` of the way from `x` to `y` on the geodesic.
    fn interpolate(&self, x: &Self::Point, y: &Self::Point, t: f64) -> Result<Self::Point>;

    fn is_smooth(&self) -> bool {
        false
    }

    /// Whether the sectional curvature is constant (`kappa` everywhere).
    fn has_constant_curvature(&self) -> bool {
        false
    }

    fn log(&self, _x: &Self::Point, _y: &Self::Point) -> Result<TangentVector<Self::Point>> {
        Err(self.unsupported("log"))
    }

    fn exp(&self, _v: &TangentVector<Self::Point>) -> Result<Self::Point> {
        Err(self.unsupported("exp"))
    }

    /// Riemannian inner product of two tangent vectors at the same base.
    fn inner(
        &self,
        _u: &TangentVector<Self::Point>,
        _v: &TangentVector<Self::Point>,
    ) -> Result<f64> {
        Err(self.unsupported("inner"))
    }

    /// Orthonormal basis of the tangent space at `x`.
    fn tangent_basis(&self, _x: &Self::Point) -> Result<Vec<TangentVector<Self::Point>>> {
        Err(self.unsupported("tangent_basis"))
    }

    /// Closed-form minimizer of the empirical Fréchet function with the
    /// given nonnegative weights, where one exists.
    fn exact_barycenter(&self, _points: &[Self::Point], _weights: &[f64]) -> Result<Self::Point> {
        Err(self.unsupported("exact barycenter"))
    }

    /// A distinguished point used as the default sampler center.
    fn base_point(&self) -> Self::Point;

    fn unsupported(&self, op: &'static str) -> Error {
        Error::Unsupported {
            op,
            space: self.name(),
        }
    }
}

pub fn tangent_norm<S: GeodesicSpace + ?Sized>(
    space: &S,
    v: &TangentVector<S::Point>,
) -> Result<f64> {
    Ok(space.inner(v, v)?.max(0.0).sqrt())
}

/// Geodesic reflection through `p`: `exp_p(-log_p(x))`.
pub fn point_symmetry<S: GeodesicSpace + ?Sized>(
    space: &S,
    p: &S::Point,
    x: &S::Point,
) -> Result<S::Point> {
    let v = space.log(p, x)?;
    space.exp(&v.scaled(-1.0))
}

/// Metric projection onto the closed ball `B(center, r)`.
pub fn project_to_ball<S: GeodesicSpace + ?Sized>(
    space: &S,
    center: &S::Point,
    r: f64,
    x: &S::Point,
) -> Result<S::Point> {
    if r < 0.0 {
        return Err(Error::param("r", "radius must be nonnegative"));
    }
    let d = space.distance(center, x)?;
    if d <= r {
        Ok(x.clone())
    } else {
        space.interpolate(center, x, r / d)
    }
}

/// Maximum deviation from constant-speed parametrization along the geodesic
/// from `x` to `y`, over consecutive pairs of the partition.
pub fn geodesic_speed_defect<S: GeodesicSpace + ?Sized>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    partition: &[f64],
) -> Result<f64> {
    let d = space.distance(x, y)?;
    let pts = partition
        .iter()
        .map(|&s| space.interpolate(x, y, s))
        .collect::<Result<Vec<_>>>()?;
    let mut defect = 0.0_f64;
    for (i, w) in pts.windows(2).enumerate() {
        let (s, t) = (partition[i], partition[i + 1]);
        let seg = space.distance(&w[0], &w[1])?;
        defect = defect.max((seg - (s - t).abs() * d).abs());
    }
    Ok(defect)
}

/// Approximate minimal enclosing ball by geodesic Badoiu–Clarkson steps:
/// move the center toward the farthest point by `1/(k+1)`. The returned
/// radius is the exact enclosing radius of the returned center.
pub fn enclosing_ball<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    iterations: usize,
) -> Result<(S::Point, f64)> {
    let first = points.first().ok_or(Error::Empty("point list"))?;
    let farthest = |c: &S::Point| -> Result<(usize, f64)> {
        let mut best = (0, 0.0);
        for (i, p) in points.iter().enumerate() {
            let d = space.distance(c, p)?;
            if d > best.1 {
                best = (i, d);
            }
        }
        Ok(best)
    };
    let mut c = first.clone();
    let (mut best_c, mut best_r) = (c.clone(), farthest(&c)?.1);
    for k in 1..=iterations {
        let (i, r) = farthest(&c)?;
        if r < best_r {
            best_r = r;
            best_c = c.clone();
        }
        if r == 0.0 {
            break;
        }
        c = space.interpolate(&c, &points[i], 1.0 / (k as f64 + 1.0))?;
    }
    let r = farthest(&c)?.1;
    if r < best_r {
        return Ok((c, r));
    }
    Ok((best_c, best_r))
}

/// Uniform partition of `[0, 1]` with `k` points.
pub fn uniform_partition(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..k).map(|i| i as f64 / (k - 1) as f64).collect(),
    }
}
