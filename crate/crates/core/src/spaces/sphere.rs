use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{GeodesicSpace, GeometrySpec, TangentVector};

/// Relative tolerance on the membership constraint `|x| = 1/sqrt(kappa)`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Pairs whose chord through the center is shorter than this (relative to the
/// radius) are treated as antipodal.
const ANTIPODAL_TOL: f64 = 1e-10;

/// Round sphere of curvature `kappa > 0` and intrinsic dimension `d`,
/// embedded in `R^(d+1)` with radius `1/sqrt(kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    dim: usize,
    kappa: f64,
    radius: f64,
}

impl Sphere {
    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be at least 1"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", "sphere curvature must be positive"));
        }
        Ok(Self {
            dim,
            kappa,
            radius: 1.0 / kappa.sqrt(),
        })
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(dim, 1.0).expect("valid unit sphere")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn point(&self, ambient: &[f64]) -> Result<DVector<f64>> {
        let x = DVector::from_column_slice(ambient);
        self.check_point(&x)?;
        Ok(x)
    }

    /// Projects a nonzero ambient vector radially onto the sphere.
    pub fn normalize(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::param("v", "cannot normalize a zero vector"));
        }
        Ok(v * (self.radius / n))
    }

    /// Point at geodesic distance `colatitude` from the north pole, in the
    /// direction of the first ambient axis rotated by `longitude` in the
    /// plane of the first two axes (requires `dim >= 2` when `longitude != 0`).
    pub fn from_polar(&self, colatitude: f64, longitude: f64) -> DVector<f64> {
        let a = colatitude / self.radius;
        let mut x = DVector::zeros(self.dim + 1);
        x[self.dim] = self.radius * a.cos();
        x[0] = self.radius * a.sin() * longitude.cos();
        if self.dim >= 2 {
            x[1] = self.radius * a.sin() * longitude.sin();
        }
        x
    }

    fn angle(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        2.0 * (x - y).norm().atan2((x + y).norm())
    }

    fn check_dims(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim + 1,
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_not_antipodal(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        if (x + y).norm() < ANTIPODAL_TOL * self.radius {
            return Err(Error::Antipodal);
        }
        Ok(())
    }
}

/// `sin(a * theta) / sin(theta)`, accurate for small `theta`.
fn sin_ratio(a: f64, theta: f64) -> f64 {
    if theta.abs() < 1e-5 {
        let t2 = theta * theta;
        a * (1.0 - (a * a - 1.0) * t2 / 6.0)
    } else {
        (a * theta).sin() / theta.sin()
    }
}

impl GeodesicSpace for Sphere {
    type Point = DVector<f64>;

    fn name(&self) -> &'static str {
        "sphere"
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::new(self.kappa, Some(self.dim))
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        self.check_dims(x)?;
        let n = x.norm();
        if !n.is_finite() || (n - self.radius).abs() > MEMBERSHIP_TOL * self.radius {
            return Err(Error::NotOnManifold {
                space: self.name(),
                reason: format!("norm {n} differs from radius {}", self.radius),
            });
        }
        Ok(())
    }

    fn distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_dims(x)?;
        self.check_dims(y)?;
        Ok(self.radius * self.angle(x, y))
    }

    fn interpolate(&self, x: &DVector<f64>, y: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        self.check_dims(x)?;
        self.check_dims(y)?;
        self.check_not_antipodal(x, y)?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        if t == 1.0 {
            return Ok(y.clone());
        }
        let theta = self.angle(x, y);
        let v = x * sin_ratio(1.0 - t, theta) + y * sin_ratio(t, theta);
        self.normalize(&v)
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn has_constant_curvature(&self) -> bool {
        true
    }

    fn log(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<TangentVector<DVector<f64>>> {
        self.check_dims(x)?;
        self.check_dims(y)?;
        self.check_not_antipodal(x, y)?;
        let d = self.distance(x, y)?;
        let w = y - x * (self.kappa * x.dot(y));
        let wn = w.norm();
        if d == 0.0 || wn == 0.0 {
            return Ok(TangentVector::zero(x.clone(), self.dim + 1));
        }
        Ok(TangentVector::new(x.clone(), w * (d / wn)))
    }

    fn exp(&self, v: &TangentVector<DVector<f64>>) -> Result<DVector<f64>> {
        self.check_dims(&v.base)?;
        self.check_dims(&v.components)?;
        let s = v.components.norm();
        if s == 0.0 {
            return Ok(v.base.clone());
        }
        let limit = PI * self.radius;
        if s >= limit {
            return Err(Error::TangentTooLong { norm: s, limit });
        }
        let a = s / self.radius;
        let out = &v.base * a.cos() + &v.components * (self.radius * a.sin() / s);
        self.normalize(&out)
    }

    fn inner(
        &self,
        u: &TangentVector<DVector<f64>>,
        v: &TangentVector<DVector<f64>>,
    ) -> Result<f64> {
        self.check_dims(&u.components)?;
        self.check_dims(&v.components)?;
        Ok(u.components.dot(&v.components))
    }

    fn tangent_basis(&self, x: &DVector<f64>) -> Result<Vec<TangentVector<DVector<f64>>>> {
        self.check_dims(x)?;
        let normal = x / x.norm();
        Ok(orthonormal_complement(&normal, self.dim + 1)
            .into_iter()
            .map(|c| TangentVector::new(x.clone(), c))
            .collect())
    }

    fn base_point(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim + 1);
        x[self.dim] = self.radius;
        x
    }
}

/// Orthonormal basis of the Euclidean orthogonal complement of a unit vector.
pub(crate) fn orthonormal_complement(unit: &DVector<f64>, n: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = vec![unit.clone()];
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        for b in &basis {
            let c = b.dot(&e);
            e.axpy(-c, b, 1.0);
        }
        // Second pass for numerical orthogonality.
        for b in &basis {
            let c = b.dot(&e);
            e.axpy(-c, b, 1.0);
        }
        let norm = e.norm();
        if norm > 1e-6 {
            basis.push(e / norm);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}
