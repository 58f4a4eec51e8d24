use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{GeodesicSpace, GeometrySpec, TangentVector};

pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Hyperboloid model of the hyperbolic space of curvature `kappa < 0`:
/// `{x in R^(d+1) : <x,x> = -1/|kappa|, x_(d+1) > 0}` with the Minkowski
/// form `<x,y> = x_1 y_1 + ... + x_d y_d - x_(d+1) y_(d+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperbolic {
    dim: usize,
    kappa: f64,
    radius: f64,
}

/// Minkowski bilinear form with the last coordinate timelike.
pub fn minkowski(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len();
    x.rows(0, n - 1).dot(&y.rows(0, n - 1)) - x[n - 1] * y[n - 1]
}

fn sinh_ratio(a: f64, theta: f64) -> f64 {
    if theta.abs() < 1e-5 {
        let t2 = theta * theta;
        a * (1.0 + (a * a - 1.0) * t2 / 6.0)
    } else {
        (a * theta).sinh() / theta.sinh()
    }
}

impl Hyperbolic {
    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be at least 1"));
        }
        if !(kappa < 0.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", "hyperbolic curvature must be negative"));
        }
        Ok(Self {
            dim,
            kappa,
            radius: 1.0 / (-kappa).sqrt(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn point(&self, ambient: &[f64]) -> Result<DVector<f64>> {
        let x = DVector::from_column_slice(ambient);
        self.check_point(&x)?;
        Ok(x)
    }

    /// Lifts spatial coordinates onto the upper sheet.
    pub fn lift(&self, spatial: &[f64]) -> Result<DVector<f64>> {
        if spatial.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: spatial.len(),
            });
        }
        let s2: f64 = spatial.iter().map(|v| v * v).sum();
        let mut x = DVector::zeros(self.dim + 1);
        x.rows_mut(0, self.dim).copy_from_slice(spatial);
        x[self.dim] = (self.radius * self.radius + s2).sqrt();
        Ok(x)
    }

    /// Rescales a future-timelike vector onto the hyperboloid.
    fn renormalize(&self, v: DVector<f64>) -> Result<DVector<f64>> {
        let q = -minkowski(&v, &v);
        if !(q > 0.0) || v[self.dim] <= 0.0 {
            return Err(Error::NotOnManifold {
                space: self.name(),
                reason: "vector is not future timelike".into(),
            });
        }
        Ok(v * (self.radius / q.sqrt()))
    }

    fn project_tangent(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        u + x * (minkowski(x, u) / (self.radius * self.radius))
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

    fn angle(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let diff = x - y;
        let q = minkowski(&diff, &diff).max(0.0);
        2.0 * (q.sqrt() / (2.0 * self.radius)).asinh()
    }
}

impl GeodesicSpace for Hyperbolic {
    type Point = DVector<f64>;

    fn name(&self) -> &'static str {
        "hyperboloid"
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::new(self.kappa, Some(self.dim))
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        self.check_dims(x)?;
        let r2 = self.radius * self.radius;
        let form = minkowski(x, x);
        let scale = r2.max(x.norm_squared());
        if !form.is_finite() || (form + r2).abs() > MEMBERSHIP_TOL * scale {
            return Err(Error::NotOnManifold {
                space: self.name(),
                reason: format!("Minkowski form {form} differs from {}", -r2),
            });
        }
        if x[self.dim] <= 0.0 {
            return Err(Error::NotOnManifold {
                space: self.name(),
                reason: "last coordinate must be positive".into(),
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
        if t == 0.0 {
            return Ok(x.clone());
        }
        if t == 1.0 {
            return Ok(y.clone());
        }
        let theta = self.angle(x, y);
        let v = x * sinh_ratio(1.0 - t, theta) + y * sinh_ratio(t, theta);
        self.renormalize(v)
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
        let d = self.distance(x, y)?;
        let c = -minkowski(x, y) / (self.radius * self.radius);
        let u = self.project_tangent(x, &(y - x * c));
        let un = minkowski(&u, &u).max(0.0).sqrt();
        if d == 0.0 || un == 0.0 {
            return Ok(TangentVector::zero(x.clone(), self.dim + 1));
        }
        Ok(TangentVector::new(x.clone(), u * (d / un)))
    }

    fn exp(&self, v: &TangentVector<DVector<f64>>) -> Result<DVector<f64>> {
        self.check_dims(&v.base)?;
        self.check_dims(&v.components)?;
        let x = &v.base;
        let u = self.project_tangent(x, &v.components);
        let s = minkowski(&u, &u).max(0.0).sqrt();
        if s == 0.0 {
            return Ok(x.clone());
        }
        let a = s / self.radius;
        self.renormalize(x * a.cosh() + u * (self.radius * a.sinh() / s))
    }

    fn inner(
        &self,
        u: &TangentVector<DVector<f64>>,
        v: &TangentVector<DVector<f64>>,
    ) -> Result<f64> {
        self.check_dims(&u.components)?;
        self.check_dims(&v.components)?;
        Ok(minkowski(&u.components, &v.components))
    }

    fn tangent_basis(&self, x: &DVector<f64>) -> Result<Vec<TangentVector<DVector<f64>>>> {
        self.check_dims(x)?;
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut e = DVector::zeros(self.dim + 1);
            e[i] = 1.0;
            let mut u = self.project_tangent(x, &e);
            for _ in 0..2 {
                for b in &basis {
                    let c = minkowski(b, &u);
                    u.axpy(-c, b, 1.0);
                }
            }
            let n = minkowski(&u, &u).max(0.0).sqrt();
            basis.push(u / n);
        }
        Ok(basis
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
