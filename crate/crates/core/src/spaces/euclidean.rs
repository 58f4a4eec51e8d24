use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{GeodesicSpace, GeometrySpec, TangentVector};

/// Flat space `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be at least 1"));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, coords: &[f64]) -> Result<DVector<f64>> {
        let x = DVector::from_column_slice(coords);
        self.check_point(&x)?;
        Ok(x)
    }

    fn check_pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        for v in [x, y] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

impl GeodesicSpace for Euclidean {
    type Point = DVector<f64>;

    fn name(&self) -> &'static str {
        "euclidean space"
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::new(0.0, Some(self.dim))
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NotOnManifold {
                space: self.name(),
                reason: "non-finite coordinate".into(),
            });
        }
        Ok(())
    }

    fn distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok((x - y).norm())
    }

    fn interpolate(&self, x: &DVector<f64>, y: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        self.check_pair(x, y)?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        if t == 1.0 {
            return Ok(y.clone());
        }
        Ok(x + (y - x) * t)
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn has_constant_curvature(&self) -> bool {
        true
    }

    fn log(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<TangentVector<DVector<f64>>> {
        self.check_pair(x, y)?;
        Ok(TangentVector::new(x.clone(), y - x))
    }

    fn exp(&self, v: &TangentVector<DVector<f64>>) -> Result<DVector<f64>> {
        self.check_pair(&v.base, &v.components)?;
        Ok(&v.base + &v.components)
    }

    fn inner(
        &self,
        u: &TangentVector<DVector<f64>>,
        v: &TangentVector<DVector<f64>>,
    ) -> Result<f64> {
        self.check_pair(&u.components, &v.components)?;
        Ok(u.components.dot(&v.components))
    }

    fn tangent_basis(&self, x: &DVector<f64>) -> Result<Vec<TangentVector<DVector<f64>>>> {
        self.check_point(x)?;
        Ok((0..self.dim)
            .map(|i| TangentVector::new(x.clone(), DVector::from_fn(self.dim, |j, _| (i == j) as u8 as f64)))
            .collect())
    }

    /// Weighted coordinate mean.
    fn exact_barycenter(&self, points: &[DVector<f64>], weights: &[f64]) -> Result<DVector<f64>> {
        let total = check_weights(points.len(), weights)?;
        let mut acc = DVector::zeros(self.dim);
        for (p, &w) in points.iter().zip(weights) {
            self.check_point(p)?;
            acc.axpy(w, p, 1.0);
        }
        Ok(acc / total)
    }

    fn base_point(&self) -> DVector<f64> {
        DVector::zeros(self.dim)
    }
}

pub(crate) fn check_weights(n: usize, weights: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("point list"));
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::param("weights", "weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::param("weights", "weights must not all be zero"));
    }
    Ok(total)
}
