use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{GeodesicSpace, GeometrySpec, TangentVector};

pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues below this fraction of the largest one are rejected.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Symmetric positive definite `d x d` matrices with the affine-invariant
/// metric `d(A, B) = |log(A^{-1/2} B A^{-1/2})|_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spd {
    dim: usize,
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Applies a scalar function to a symmetric matrix through its spectrum.
fn spectral_map(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let q = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(q * d * q.transpose())
}

/// Eigendecomposition of an SPD matrix, rejecting near-singular input.
fn spd_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || !max.is_finite() || min <= EIGEN_FLOOR * max {
        return Err(Error::NotPositiveDefinite(format!(
            "eigenvalues in [{min:e}, {max:e}]"
        )));
    }
    Ok(eig)
}

/// Square root and inverse square root of an SPD matrix.
fn sqrt_and_inv_sqrt(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = spd_eigen(a)?;
    Ok((spectral_map(&eig, f64::sqrt), spectral_map(&eig, |l| 1.0 / l.sqrt())))
}

/// Symmetric-matrix logarithm (requires SPD input).
pub fn spd_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(spectral_map(&spd_eigen(a)?, f64::ln))
}

/// Symmetric-matrix exponential.
pub fn sym_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(&SymmetricEigen::new(symmetrize(a.clone())), f64::exp)
}

fn whiten(inv_sqrt: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(inv_sqrt * b * inv_sqrt)
}

impl Spd {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be at least 1"));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Builds a point from `d^2` row-major entries.
    pub fn point(&self, row_major: &[f64]) -> Result<DMatrix<f64>> {
        if row_major.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim * self.dim,
                got: row_major.len(),
            });
        }
        let a = DMatrix::from_row_slice(self.dim, self.dim, row_major);
        self.check_point(&a)?;
        Ok(a)
    }

    fn check_shape(&self, a: &DMatrix<f64>) -> Result<()> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: a.nrows().max(a.ncols()),
            });
        }
        Ok(())
    }

    fn to_matrix(&self, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        if v.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim * self.dim,
                got: v.len(),
            });
        }
        Ok(symmetrize(DMatrix::from_column_slice(self.dim, self.dim, v.as_slice())))
    }

    fn to_components(m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_column_slice(m.as_slice())
    }

    /// Tangent vector at `base` from a symmetric matrix.
    pub fn tangent(&self, base: &DMatrix<f64>, m: &DMatrix<f64>) -> TangentVector<DMatrix<f64>> {
        TangentVector::new(base.clone(), Self::to_components(&symmetrize(m.clone())))
    }

    pub fn tangent_matrix(&self, v: &TangentVector<DMatrix<f64>>) -> Result<DMatrix<f64>> {
        self.to_matrix(&v.components)
    }
}

impl GeodesicSpace for Spd {
    type Point = DMatrix<f64>;

    fn name(&self) -> &'static str {
        "SPD manifold"
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::new(0.0, Some(self.dim * (self.dim + 1) / 2))
    }

    fn check_point(&self, a: &DMatrix<f64>) -> Result<()> {
        self.check_shape(a)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entry".into()));
        }
        let scale = a.amax().max(1.0);
        let asym = (a - a.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotPositiveDefinite(format!(
                "asymmetry {asym:e} exceeds tolerance"
            )));
        }
        spd_eigen(a).map(|_| ())
    }

    fn distance(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let (_, inv_sqrt) = sqrt_and_inv_sqrt(a)?;
        let eig = spd_eigen(&whiten(&inv_sqrt, b))?;
        Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
    }

    fn interpolate(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        if t == 0.0 {
            return Ok(a.clone());
        }
        if t == 1.0 {
            return Ok(b.clone());
        }
        let (sqrt, inv_sqrt) = sqrt_and_inv_sqrt(a)?;
        let eig = spd_eigen(&whiten(&inv_sqrt, b))?;
        let mid = spectral_map(&eig, |l| l.powf(t));
        Ok(symmetrize(&sqrt * mid * &sqrt))
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn log(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<TangentVector<DMatrix<f64>>> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let (sqrt, inv_sqrt) = sqrt_and_inv_sqrt(a)?;
        let inner_log = spd_log(&whiten(&inv_sqrt, b))?;
        Ok(TangentVector::new(
            a.clone(),
            Self::to_components(&symmetrize(&sqrt * inner_log * &sqrt)),
        ))
    }

    fn exp(&self, v: &TangentVector<DMatrix<f64>>) -> Result<DMatrix<f64>> {
        self.check_shape(&v.base)?;
        let m = self.to_matrix(&v.components)?;
        let (sqrt, inv_sqrt) = sqrt_and_inv_sqrt(&v.base)?;
        let e = sym_exp(&whiten(&inv_sqrt, &m));
        Ok(symmetrize(&sqrt * e * &sqrt))
    }

    fn inner(
        &self,
        u: &TangentVector<DMatrix<f64>>,
        v: &TangentVector<DMatrix<f64>>,
    ) -> Result<f64> {
        self.check_shape(&u.base)?;
        let (_, inv_sqrt) = sqrt_and_inv_sqrt(&u.base)?;
        let wu = whiten(&inv_sqrt, &self.to_matrix(&u.components)?);
        let wv = whiten(&inv_sqrt, &self.to_matrix(&v.components)?);
        Ok(wu.dot(&wv))
    }

    fn tangent_basis(&self, a: &DMatrix<f64>) -> Result<Vec<TangentVector<DMatrix<f64>>>> {
        self.check_shape(a)?;
        let (sqrt, _) = sqrt_and_inv_sqrt(a)?;
        let d = self.dim;
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                let mut e = DMatrix::zeros(d, d);
                if i == j {
                    e[(i, i)] = 1.0;
                } else {
                    e[(i, j)] = std::f64::consts::FRAC_1_SQRT_2;
                    e[(j, i)] = std::f64::consts::FRAC_1_SQRT_2;
                }
                out.push(self.tangent(a, &(&sqrt * e * &sqrt)));
            }
        }
        Ok(out)
    }

    fn base_point(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn diagonal_distance() {
        let s = Spd::new(2).unwrap();
        let d = s.distance(&diag(&[1.0, 1.0]), &diag(&[E * E, 1.0])).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
    }

    #[test]
    fn commuting_midpoint_is_geometric_mean() {
        let s = Spd::new(2).unwrap();
        let m = s.interpolate(&diag(&[1.0, 4.0]), &diag(&[4.0, 1.0]), 0.5).unwrap();
        assert!((m - diag(&[2.0, 2.0])).amax() < 1e-14);
    }

    #[test]
    fn exp_at_identity() {
        let s = Spd::new(2).unwrap();
        let id = s.base_point();
        let v = s.tangent(&id, &diag(&[2.0, 0.0]));
        let p = s.exp(&v).unwrap();
        assert!((p - diag(&[E * E, 1.0])).amax() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let s = Spd::new(2).unwrap();
        assert!(matches!(
            s.point(&[1.0, 2.0, 2.0, 1.0]),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(s.point(&[1.0, 0.1, 0.0, 1.0]).is_err());
        assert!(s.point(&[1.0, 0.0, 0.0, 1e-14]).is_err());
        assert!(s.point(&[2.0, 0.5, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn log_norm_equals_distance() {
        let s = Spd::new(3).unwrap();
        let a = s.point(&[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5]).unwrap();
        let b = s.point(&[1.0, -0.4, 0.0, -0.4, 3.0, 0.5, 0.0, 0.5, 0.7]).unwrap();
        let v = s.log(&a, &b).unwrap();
        let n = s.inner(&v, &v).unwrap().sqrt();
        assert!((n - s.distance(&a, &b).unwrap()).abs() < 1e-10);
        let back = s.exp(&v).unwrap();
        assert!((back - &b).amax() < 1e-10);
    }
}
