//! Row encodings of points for CSV files: Euclidean `d` columns; sphere and
//! hyperboloid `d+1` ambient columns; SPD `d^2` row-major columns; tree
//! loci `edge_id,offset`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::GeodesicSpace;
use crate::spaces::{Euclidean, Hyperbolic, MetricTree, Spd, Sphere, TreeLocus};

pub trait PointFormat: GeodesicSpace {
    /// Number of columns per row.
    fn columns(&self) -> usize;

    /// Parses and validates one row.
    fn point_from_row(&self, row: &[f64]) -> Result<Self::Point>;

    fn point_to_row(&self, p: &Self::Point) -> Vec<f64>;
}

fn check_len(expected: usize, row: &[f64]) -> Result<()> {
    if row.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: row.len(),
        });
    }
    Ok(())
}

fn vector_point<S: GeodesicSpace<Point = DVector<f64>>>(
    space: &S,
    cols: usize,
    row: &[f64],
) -> Result<DVector<f64>> {
    check_len(cols, row)?;
    let x = DVector::from_column_slice(row);
    space.check_point(&x)?;
    Ok(x)
}

impl PointFormat for Euclidean {
    fn columns(&self) -> usize {
        self.dim()
    }

    fn point_from_row(&self, row: &[f64]) -> Result<DVector<f64>> {
        vector_point(self, self.columns(), row)
    }

    fn point_to_row(&self, p: &DVector<f64>) -> Vec<f64> {
        p.iter().copied().collect()
    }
}

impl PointFormat for Sphere {
    fn columns(&self) -> usize {
        self.dim() + 1
    }

    fn point_from_row(&self, row: &[f64]) -> Result<DVector<f64>> {
        vector_point(self, self.columns(), row)
    }

    fn point_to_row(&self, p: &DVector<f64>) -> Vec<f64> {
        p.iter().copied().collect()
    }
}

impl PointFormat for Hyperbolic {
    fn columns(&self) -> usize {
        self.dim() + 1
    }

    fn point_from_row(&self, row: &[f64]) -> Result<DVector<f64>> {
        vector_point(self, self.columns(), row)
    }

    fn point_to_row(&self, p: &DVector<f64>) -> Vec<f64> {
        p.iter().copied().collect()
    }
}

impl PointFormat for Spd {
    fn columns(&self) -> usize {
        self.dim() * self.dim()
    }

    fn point_from_row(&self, row: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.columns(), row)?;
        self.point(row)
    }

    fn point_to_row(&self, p: &DMatrix<f64>) -> Vec<f64> {
        p.transpose().iter().copied().collect()
    }
}

impl PointFormat for MetricTree {
    fn columns(&self) -> usize {
        2
    }

    fn point_from_row(&self, row: &[f64]) -> Result<TreeLocus> {
        check_len(2, row)?;
        let edge = row[0];
        if !(edge >= 0.0 && edge.fract() == 0.0) {
            return Err(Error::param("edge_id", format!("not an edge index: {edge}")));
        }
        self.locus(edge as usize, row[1])
    }

    fn point_to_row(&self, p: &TreeLocus) -> Vec<f64> {
        vec![p.edge as f64, p.offset]
    }
}
