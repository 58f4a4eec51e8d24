//! Three-arm star with `p` copies of each leaf, fed to the harmonic iterated
//! barycenter leaf by leaf. The iterate stays a fixed distance from the root
//! however large `p` is, while random orders approach it.

use rand::seq::SliceRandom;

use crate::error::Result;
use crate::exec::Execution;
use crate::geometry::GeodesicSpace;
use crate::mclab::stats;
use crate::rng;
use crate::solvers::{empirical_barycenter, iterated_barycenter, Method, SolverOptions, StepSchedule};
use crate::spaces::build_figure1_tree;

pub const PERMUTATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Row {
    pub p: usize,
    /// `d(b~_n, root)` for the order `A^p B^p C^p`.
    pub adversarial: f64,
    /// Distance of the exact empirical barycenter to the root.
    pub empirical: f64,
    /// Quantiles 0.5, 0.9 of the distance over random orders.
    pub perm_q50: f64,
    pub perm_q90: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Report {
    pub rows: Vec<Figure1Row>,
    /// `adversarial(100) >= 0.9 adversarial(10)` when both are on the grid.
    pub non_vanishing: Option<bool>,
}

pub fn figure1_regression(p_grid: &[usize], seed: u64, exec: Execution) -> Result<Figure1Report> {
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let (tree, list) = build_figure1_tree(p, [1.0; 3])?;
        let root = tree.node(0)?;
        let adv = iterated_barycenter(&tree, &list, &StepSchedule::Harmonic)?.result;
        let emp = empirical_barycenter(&tree, &list, Method::Exact, &SolverOptions::default())?.result;
        let perm = exec.try_map_indexed(PERMUTATIONS, |k| {
            let mut g = rng::stream(seed, ((p as u64) << 32) | k as u64);
            let mut order = list.clone();
            order.shuffle(&mut g);
            let b = iterated_barycenter(&tree, &order, &StepSchedule::Harmonic)?.result;
            tree.distance(&b, &root)
        })?;
        let q = stats::quantiles(&perm, &[0.5, 0.9]);
        rows.push(Figure1Row {
            p,
            adversarial: tree.distance(&adv, &root)?,
            empirical: tree.distance(&emp, &root)?,
            perm_q50: q[0],
            perm_q90: q[1],
        });
    }
    let at = |p: usize| rows.iter().find(|r| r.p == p).map(|r| r.adversarial);
    let non_vanishing = match (at(10), at(100)) {
        (Some(a10), Some(a100)) => Some(a100 >= 0.9 * a10),
        _ => None,
    };
    Ok(Figure1Report { rows, non_vanishing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adversarial_distance_is_a_third() {
        let r = figure1_regression(&[1, 10, 100], 1, Execution::Sequential).unwrap();
        for row in &r.rows {
            assert!((row.adversarial - 1.0 / 3.0).abs() < 1e-12, "p = {}", row.p);
            assert!(row.empirical < 1e-12);
        }
        assert_eq!(r.non_vanishing, Some(true));
        let last = r.rows.last().unwrap();
        assert!(last.perm_q50 < last.adversarial);
    }
}
