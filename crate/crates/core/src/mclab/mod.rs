//! Seeded Monte Carlo experiments: samplers with known barycenters, replicate
//! sweeps compared against the bounds, and the star-tree counterexample.

pub mod experiment;
pub mod figure1;
pub mod samplers;
pub mod stats;

pub use experiment::{
    check_tail_coverage, run_error_experiment, run_with, CheckKind, CoverageReport,
    ExperimentConfig, ExperimentOutcome, SummaryRow,
};
pub use figure1::{figure1_regression, Figure1Report, Figure1Row};
pub use samplers::{estimate_total_variance, sample_tree_leaves, sample_uniform_cap, Sampler};
