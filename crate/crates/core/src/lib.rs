//! Barycenters (Fréchet means) in geodesic metric spaces with an upper
//! curvature bound.
//!
//! * [`geometry`]: the [`GeodesicSpace`] contract, curvature metadata and
//!   convex-domain validation.
//! * [`spaces`]: Euclidean space, spheres, hyperboloids, SPD matrices with
//!   the affine-invariant metric, and metric trees.
//! * [`solvers`]: iterated barycenters and empirical barycenter solvers.
//! * [`bounds`]: closed-form constants and finite-sample error bounds.
//! * [`estimators`]: bootstrap approximation with PAC budgets and the
//!   batch-of-batches estimator.
//! * [`mclab`]: seeded Monte Carlo experiments checking the bounds.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod geometry;
pub mod mclab;
pub mod rng;
pub mod solvers;
pub mod spaces;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{
    enclosing_ball, geodesic_speed_defect, max_admissible_epsilon, model_diameter, point_symmetry, project_to_ball, tangent_norm,
    validate_domain, ConvexDomainSpec, Diameter, DomainReport, GeodesicSpace, GeometrySpec,
    TangentVector,
};
pub use solvers::{
    empirical_barycenter, frechet_gradient, frechet_value, iterated_barycenter, Method,
    SolverOptions, SolverReport, StepSchedule,
};
