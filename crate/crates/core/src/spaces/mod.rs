//! Concrete geodesic spaces.

pub mod euclidean;
pub mod format;
pub mod hyperbolic;
pub mod spd;
pub mod sphere;
pub mod tree;

pub use euclidean::Euclidean;
pub use hyperbolic::Hyperbolic;
pub use spd::Spd;
pub use sphere::Sphere;
pub use tree::{build_figure1_tree, MetricTree, TreeEdge, TreeLocus};
pub use format::PointFormat;
