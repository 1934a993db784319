pub mod data;
pub mod eval;
pub mod gaussian;
pub mod semantic;
pub mod sr_graph;
pub mod synthetic;
pub mod truelearn;

/// Version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
