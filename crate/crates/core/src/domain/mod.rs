//! Grids, fields, weighted norms and run configuration.

mod config;
mod field;
mod lambda;
mod norms;
mod pgrid;
mod sphere;

pub use config::RunConfig;
pub use field::{ComplexField2D, ScatteringData};
pub use lambda::{LambdaGrid, Side};
pub use norms::{sup_norm_me, triple_norm, weighted_sup_norm_p};
pub use pgrid::PGrid;
pub use sphere::{InterpWeights, SphereGrid, SphereScheme};
