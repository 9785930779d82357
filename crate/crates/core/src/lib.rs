//! Harmonic-mean-curvature line configurations on parametrized surfaces.

pub mod dynamics;
pub mod error;
pub mod jet;
pub mod mean_field;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod singularity;
pub mod surface;
pub mod svg;
pub mod sweep;
pub mod tracer;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
