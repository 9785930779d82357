//! Return maps, cycle hyperbolicity and rotation numbers.

pub mod poincare;
pub mod rotation;

pub use poincare::*;
pub use rotation::*;
