//! Umbilic and parabolic points of the harmonic line fields.

pub mod graph;
pub mod parabolic;
pub mod umbilic;

pub use graph::{frame_along, graph_jet, invert_map, TangentFrame};
pub use parabolic::*;
pub use umbilic::*;
