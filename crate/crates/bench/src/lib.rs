//! Fixtures shared by the benchmarks.

use hmc_core::surface::{builtin_surface, PoleAxis, SurfaceKind, SurfacePatch};

pub fn torus() -> SurfacePatch {
    builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap()
}

pub fn ellipsoid() -> SurfacePatch {
    builtin_surface(&SurfaceKind::EllipsoidTrig { a: 3.0, b: 2.0, c: 1.0, poles: PoleAxis::Z }).unwrap()
}
