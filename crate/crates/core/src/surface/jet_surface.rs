use super::{ChartPoint, Domain, Jet2, Surface, SurfacePatch};
use crate::jet::{Jet, Jet3};
use crate::vec3::Vec3;
use std::fmt;
use std::sync::Arc;

/// User-supplied 2-jet evaluator: position and derivatives through order 2.
pub type Jet2Fn = Arc<dyn Fn(f64, f64) -> Jet2 + Send + Sync>;

/// A surface known only through its 2-jet. Curvature-field derivatives on
/// such a surface are formed by finite differences.
#[derive(Clone)]
pub struct JetSurface {
    name: String,
    domain: Domain,
    eval: Jet2Fn,
}

impl fmt::Debug for JetSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSurface").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl JetSurface {
    pub fn new(name: impl Into<String>, domain: Domain, eval: Jet2Fn) -> Self {
        Self { name: name.into(), domain, eval }
    }

    /// Forgets everything but the 2-jet of an existing patch.
    pub fn from_surface(patch: SurfacePatch) -> Self {
        let name = format!("{} [2-jet]", patch.name());
        let domain = patch.domain();
        Self::new(name, domain, Arc::new(move |u, v| patch.jet2([u, v])))
    }
}

impl Surface for JetSurface {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    /// Coefficients above order 2 are left at zero.
    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let j = (self.eval)(u, v);
        let comp = |sel: fn(Vec3) -> f64| {
            Jet::from_coeffs(order, |i, k| match (i, k) {
                (0, 0) => sel(j.pos),
                (1, 0) => sel(j.du),
                (0, 1) => sel(j.dv),
                (2, 0) => 0.5 * sel(j.duu),
                (1, 1) => sel(j.duv),
                (0, 2) => 0.5 * sel(j.dvv),
                _ => 0.0,
            })
        };
        [comp(|p| p.x), comp(|p| p.y), comp(|p| p.z)]
    }

    fn exact_order(&self) -> usize {
        2
    }

    fn locate(&self, _p: Vec3) -> Option<ChartPoint> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{builtin_surface, forms_jet, SurfaceKind};

    #[test]
    fn finite_differences_track_exact_derivatives() {
        let exact =
            builtin_surface(&SurfaceKind::EllipsoidTrig { a: 3.0, b: 2.0, c: 1.0, poles: Default::default() }).unwrap();
        let approx = SurfacePatch::new(JetSurface::from_surface(exact.clone()));
        let p = [0.4, 0.3];
        let a = forms_jet(&exact, p, 2).unwrap();
        let b = forms_jet(&approx, p, 2).unwrap();
        let (ka, ha) = a.gauss_mean();
        let (kb, hb) = b.gauss_mean();
        for (i, j) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            assert!((ka.partial(i, j) - kb.partial(i, j)).abs() < 1e-6, "K_{i}{j}");
            assert!((ha.partial(i, j) - hb.partial(i, j)).abs() < 1e-6, "H_{i}{j}");
        }
    }
}
