use super::{Domain, Surface};
use crate::error::{Error, Result};
use crate::jet::{cross3, dot3, Jet, Jet3};
use std::f64::consts::{FRAC_PI_2, PI};

/// Band around the toroidal coil
/// `c(t) = ((R + r cos qt) cos t, (R + r cos qt) sin t, r sin qt)`:
///
/// `alpha(t, v) = c(t) - v b(t) + (g(t) v^2/2 + eps 4 tau(t) v^3/6) n(t)`
///
/// with Frenet frame `(T, n, b)`, curvature `kappa`, torsion `tau` and
/// `g = kappa + 2 tau^2 / kappa`. Along `v = 0` the normal curvature of the
/// coil equals `K/H`, so the coil is a closed harmonic line. For `eps = 0`
/// the band is invariant under the half-turn `(x, y, z) -> (x, -y, -z)`,
/// which reverses the coil.
#[derive(Debug, Clone, Copy)]
pub struct HelixRibbon {
    pub big_r: f64,
    pub r: f64,
    pub turns: u32,
    pub epsilon: f64,
    pub width: f64,
}

impl HelixRibbon {
    pub fn new(big_r: f64, r: f64, turns: u32, epsilon: f64, width: f64) -> Result<Self> {
        let ok = r > 0.0 && big_r > r && turns >= 1 && width > 0.0 && epsilon.is_finite() && big_r.is_finite();
        if !ok {
            return Err(Error::InvalidParameters("helix ribbon requires R > r > 0, turns >= 1, width > 0".into()));
        }
        let s = Self { big_r, r, turns, epsilon, width };
        let min_kappa = (0..720).map(|i| s.kappa_tau(-PI + i as f64 * PI / 360.0).0).fold(f64::INFINITY, f64::min);
        if !(min_kappa > 1e-6) {
            return Err(Error::InvalidParameters("coil curvature vanishes".into()));
        }
        Ok(s)
    }

    /// `k`-th derivative of the coil, evaluated on a jet.
    fn coil_derivative(&self, k: u32, t: Jet) -> Jet3 {
        let q = self.turns as f64;
        let phase = k as f64 * FRAC_PI_2;
        let terms = [(self.big_r, 1.0), (0.5 * self.r, 1.0 + q), (0.5 * self.r, 1.0 - q)];
        let mut x = Jet::constant(0.0, t.order());
        let mut y = x;
        for (amp, w) in terms {
            let arg = t * w + phase;
            let scale = amp * w.powi(k as i32);
            x = x + arg.cos() * scale;
            y = y + arg.sin() * scale;
        }
        let z = (t * q + phase).sin() * (self.r * q.powi(k as i32));
        [x, y, z]
    }

    pub fn coil(&self, t: f64) -> [f64; 3] {
        self.coil_derivative(0, Jet::constant(t, 0)).map(|j| j.value())
    }

    /// Curvature and torsion of the coil at parameter `t`.
    pub fn kappa_tau(&self, t: f64) -> (f64, f64) {
        let (k, tau, ..) = self.frenet(Jet::constant(t, 0));
        (k.value(), tau.value())
    }

    /// Speed `|c'(t)|`.
    pub fn speed(&self, t: f64) -> f64 {
        let d1 = self.coil_derivative(1, Jet::constant(t, 0));
        dot3(&d1, &d1).value().sqrt()
    }

    /// `(kappa, tau, n, b)` as jets in `t`.
    fn frenet(&self, t: Jet) -> (Jet, Jet, Jet3, Jet3) {
        let d1 = self.coil_derivative(1, t);
        let d2 = self.coil_derivative(2, t);
        let d3 = self.coil_derivative(3, t);
        let speed = dot3(&d1, &d1).sqrt();
        let cr = cross3(&d1, &d2);
        let cr2 = dot3(&cr, &cr);
        let crn = cr2.sqrt();
        let kappa = crn / (speed * speed * speed);
        let tau = dot3(&cr, &d3) / cr2;
        let inv_b = crn.recip();
        let b = cr.map(|c| c * inv_b);
        let inv_s = speed.recip();
        let tt = d1.map(|c| c * inv_s);
        let n = cross3(&b, &tt);
        (kappa, tau, n, b)
    }
}

impl Surface for HelixRibbon {
    fn name(&self) -> String {
        format!("helix_ribbon(R={}, r={}, turns={}, epsilon={})", self.big_r, self.r, self.turns, self.epsilon)
    }

    fn domain(&self) -> Domain {
        Domain { u: [-PI, PI], v: [-self.width, self.width], periodic: [true, false] }
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let t = Jet::var_u(u, order);
        let v = Jet::var_v(v, order);
        let c = self.coil_derivative(0, t);
        let (kappa, tau, n, b) = self.frenet(t);
        let g = kappa + tau * tau * kappa.recip() * 2.0;
        let a = tau * (4.0 * self.epsilon);
        let w = g * v * v * 0.5 + a * v * v * v * (1.0 / 6.0);
        [0, 1, 2].map(|i| c[i] - v * b[i] + w * n[i])
    }
}
