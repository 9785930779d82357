use super::{ChartPoint, Domain, HelixRibbon, Surface, SurfacePatch};
use crate::error::{Error, Result};
use crate::jet::{Jet, Jet3};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

fn uv(u: f64, v: f64, order: usize) -> (Jet, Jet) {
    (Jet::var_u(u, order), Jet::var_v(v, order))
}

/// Torus of revolution with tube radius `r` and center radius `big_r`.
///
/// `alpha(s, theta) = ((R + r cos s) cos theta, -(R + r cos s) sin theta, r sin s)`.
/// The azimuth runs clockwise so that the positive-frame normal points out of
/// the tube; with that orientation `e = -r` and `g = -cos s (R + r cos s)`.
#[derive(Debug, Clone, Copy)]
pub struct Torus {
    pub r: f64,
    pub big_r: f64,
}

impl Surface for Torus {
    fn name(&self) -> String {
        format!("torus(r={}, R={})", self.r, self.big_r)
    }

    fn domain(&self) -> Domain {
        Domain { u: [-PI, PI], v: [-PI, PI], periodic: [true, true] }
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let (s, t) = uv(u, v, order);
        let rho = s.cos() * self.r + self.big_r;
        [rho * t.cos(), -(rho * t.sin()), s.sin() * self.r]
    }

    fn locate(&self, p: Vec3) -> Option<ChartPoint> {
        let rho = p.x.hypot(p.y);
        Some([p.z.atan2(rho - self.big_r), (-p.y).atan2(p.x)])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sphere {
    pub radius: f64,
}

impl Surface for Sphere {
    fn name(&self) -> String {
        format!("sphere(radius={})", self.radius)
    }

    fn domain(&self) -> Domain {
        Domain { u: [-PI, PI], v: [-FRAC_PI_2 + 1e-3, FRAC_PI_2 - 1e-3], periodic: [true, false] }
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let (u, v) = uv(u, v, order);
        let cv = v.cos() * self.radius;
        [cv * u.cos(), cv * u.sin(), v.sin() * self.radius]
    }

    fn chart_quality(&self, _u: f64, v: f64) -> f64 {
        v.cos()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Cylinder {
    pub radius: f64,
}

impl Surface for Cylinder {
    fn name(&self) -> String {
        format!("cylinder(radius={})", self.radius)
    }

    fn domain(&self) -> Domain {
        Domain { u: [-PI, PI], v: [-10.0, 10.0], periodic: [true, false] }
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let (u, v) = uv(u, v, order);
        [u.cos() * self.radius, u.sin() * self.radius, v]
    }
}

/// Which coordinate axis carries the poles of a latitude/longitude chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleAxis {
    X,
    #[default]
    Z,
}

/// Latitude/longitude chart of the ellipsoid `x^2/a^2 + y^2/b^2 + z^2/c^2 = 1`.
/// Both pole placements give the outward normal.
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidTrig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub poles: PoleAxis,
}

/// Latitude band kept away from the chart poles.
const POLE_MARGIN: f64 = 1e-3;

impl Surface for EllipsoidTrig {
    fn name(&self) -> String {
        format!("ellipsoid_trig(a={}, b={}, c={}, poles={:?})", self.a, self.b, self.c, self.poles)
    }

    fn domain(&self) -> Domain {
        Domain { u: [-PI, PI], v: [-FRAC_PI_2 + POLE_MARGIN, FRAC_PI_2 - POLE_MARGIN], periodic: [true, false] }
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let (u, v) = uv(u, v, order);
        let cv = v.cos();
        match self.poles {
            PoleAxis::Z => [cv * u.cos() * self.a, cv * u.sin() * self.b, v.sin() * self.c],
            PoleAxis::X => [v.sin() * self.a, cv * u.cos() * self.b, cv * u.sin() * self.c],
        }
    }

    fn locate(&self, p: Vec3) -> Option<ChartPoint> {
        let (x, y, z) = (p.x / self.a, p.y / self.b, p.z / self.c);
        Some(match self.poles {
            PoleAxis::Z => [y.atan2(x), z.clamp(-1.0, 1.0).asin()],
            PoleAxis::X => [z.atan2(y), x.clamp(-1.0, 1.0).asin()],
        })
    }

    fn chart_quality(&self, _u: f64, v: f64) -> f64 {
        v.cos()
    }
}

/// Ellipsoidal-coordinate chart of the positive octant of the ellipsoid:
/// `x^2 = M(u,v,a) / W(a,b,c)` etc. with `M(u,v,w) = w^2 (u + w^2)(v + w^2)`,
/// `W(a,b,c) = (a^2 - b^2)(a^2 - c^2)`, `u in (-b^2, -c^2)`, `v in (-a^2, -b^2)`.
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidEllipsoidal {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EllipsoidEllipsoidal {
    /// `h(x) = (x + a^2)(x + b^2)(x + c^2)`.
    pub fn h(&self, x: f64) -> f64 {
        (x + self.a * self.a) * (x + self.b * self.b) * (x + self.c * self.c)
    }
}

impl Surface for EllipsoidEllipsoidal {
    fn name(&self) -> String {
        format!("ellipsoid_ellipsoidal(a={}, b={}, c={})", self.a, self.b, self.c)
    }

    fn domain(&self) -> Domain {
        let (a2, b2, c2) = (self.a * self.a, self.b * self.b, self.c * self.c);
        let eu = 1e-6 * (b2 - c2);
        let ev = 1e-6 * (a2 - b2);
        Domain::rect([-b2 + eu, -c2 - eu], [-a2 + ev, -b2 - ev])
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let (u, v) = uv(u, v, order);
        let (a2, b2, c2) = (self.a * self.a, self.b * self.b, self.c * self.c);
        let coord = |w2: f64, o1: f64, o2: f64| {
            let m = (u + w2) * (v + w2) * w2;
            let w = (w2 - o1) * (w2 - o2);
            (m * (1.0 / w)).sqrt()
        };
        [coord(a2, b2, c2), coord(b2, a2, c2), coord(c2, a2, b2)]
    }
}

/// Graph `z = h(x, y)` of a polynomial through degree 4:
///
/// ```text
/// h = kxx/2 x^2 + kxy x y + kyy/2 y^2
///   + a/6 x^3 + d/2 x^2 y + b/2 x y^2 + c/6 y^3
///   + A/24 x^4 + B/6 x^3 y + C/4 x^2 y^2 + D/6 x y^3 + E/24 y^4
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MongePolynomial {
    pub quadratic: [f64; 3],
    /// `[a, d, b, c]`
    pub cubic: [f64; 4],
    /// `[A, B, C, D, E]`
    pub quartic: [f64; 5],
    pub half_width: f64,
}

impl MongePolynomial {
    /// Umbilic normal form `k/2 (x^2 + y^2) + a/6 x^3 + b/2 x y^2 + c/6 y^3 + ...`.
    pub fn umbilic(k: f64, a: f64, b: f64, c: f64, quartic: [f64; 5]) -> Self {
        Self { quadratic: [k, 0.0, k], cubic: [a, 0.0, b, c], quartic, half_width: 0.5 }
    }

    /// Parabolic normal form `k/2 y^2 + a/6 x^3 + b/2 x y^2 + d/2 x^2 y + c/6 y^3 + ...`.
    pub fn parabolic(k: f64, a: f64, b: f64, c: f64, d: f64, quartic: [f64; 5]) -> Self {
        Self { quadratic: [0.0, 0.0, k], cubic: [a, d, b, c], quartic, half_width: 0.5 }
    }

    pub fn height(&self, x: Jet, y: Jet) -> Jet {
        let [kxx, kxy, kyy] = self.quadratic;
        let [a, d, b, c] = self.cubic;
        let [qa, qb, qc, qd, qe] = self.quartic;
        let (x2, y2) = (x * x, y * y);
        x2 * (kxx / 2.0)
            + x * y * kxy
            + y2 * (kyy / 2.0)
            + x2 * x * (a / 6.0)
            + x2 * y * (d / 2.0)
            + x * y2 * (b / 2.0)
            + y2 * y * (c / 6.0)
            + x2 * x2 * (qa / 24.0)
            + x2 * x * y * (qb / 6.0)
            + x2 * y2 * (qc / 4.0)
            + x * y2 * y * (qd / 6.0)
            + y2 * y2 * (qe / 24.0)
    }
}

impl Surface for MongePolynomial {
    fn name(&self) -> String {
        format!("monge(quadratic={:?}, cubic={:?}, quartic={:?})", self.quadratic, self.cubic, self.quartic)
    }

    fn domain(&self) -> Domain {
        let w = self.half_width;
        Domain::rect([-w, w], [-w, w])
    }

    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        let (x, y) = uv(u, v, order);
        [x, y, self.height(x, y)]
    }

    fn locate(&self, p: Vec3) -> Option<ChartPoint> {
        Some([p.x, p.y])
    }
}

/// Built-in surface kinds, as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    Torus {
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    Sphere {
        radius: f64,
    },
    Cylinder {
        radius: f64,
    },
    EllipsoidTrig {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default)]
        poles: PoleAxis,
    },
    EllipsoidEllipsoidal {
        a: f64,
        b: f64,
        c: f64,
    },
    MongeUmbilic {
        k: f64,
        a: f64,
        b: f64,
        c: f64,
        /// `[A, B, C, D, E]`
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quartic: Option<[f64; 5]>,
    },
    MongeParabolic {
        k: f64,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        /// `[A, B, C, D, E]`
        #[serde(default)]
        quartic: [f64; 5],
    },
    /// Surface carrying a closed harmonic line along a toroidal helix.
    HelixRibbon {
        #[serde(rename = "R")]
        big_r: f64,
        r: f64,
        turns: u32,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_ribbon_width")]
        width: f64,
    },
}

fn default_ribbon_width() -> f64 {
    0.1
}

/// A surface kind plus an optional chart-domain override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    #[serde(flatten)]
    pub kind: SurfaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainOverride {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

#[derive(Debug)]
struct Restricted<S> {
    inner: S,
    domain: Domain,
}

impl<S: Surface> Surface for Restricted<S> {
    fn name(&self) -> String {
        self.inner.name()
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        self.inner.expand(u, v, order)
    }
    fn exact_order(&self) -> usize {
        self.inner.exact_order()
    }
    fn locate(&self, p: Vec3) -> Option<ChartPoint> {
        self.inner.locate(p)
    }
    fn chart_quality(&self, u: f64, v: f64) -> f64 {
        self.inner.chart_quality(u, v)
    }
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<SurfacePatch> {
        let patch = builtin_surface(&self.kind)?;
        match self.domain {
            None => Ok(patch),
            Some(o) => {
                if !(o.u[0] < o.u[1] && o.v[0] < o.v[1]) {
                    return Err(Error::InvalidParameters("empty domain override".into()));
                }
                let mut domain = patch.domain();
                domain.u = o.u;
                domain.v = o.v;
                Ok(SurfacePatch::new(Restricted { inner: PatchSurface(patch), domain }))
            }
        }
    }
}

#[derive(Debug)]
struct PatchSurface(SurfacePatch);

impl Surface for PatchSurface {
    fn name(&self) -> String {
        self.0.name()
    }
    fn domain(&self) -> Domain {
        self.0.domain()
    }
    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3 {
        self.0.expand([u, v], order)
    }
    fn exact_order(&self) -> usize {
        self.0.surface().exact_order()
    }
    fn locate(&self, p: Vec3) -> Option<ChartPoint> {
        self.0.locate(p)
    }
    fn chart_quality(&self, u: f64, v: f64) -> f64 {
        self.0.chart_quality([u, v])
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg.to_string()))
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Constructs a built-in surface with exact derivative evaluators.
pub fn builtin_surface(kind: &SurfaceKind) -> Result<SurfacePatch> {
    Ok(match *kind {
        SurfaceKind::Torus { r, big_r } => {
            check(positive(r) && big_r.is_finite() && big_r > r, "torus requires R > r > 0")?;
            SurfacePatch::new(Torus { r, big_r })
        }
        SurfaceKind::Sphere { radius } => {
            check(positive(radius), "sphere requires radius > 0")?;
            SurfacePatch::new(Sphere { radius })
        }
        SurfaceKind::Cylinder { radius } => {
            check(positive(radius), "cylinder requires radius > 0")?;
            SurfacePatch::new(Cylinder { radius })
        }
        SurfaceKind::EllipsoidTrig { a, b, c, poles } => {
            check(positive(c) && b > c && a > b && a.is_finite(), "ellipsoid requires a > b > c > 0")?;
            SurfacePatch::new(EllipsoidTrig { a, b, c, poles })
        }
        SurfaceKind::EllipsoidEllipsoidal { a, b, c } => {
            check(positive(c) && b > c && a > b && a.is_finite(), "ellipsoid requires a > b > c > 0")?;
            SurfacePatch::new(EllipsoidEllipsoidal { a, b, c })
        }
        SurfaceKind::MongeUmbilic { k, a, b, c, quartic } => {
            check([k, a, b, c].iter().all(|x| x.is_finite()), "non-finite coefficient")?;
            SurfacePatch::new(MongePolynomial::umbilic(k, a, b, c, quartic.unwrap_or_default()))
        }
        SurfaceKind::MongeParabolic { k, a, b, c, d, quartic } => {
            check([k, a, b, c, d].iter().chain(quartic.iter()).all(|x| x.is_finite()), "non-finite coefficient")?;
            SurfacePatch::new(MongePolynomial::parabolic(k, a, b, c, d, quartic))
        }
        SurfaceKind::HelixRibbon { big_r, r, turns, epsilon, width } => {
            SurfacePatch::new(HelixRibbon::new(big_r, r, turns, epsilon, width)?)
        }
    })
}
