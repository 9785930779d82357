//! Parametrized surface patches, fundamental forms and curvature functions.

mod builtin;
mod jet_surface;
mod ribbon;

pub use builtin::{
    builtin_surface, Cylinder, DomainOverride, EllipsoidEllipsoidal, EllipsoidTrig, MongePolynomial, PoleAxis, Sphere,
    SurfaceKind, SurfaceSpec, Torus,
};
pub use jet_surface::{Jet2Fn, JetSurface};
pub use ribbon::HelixRibbon;

use crate::error::{Error, Result};
use crate::jet::{cross3, dot3, Jet, Jet3};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Chart coordinates `(u, v)`.
pub type ChartPoint = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub periodic: [bool; 2],
}

impl Domain {
    pub fn rect(u: [f64; 2], v: [f64; 2]) -> Self {
        Self { u, v, periodic: [false, false] }
    }

    /// Periodic coordinates are unbounded (they are unwrapped by callers).
    pub fn contains(&self, p: ChartPoint) -> bool {
        let inside = |x: f64, r: [f64; 2], per: bool| per || (x >= r[0] && x <= r[1]);
        p[0].is_finite()
            && p[1].is_finite()
            && inside(p[0], self.u, self.periodic[0])
            && inside(p[1], self.v, self.periodic[1])
    }

    pub fn wrap(&self, p: ChartPoint) -> ChartPoint {
        let w = |x: f64, r: [f64; 2], per: bool| {
            if !per {
                return x;
            }
            let span = r[1] - r[0];
            let mut t = (x - r[0]) % span;
            if t < 0.0 {
                t += span;
            }
            r[0] + t
        };
        [w(p[0], self.u, self.periodic[0]), w(p[1], self.v, self.periodic[1])]
    }

    pub fn period(&self, axis: usize) -> Option<f64> {
        let r = if axis == 0 { self.u } else { self.v };
        self.periodic[axis].then(|| r[1] - r[0])
    }
}

/// An analytic chart of an immersed surface.
///
/// Implementors return the Taylor expansion of the embedding about a chart
/// point. Closed-form parametrizations evaluate themselves on [`Jet`]
/// inputs, which yields exact partial derivatives through order 4.
pub trait Surface: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn domain(&self) -> Domain;

    /// Taylor expansion of the embedding about `(u, v)`, truncated at `order`.
    fn expand(&self, u: f64, v: f64, order: usize) -> Jet3;

    /// Order through which `expand` is exact. Below 4, curvature-field
    /// derivatives are formed by finite differences (see [`forms_jet`]).
    fn exact_order(&self) -> usize {
        4
    }

    /// Inverse chart map, when available.
    fn locate(&self, _p: Vec3) -> Option<ChartPoint> {
        None
    }

    /// How well-conditioned the chart is at a point, in `[0, 1]`.
    fn chart_quality(&self, _u: f64, _v: f64) -> f64 {
        1.0
    }
}

/// Position and derivatives of the embedding up to order 2.
#[derive(Debug, Clone, Copy)]
pub struct Jet2 {
    pub pos: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
    pub duu: Vec3,
    pub duv: Vec3,
    pub dvv: Vec3,
}

impl Jet2 {
    pub fn from_expansion(e: &Jet3) -> Self {
        let pick = |i, j| Vec3::new(e[0].partial(i, j), e[1].partial(i, j), e[2].partial(i, j));
        Self { pos: pick(0, 0), du: pick(1, 0), dv: pick(0, 1), duu: pick(2, 0), duv: pick(1, 1), dvv: pick(0, 2) }
    }

    /// Unit normal of the positive frame `{alpha_u, alpha_v, N}`.
    pub fn normal(&self) -> Option<Vec3> {
        self.du.cross(self.dv).normalized()
    }
}

/// Shared handle to an immersed surface chart. Cheap to clone, immutable.
#[derive(Clone)]
pub struct SurfacePatch {
    inner: Arc<dyn Surface>,
}

impl fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurfacePatch({})", self.inner.name())
    }
}

impl SurfacePatch {
    pub fn new(surface: impl Surface + 'static) -> Self {
        Self { inner: Arc::new(surface) }
    }

    pub fn from_arc(inner: Arc<dyn Surface>) -> Self {
        Self { inner }
    }

    pub fn surface(&self) -> &dyn Surface {
        self.inner.as_ref()
    }

    pub fn name(&self) -> String {
        self.inner.name()
    }

    pub fn domain(&self) -> Domain {
        self.inner.domain()
    }

    pub fn expand(&self, p: ChartPoint, order: usize) -> Jet3 {
        self.inner.expand(p[0], p[1], order)
    }

    pub fn position(&self, p: ChartPoint) -> Vec3 {
        let e = self.inner.expand(p[0], p[1], 0);
        Vec3::new(e[0].value(), e[1].value(), e[2].value())
    }

    pub fn jet2(&self, p: ChartPoint) -> Jet2 {
        Jet2::from_expansion(&self.inner.expand(p[0], p[1], 2))
    }

    pub fn normal(&self, p: ChartPoint) -> Option<Vec3> {
        self.jet2(p).normal()
    }

    /// Maps a chart tangent vector to 3-space.
    pub fn push_forward(&self, p: ChartPoint, w: [f64; 2]) -> Vec3 {
        let j = self.jet2(p);
        j.du * w[0] + j.dv * w[1]
    }

    pub fn contains(&self, p: ChartPoint) -> bool {
        self.domain().contains(p)
    }

    pub fn locate(&self, x: Vec3) -> Option<ChartPoint> {
        self.inner.locate(x)
    }

    pub fn chart_quality(&self, p: ChartPoint) -> f64 {
        self.inner.chart_quality(p[0], p[1])
    }
}

/// First and second fundamental form coefficients at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    #[serde(rename = "E")]
    pub big_e: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    #[serde(rename = "G")]
    pub big_g: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FundamentalForms {
    pub fn metric_det(&self) -> f64 {
        self.big_e * self.big_g - self.big_f * self.big_f
    }

    pub fn first(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.big_e * a[0] * b[0] + self.big_f * (a[0] * b[1] + a[1] * b[0]) + self.big_g * a[1] * b[1]
    }

    pub fn second(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.e * a[0] * b[0] + self.f * (a[0] * b[1] + a[1] * b[0]) + self.g * a[1] * b[1]
    }

    pub fn norm(&self, w: [f64; 2]) -> f64 {
        self.first(w, w).max(0.0).sqrt()
    }

    pub fn normalize(&self, w: [f64; 2]) -> [f64; 2] {
        let n = self.norm(w);
        [w[0] / n, w[1] / n]
    }

    /// Rotation by +pi/2 in the tangent plane oriented by the normal
    /// (`w -> N x w`), in chart components.
    pub fn rotate_quarter(&self, w: [f64; 2]) -> [f64; 2] {
        let s = self.metric_det().sqrt();
        [-(self.big_f * w[0] + self.big_g * w[1]) / s, (self.big_e * w[0] + self.big_f * w[1]) / s]
    }

    /// Signed metric angle from `a` to `b`.
    pub fn angle(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let cos = self.first(a, b);
        let sin = self.first(self.rotate_quarter(a), b);
        sin.atan2(cos)
    }
}

pub fn forms_from_jet2(j: &Jet2, at: ChartPoint) -> Result<FundamentalForms> {
    let big_e = j.du.dot(j.du);
    let big_f = j.du.dot(j.dv);
    let big_g = j.dv.dot(j.dv);
    let det = big_e * big_g - big_f * big_f;
    let scale = (big_e * big_g).max(f64::MIN_POSITIVE);
    if !(det > 1e-14 * scale) || !det.is_finite() {
        return Err(Error::DegenerateJet { u: at[0], v: at[1], det });
    }
    let n = j.du.cross(j.dv) * (1.0 / det.sqrt());
    Ok(FundamentalForms { big_e, big_f, big_g, e: n.dot(j.duu), f: n.dot(j.duv), g: n.dot(j.dvv) })
}

/// First and second fundamental forms at a chart point. The normal is
/// `(alpha_u x alpha_v) / |alpha_u x alpha_v|`.
pub fn fundamental_forms(patch: &SurfacePatch, p: ChartPoint) -> Result<FundamentalForms> {
    forms_from_jet2(&patch.jet2(p), p)
}

/// Taylor expansions of the six form coefficients about a point.
#[derive(Debug, Clone, Copy)]
pub struct FormsJet {
    pub big_e: Jet,
    pub big_f: Jet,
    pub big_g: Jet,
    pub e: Jet,
    pub f: Jet,
    pub g: Jet,
}

impl FormsJet {
    pub fn at_base(&self) -> FundamentalForms {
        FundamentalForms {
            big_e: self.big_e.value(),
            big_f: self.big_f.value(),
            big_g: self.big_g.value(),
            e: self.e.value(),
            f: self.f.value(),
            g: self.g.value(),
        }
    }

    /// Gaussian and mean curvature as jets.
    pub fn gauss_mean(&self) -> (Jet, Jet) {
        let det = self.big_e * self.big_g - self.big_f * self.big_f;
        let inv = det.recip();
        let k = (self.e * self.g - self.f * self.f) * inv;
        let h = (self.e * self.big_g - self.f * self.big_f * 2.0 + self.g * self.big_e) * inv * 0.5;
        (k, h)
    }

    fn from_fn(order: usize, f: impl Fn(usize) -> Jet) -> Self {
        let _ = order;
        Self { big_e: f(0), big_f: f(1), big_g: f(2), e: f(3), f: f(4), g: f(5) }
    }
}

/// Finite-difference step for curvature-field derivatives on surfaces that
/// only supply a 2-jet.
pub fn fd_step(x: f64) -> f64 {
    x.abs().max(1.0) * 2.5e-4
}

/// Form coefficients as jets of order `order` (at most 2).
///
/// Exact when the surface supplies derivatives through `order + 2`;
/// otherwise the coefficient fields are differenced with 4th-order central
/// stencils of step [`fd_step`].
pub fn forms_jet(patch: &SurfacePatch, p: ChartPoint, order: usize) -> Result<FormsJet> {
    assert!(order <= 2);
    if patch.surface().exact_order() >= order + 2 {
        let a = patch.expand(p, order + 2);
        let au = [a[0].d_u(), a[1].d_u(), a[2].d_u()];
        let av = [a[0].d_v(), a[1].d_v(), a[2].d_v()];
        let auu = [au[0].d_u(), au[1].d_u(), au[2].d_u()];
        let auv = [au[0].d_v(), au[1].d_v(), au[2].d_v()];
        let avv = [av[0].d_v(), av[1].d_v(), av[2].d_v()];
        let au = au.map(|j| j.truncate(order));
        let av = av.map(|j| j.truncate(order));
        let big_e = dot3(&au, &au);
        let big_f = dot3(&au, &av);
        let big_g = dot3(&av, &av);
        let det = big_e * big_g - big_f * big_f;
        if !(det.value() > 0.0) {
            return Err(Error::DegenerateJet { u: p[0], v: p[1], det: det.value() });
        }
        let n = cross3(&au, &av);
        let inv = det.sqrt().recip();
        let n = n.map(|c| c * inv);
        return Ok(FormsJet { big_e, big_f, big_g, e: dot3(&n, &auu), f: dot3(&n, &auv), g: dot3(&n, &avv) });
    }
    // Finite differences on the six scalar coefficient fields.
    let base = fundamental_forms(patch, p)?;
    let vals = |f: &FundamentalForms| [f.big_e, f.big_f, f.big_g, f.e, f.f, f.g];
    let b = vals(&base);
    let hu = fd_step(p[0]);
    let hv = fd_step(p[1]);
    let at = |du: f64, dv: f64| -> Result<[f64; 6]> { Ok(vals(&fundamental_forms(patch, [p[0] + du, p[1] + dv])?)) };
    let d1 = |fp2: f64, fp1: f64, fm1: f64, fm2: f64, h: f64| (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    let d2 = |fp2: f64, fp1: f64, f0: f64, fm1: f64, fm2: f64, h: f64| {
        (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h)
    };
    let (up2, up1, um1, um2) = (at(2.0 * hu, 0.0)?, at(hu, 0.0)?, at(-hu, 0.0)?, at(-2.0 * hu, 0.0)?);
    let (vp2, vp1, vm1, vm2) = (at(0.0, 2.0 * hv)?, at(0.0, hv)?, at(0.0, -hv)?, at(0.0, -2.0 * hv)?);
    let mixed = if order >= 2 { Some((at(hu, hv)?, at(hu, -hv)?, at(-hu, hv)?, at(-hu, -hv)?)) } else { None };
    Ok(FormsJet::from_fn(order, |k| {
        let mut j = Jet::constant(b[k], order);
        if order >= 1 {
            let gu = d1(up2[k], up1[k], um1[k], um2[k], hu);
            let gv = d1(vp2[k], vp1[k], vm1[k], vm2[k], hv);
            j = j + Jet::var_u(0.0, order) * gu + Jet::var_v(0.0, order) * gv;
        }
        if let Some((pp, pm, mp, mm)) = &mixed {
            let huu = d2(up2[k], up1[k], b[k], um1[k], um2[k], hu);
            let hvv = d2(vp2[k], vp1[k], b[k], vm1[k], vm2[k], hv);
            let huv = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * hu * hv);
            let du = Jet::var_u(0.0, order);
            let dv = Jet::var_v(0.0, order);
            j = j + du * du * (0.5 * huu) + du * dv * huv + dv * dv * (0.5 * hvv);
        }
        j
    }))
}

/// Principal curvatures and derived curvature functions at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    pub k1: f64,
    pub k2: f64,
    /// Gaussian curvature `k1 k2`.
    pub gauss: f64,
    /// Arithmetic mean `(k1 + k2) / 2`.
    pub mean: f64,
    /// Harmonic mean `K / H`; `None` where `|H|` is below tolerance.
    pub harmonic: Option<f64>,
    /// Unit (metric) principal directions for `k1` and `k2`; `None` at umbilics.
    pub directions: Option<[[f64; 2]; 2]>,
    /// `H^2 - K`, clamped to be non-negative.
    pub umbilicity: f64,
}

/// Default tolerance for umbilic / harmonic-mean degeneracy tests.
pub const CURVATURE_TOL: f64 = 1e-9;

impl CurvatureData {
    /// Curvature data without the minimal-point check of [`curvatures`].
    pub fn from_forms(forms: &FundamentalForms, tol: f64) -> Self {
        let det = forms.metric_det();
        let gauss = (forms.e * forms.g - forms.f * forms.f) / det;
        let mean = (forms.e * forms.big_g - 2.0 * forms.f * forms.big_f + forms.g * forms.big_e) / (2.0 * det);
        let mut umbilicity = mean * mean - gauss;
        if umbilicity < 0.0 {
            umbilicity = 0.0;
        }
        let root = umbilicity.sqrt();
        let (k1, k2) = (mean - root, mean + root);
        let is_umbilic = umbilicity <= tol * tol * (1.0 + mean * mean);
        let directions = (!is_umbilic).then(|| {
            let dir = |k: f64| {
                let r1 = [forms.f - k * forms.big_f, -(forms.e - k * forms.big_e)];
                let r2 = [forms.g - k * forms.big_g, -(forms.f - k * forms.big_f)];
                let w = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) { r1 } else { r2 };
                forms.normalize(w)
            };
            let d1 = dir(k1);
            // orient the pair so that (d1, d2, N) is positive
            let d2 = forms.rotate_quarter(d1);
            [d1, d2]
        });
        let harmonic = (mean.abs() > tol).then(|| gauss / mean);
        Self { k1, k2, gauss, mean, harmonic, directions, umbilicity }
    }

    pub fn is_umbilic(&self, tol: f64) -> bool {
        self.umbilicity <= tol * tol * (1.0 + self.mean * self.mean)
    }
}

/// Principal curvatures (`k1 <= k2`), Gaussian/mean/harmonic curvature and
/// principal directions.
pub fn curvatures(forms: &FundamentalForms) -> Result<CurvatureData> {
    let c = CurvatureData::from_forms(forms, CURVATURE_TOL);
    if c.mean.abs() <= CURVATURE_TOL && c.gauss < -CURVATURE_TOL {
        return Err(Error::MinimalPoint { h: c.mean, k: c.gauss });
    }
    Ok(c)
}

/// Normal curvature `II(t, t) / I(t, t)` in the projective direction `t`.
pub fn normal_curvature(forms: &FundamentalForms, direction: [f64; 2]) -> f64 {
    forms.second(direction, direction) / forms.first(direction, direction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Umbilic,
}

pub fn classify_point(curv: &CurvatureData, tol: f64) -> PointClass {
    if curv.umbilicity <= tol * tol * (1.0 + curv.mean * curv.mean) {
        PointClass::Umbilic
    } else if curv.gauss.abs() <= tol {
        PointClass::Parabolic
    } else if curv.gauss > 0.0 {
        PointClass::Elliptic
    } else {
        PointClass::Hyperbolic
    }
}

/// Convenience: forms and curvature data at a point.
pub fn curvature_at(patch: &SurfacePatch, p: ChartPoint) -> Result<(FundamentalForms, CurvatureData)> {
    let forms = fundamental_forms(patch, p)?;
    Ok((forms, CurvatureData::from_forms(&forms, CURVATURE_TOL)))
}
