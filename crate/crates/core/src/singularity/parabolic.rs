use super::graph::{graph_jet, TangentFrame};
use crate::error::{Error, Result};
use crate::surface::{curvature_at, forms_jet, fundamental_forms, ChartPoint, FundamentalForms, SurfacePatch};
use crate::vec3::Vec3;
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParabolicTraceConfig {
    /// Marching step in chart units.
    pub step: f64,
    /// Corrector tolerance on `|K|`.
    pub tol: f64,
    /// Smallest admissible `|grad K|` before the curve is declared singular.
    pub grad_min: f64,
    pub max_points: usize,
    /// Grid resolution for seeding.
    pub grid: usize,
}

impl Default for ParabolicTraceConfig {
    fn default() -> Self {
        Self { step: 0.02, tol: 1e-12, grad_min: 1e-8, max_points: 20_000, grid: 60 }
    }
}

/// `K` and its chart gradient.
pub fn gauss_with_gradient(patch: &SurfacePatch, p: ChartPoint) -> Result<(f64, [f64; 2])> {
    let (k, _) = forms_jet(patch, p, 1)?.gauss_mean();
    Ok((k.value(), k.gradient()))
}

/// Projects onto `K = 0` along the gradient.
fn correct(patch: &SurfacePatch, mut p: ChartPoint, cfg: &ParabolicTraceConfig) -> Result<Option<(ChartPoint, f64)>> {
    for _ in 0..12 {
        let (k, g) = gauss_with_gradient(patch, p)?;
        let gn2 = g[0] * g[0] + g[1] * g[1];
        if gn2.sqrt() < cfg.grad_min {
            return Err(Error::SingularParabolicPoint(gn2.sqrt()));
        }
        let scale = 1.0 + k.abs().max(gn2.sqrt());
        if k.abs() <= cfg.tol * scale {
            return Ok(Some((p, gn2.sqrt())));
        }
        p = [p[0] - k * g[0] / gn2, p[1] - k * g[1] / gn2];
        if !patch.contains(p) {
            return Ok(None);
        }
    }
    Ok(None)
}

/// A polyline on `K = 0` with `|grad K|` at each vertex as a regularity certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCurve {
    pub points: Vec<ChartPoint>,
    pub grad_norm: Vec<f64>,
    pub closed: bool,
}

impl ParabolicCurve {
    pub fn min_gradient(&self) -> f64 {
        self.grad_norm.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn march(
    patch: &SurfacePatch,
    start: ChartPoint,
    sign: f64,
    cfg: &ParabolicTraceConfig,
) -> Result<(Vec<ChartPoint>, Vec<f64>, bool)> {
    let domain = patch.domain();
    let origin = patch.position(start);
    let mut pts = Vec::new();
    let mut grads = Vec::new();
    let mut p = start;
    let mut h = cfg.step;
    let mut travelled = 0.0;
    let mut prev_dir: Option<[f64; 2]> = None;
    while pts.len() < cfg.max_points {
        let (_, g) = gauss_with_gradient(patch, p)?;
        let gn = g[0].hypot(g[1]);
        if gn < cfg.grad_min {
            return Err(Error::SingularParabolicPoint(gn));
        }
        let mut t = [-g[1] / gn * sign, g[0] / gn * sign];
        if let Some(d) = prev_dir {
            if t[0] * d[0] + t[1] * d[1] < 0.0 {
                t = [-t[0], -t[1]];
            }
        }
        let next = loop {
            let guess = [p[0] + h * t[0], p[1] + h * t[1]];
            if !domain.contains(guess) {
                return Ok((pts, grads, false));
            }
            match correct(patch, guess, cfg)? {
                Some((q, gq)) if (q[0] - guess[0]).hypot(q[1] - guess[1]) < 0.5 * h => break (q, gq),
                _ if h > cfg.step * 1e-4 => h *= 0.5,
                _ => return Ok((pts, grads, false)),
            }
        };
        let (q, gq) = next;
        let q = domain.wrap(q);
        prev_dir = Some(t);
        travelled += h;
        h = (h * 1.5).min(cfg.step);
        if travelled > 2.0 * cfg.step && (patch.position(q) - origin).norm() < 0.75 * cfg.step * chart_speed(patch, q) {
            return Ok((pts, grads, true));
        }
        pts.push(q);
        grads.push(gq);
        p = q;
    }
    Ok((pts, grads, false))
}

/// 3-space length of a unit chart step, for comparing chart and space distances.
fn chart_speed(patch: &SurfacePatch, p: ChartPoint) -> f64 {
    fundamental_forms(patch, p).map(|f| f.big_e.max(f.big_g).sqrt()).unwrap_or(1.0)
}

/// Marches along `K = 0` through the corrected seed, in both directions
/// unless the curve closes up.
pub fn trace_parabolic_curve(
    patch: &SurfacePatch,
    seed: ChartPoint,
    cfg: &ParabolicTraceConfig,
) -> Result<ParabolicCurve> {
    let (start, g0) = correct(patch, seed, cfg)?.ok_or(Error::BadSeed("no parabolic point near the seed".into()))?;
    let (fwd, gf, closed) = march(patch, start, 1.0, cfg)?;
    let mut points = Vec::new();
    let mut grad_norm = Vec::new();
    if !closed {
        let (back, gb, _) = march(patch, start, -1.0, cfg)?;
        points.extend(back.into_iter().rev());
        grad_norm.extend(gb.into_iter().rev());
    }
    points.push(start);
    grad_norm.push(g0);
    points.extend(fwd);
    grad_norm.extend(gf);
    Ok(ParabolicCurve { points, grad_norm, closed })
}

/// All parabolic curves crossing a grid over the chart domain.
pub fn parabolic_curves(patch: &SurfacePatch, cfg: &ParabolicTraceConfig) -> Result<Vec<ParabolicCurve>> {
    let d = patch.domain();
    let n = cfg.grid.max(4);
    let at = |i: usize, j: usize| {
        [d.u[0] + (d.u[1] - d.u[0]) * i as f64 / n as f64, d.v[0] + (d.v[1] - d.v[0]) * j as f64 / n as f64]
    };
    let kval = |p: ChartPoint| curvature_at(patch, p).map(|(_, c)| c.gauss).unwrap_or(f64::NAN);
    let grid: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| kval(at(i, j))).collect()).collect();
    // K vanishing on the whole grid: the parabolic set is not a curve
    if grid.iter().flatten().all(|k| k.abs() <= 1e-12) {
        let (_, grad) = gauss_with_gradient(patch, at(n / 2, n / 2))?;
        return Err(Error::SingularParabolicPoint(grad[0].hypot(grad[1])));
    }
    let mut seeds = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            for (di, dj) in [(1, 0), (0, 1)] {
                if i + di > n || j + dj > n {
                    continue;
                }
                let (k0, k1) = (grid[i][j], grid[i + di][j + dj]);
                if k0 * k1 < 0.0 {
                    let (p0, p1) = (at(i, j), at(i + di, j + dj));
                    let t = k0 / (k0 - k1);
                    seeds.push([p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])]);
                }
            }
        }
    }
    let cell = ((d.u[1] - d.u[0]) / n as f64).hypot((d.v[1] - d.v[0]) / n as f64);
    let mut curves: Vec<ParabolicCurve> = Vec::new();
    for s in seeds {
        let x = patch.position(s);
        let covered = curves.iter().any(|c| {
            c.points.iter().any(|&q| (patch.position(q) - x).norm() < 2.0 * cell.max(cfg.step) * chart_speed(patch, q))
        });
        if covered {
            continue;
        }
        curves.push(trace_parabolic_curve(patch, s, cfg)?);
    }
    Ok(curves)
}

/// Kernel of the second fundamental form at a parabolic point, as a chart vector.
pub fn kernel_direction(forms: &FundamentalForms) -> [f64; 2] {
    let (e, f, g) = (forms.e, forms.f, forms.g);
    let w = if e.abs() >= g.abs() { [-f, e] } else { [g, -f] };
    let n = w[0].hypot(w[1]);
    [w[0] / n, w[1] / n]
}

/// Sine of the metric angle from the parabolic tangent to the kernel of II.
fn alignment(patch: &SurfacePatch, p: ChartPoint, reference: Option<[f64; 2]>) -> Result<(f64, [f64; 2])> {
    let forms = fundamental_forms(patch, p)?;
    let (_, g) = gauss_with_gradient(patch, p)?;
    let t = [-g[1], g[0]];
    let mut w = kernel_direction(&forms);
    if let Some(r) = reference {
        if w[0] * r[0] + w[1] * r[1] < 0.0 {
            w = [-w[0], -w[1]];
        }
    }
    let cross = (t[0] * w[1] - t[1] * w[0]) * forms.metric_det().sqrt();
    Ok((cross / (forms.norm(t) * forms.norm(w)), w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialScan {
    pub points: Vec<ChartPoint>,
    /// Alignment samples along the polyline.
    pub alignment: Vec<f64>,
    /// The kernel of II is tangent to the curve along the whole polyline, so
    /// tangential points are not isolated.
    pub degenerate_arc: bool,
}

/// Points of the parabolic polyline where the double-root (kernel) direction
/// is tangent to the curve.
pub fn find_tangential_points(patch: &SurfacePatch, curve: &ParabolicCurve, tol: f64) -> Result<TangentialScan> {
    let cfg = ParabolicTraceConfig::default();
    let mut values = Vec::with_capacity(curve.points.len());
    let mut refs = Vec::with_capacity(curve.points.len());
    let mut reference = None;
    for &p in &curve.points {
        let (a, w) = alignment(patch, p, reference)?;
        values.push(a);
        refs.push(w);
        reference = Some(w);
    }
    if values.iter().all(|a| a.abs() <= tol) {
        let degenerate_arc = !values.is_empty();
        return Ok(TangentialScan { points: Vec::new(), alignment: values, degenerate_arc });
    }
    let mut points = Vec::new();
    for i in 0..values.len().saturating_sub(1) {
        let (a0, a1) = (values[i], values[i + 1]);
        if a0 == 0.0 {
            points.push(curve.points[i]);
            continue;
        }
        if a0 * a1 >= 0.0 {
            continue;
        }
        let (p0, p1) = (curve.points[i], curve.points[i + 1]);
        let p1 = unwrap_towards(patch, p0, p1);
        let (mut lo, mut hi, mut alo) = (0.0, 1.0, a0);
        let mut best = p0;
        for _ in 0..60 {
            let t = 0.5 * (lo + hi);
            let guess = [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];
            let Some((q, _)) = correct(patch, guess, &cfg)? else {
                break;
            };
            let (am, _) = alignment(patch, q, Some(refs[i]))?;
            best = q;
            if alo * am <= 0.0 {
                hi = t;
            } else {
                lo = t;
                alo = am;
            }
        }
        points.push(patch.domain().wrap(best));
    }
    Ok(TangentialScan { points, alignment: values, degenerate_arc: false })
}

/// Shifts `p1` by whole periods so it sits next to `p0`.
fn unwrap_towards(patch: &SurfacePatch, p0: ChartPoint, mut p1: ChartPoint) -> ChartPoint {
    let d = patch.domain();
    for axis in 0..2 {
        if let Some(period) = d.period(axis) {
            let delta = p1[axis] - p0[axis];
            p1[axis] -= (delta / period).round() * period;
        }
    }
    p1
}

/// Adapted normal form at a parabolic point, `x` along the kernel of II:
/// `z = k/2 y^2 + a/6 x^3 + d/2 x^2 y + b/2 x y^2 + c/6 y^3
///    + A/24 x^4 + B/6 x^3 y + C/4 x^2 y^2 + D/6 x y^3 + E/24 y^4 + O(5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicNormalForm {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "D")]
    pub big_d: f64,
    #[serde(rename = "E")]
    pub big_e: f64,
}

/// Below this, relative to the mean curvature scale, both principal curvatures vanish.
const FLAT_TOL: f64 = 1e-9;

/// The normal is chosen so `k > 0`; the kernel orientation so `d >= 0`, or
/// `a >= 0` when `d` vanishes.
pub fn adapted_monge_form(patch: &SurfacePatch, p: ChartPoint) -> Result<ParabolicNormalForm> {
    let (forms, curv) = curvature_at(patch, p)?;
    if curv.k1.abs().max(curv.k2.abs()) <= FLAT_TOL {
        return Err(Error::UmbilicParabolic);
    }
    let w = kernel_direction(&forms);
    let n0 = patch.normal(p).ok_or(Error::DegenerateJet { u: p[0], v: p[1], det: 0.0 })?;
    let e0 = patch.push_forward(p, w).normalized().ok_or(Error::DegenerateJet { u: p[0], v: p[1], det: 0.0 })?;
    let build = |e1: Vec3, n: Vec3| -> Result<ParabolicNormalForm> {
        let frame = TangentFrame { e1, e2: n.cross(e1), n };
        let z = graph_jet(patch, p, &frame, 4)?;
        Ok(ParabolicNormalForm {
            k: 2.0 * z.coeff(0, 2),
            a: 6.0 * z.coeff(3, 0),
            d: 2.0 * z.coeff(2, 1),
            b: 2.0 * z.coeff(1, 2),
            c: 6.0 * z.coeff(0, 3),
            big_a: 24.0 * z.coeff(4, 0),
            big_b: 6.0 * z.coeff(3, 1),
            big_c: 4.0 * z.coeff(2, 2),
            big_d: 6.0 * z.coeff(1, 3),
            big_e: 24.0 * z.coeff(0, 4),
        })
    };
    let mut nf = build(e0, n0)?;
    let n = if nf.k < 0.0 { -n0 } else { n0 };
    if nf.k < 0.0 {
        nf = build(e0, n)?;
    }
    let scale = nf.a.abs() + nf.d.abs();
    let flip = if nf.d.abs() > 1e-12 * (1.0 + scale) { nf.d < 0.0 } else { nf.a < 0.0 };
    if flip {
        nf = build(-e0, n)?;
    }
    Ok(nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParabolicType {
    Cuspidal,
    FoldedSaddle,
    FoldedNode,
    FoldedFocus,
    Degenerate,
}

/// A complex number for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    fn mul(self, o: Self) -> Self {
        Eigenvalue { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

/// `(m/2 +- sqrt(disc)/2) * scale`, as a complex pair.
fn root_pair(m: f64, disc: f64, scale: f64) -> [Eigenvalue; 2] {
    if disc >= 0.0 {
        let s = disc.sqrt();
        [Eigenvalue { re: (m + s) / 2.0 * scale, im: 0.0 }, Eigenvalue { re: (m - s) / 2.0 * scale, im: 0.0 }]
    } else {
        let s = (-disc).sqrt();
        [
            Eigenvalue { re: m / 2.0 * scale, im: s / 2.0 * scale },
            Eigenvalue { re: m / 2.0 * scale, im: -s / 2.0 * scale },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicClassification {
    pub verdict: ParabolicType,
    /// The quantity whose sign separates saddles from nodes and foci.
    pub saddle_quantity: f64,
    pub discriminant: f64,
    pub eigenvalues: [Eigenvalue; 2],
}

impl ParabolicClassification {
    pub fn eigenvalue_product(&self) -> f64 {
        self.eigenvalues[0].mul(self.eigenvalues[1]).re
    }
}

fn split(value: f64, scale: f64, margin: f64) -> Option<bool> {
    let rel = if scale > 0.0 { value / scale } else { 0.0 };
    if rel > margin {
        Some(true)
    } else if rel < -margin {
        Some(false)
    } else {
        None
    }
}

/// Folded singularities of the harmonic lines at a tangential point.
pub fn classify_parabolic_harmonic(k: f64, d: f64, big_a: f64, margin: f64) -> ParabolicClassification {
    let sigma = k * k * (big_a * k - 3.0 * d * d);
    let delta = -23.0 * d * d + 8.0 * big_a * k;
    let verdict = match split(sigma, k * k * (big_a.abs() * k.abs() + 3.0 * d * d), margin) {
        Some(true) => ParabolicType::FoldedSaddle,
        Some(false) => match split(delta, 23.0 * d * d + 8.0 * (big_a * k).abs(), margin) {
            Some(true) => ParabolicType::FoldedNode,
            Some(false) => ParabolicType::FoldedFocus,
            None => ParabolicType::Degenerate,
        },
        None => ParabolicType::Degenerate,
    };
    ParabolicClassification {
        verdict,
        saddle_quantity: sigma,
        discriminant: delta,
        eigenvalues: root_pair(d, delta, k),
    }
}

/// Folded singularities of the asymptotic lines at a tangential point.
pub fn classify_parabolic_asymptotic(k: f64, d: f64, big_a: f64, margin: f64) -> ParabolicClassification {
    let q = big_a * k - 3.0 * d * d;
    let delta_a = 25.0 * d * d - 8.0 * big_a * k;
    let verdict = match split(q, (big_a * k).abs() + 3.0 * d * d, margin) {
        Some(false) => ParabolicType::FoldedSaddle,
        Some(true) => match split(delta_a, 25.0 * d * d + 8.0 * (big_a * k).abs(), margin) {
            Some(true) => ParabolicType::FoldedNode,
            Some(false) => ParabolicType::FoldedFocus,
            None => ParabolicType::Degenerate,
        },
        None => ParabolicType::Degenerate,
    };
    ParabolicClassification {
        verdict,
        saddle_quantity: q,
        discriminant: delta_a,
        eigenvalues: root_pair(d, delta_a, 1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieCartanJacobians {
    pub harmonic: [[f64; 3]; 3],
    pub asymptotic: [[f64; 3]; 3],
    /// Eigenvalues sorted by decreasing modulus; the last is the zero one.
    pub harmonic_eigenvalues: [Eigenvalue; 3],
    pub asymptotic_eigenvalues: [Eigenvalue; 3],
}

fn eigenvalues(m: [[f64; 3]; 3]) -> [Eigenvalue; 3] {
    let mat = Matrix3::from_fn(|i, j| m[i][j]);
    let ev = mat.complex_eigenvalues();
    let mut out: Vec<Eigenvalue> = ev.iter().map(|z| Eigenvalue { re: z.re, im: z.im }).collect();
    out.sort_by(|a, b| {
        b.re.hypot(b.im).total_cmp(&a.re.hypot(a.im)).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im))
    });
    [out[0], out[1], out[2]]
}

/// Linear parts at the origin of the lifted harmonic and asymptotic fields
/// for an adapted form with `a = 0`.
pub fn lie_cartan_jacobians(k: f64, b: f64, d: f64, big_a: f64, big_b: f64) -> LieCartanJacobians {
    let harmonic =
        [[2.0 * k * d, 2.0 * k * b, 2.0 * k * k], [0.0; 3], [big_a * k - 4.0 * d * d, k * big_b - 3.0 * b * d, -k * d]];
    let asymptotic = [[2.0 * d, 2.0 * b, 2.0 * k], [0.0; 3], [-big_a, -big_b, -3.0 * d]];
    LieCartanJacobians {
        harmonic_eigenvalues: eigenvalues(harmonic),
        asymptotic_eigenvalues: eigenvalues(asymptotic),
        harmonic,
        asymptotic,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicReport {
    pub point: ChartPoint,
    pub position: Vec3,
    pub normal_form: ParabolicNormalForm,
    pub sigma: f64,
    pub delta: f64,
    pub delta_a: f64,
    pub harmonic: ParabolicClassification,
    pub asymptotic: ParabolicClassification,
    pub jacobians: Option<LieCartanJacobians>,
}

/// Classifies a parabolic point; points with `a` away from zero are cuspidal
/// for both foliations.
pub fn parabolic_report(patch: &SurfacePatch, p: ChartPoint, margin: f64) -> Result<ParabolicReport> {
    let nf = adapted_monge_form(patch, p)?;
    let mut harmonic = classify_parabolic_harmonic(nf.k, nf.d, nf.big_a, margin);
    let mut asymptotic = classify_parabolic_asymptotic(nf.k, nf.d, nf.big_a, margin);
    let cuspidal = nf.a.abs() > margin.sqrt() * (nf.k.abs() + nf.d.abs() + nf.b.abs());
    if cuspidal {
        harmonic.verdict = ParabolicType::Cuspidal;
        asymptotic.verdict = ParabolicType::Cuspidal;
    }
    Ok(ParabolicReport {
        point: p,
        position: patch.position(p),
        sigma: harmonic.saddle_quantity,
        delta: harmonic.discriminant,
        delta_a: asymptotic.discriminant,
        harmonic,
        asymptotic,
        jacobians: (!cuspidal).then(|| lie_cartan_jacobians(nf.k, nf.b, nf.d, nf.big_a, nf.big_b)),
        normal_form: nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{builtin_surface, SurfaceKind};
    use std::f64::consts::FRAC_PI_2;

    fn monge(k: f64, a: f64, b: f64, c: f64, d: f64, quartic: [f64; 5]) -> SurfacePatch {
        builtin_surface(&SurfaceKind::MongeParabolic { k, a, b, c, d, quartic }).unwrap()
    }

    #[test]
    fn torus_parabolic_set_is_two_circles() {
        let s = builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap();
        let curves = parabolic_curves(&s, &ParabolicTraceConfig::default()).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!(c.closed);
            let s0 = c.points[0][0];
            assert!(c.points.iter().all(|p| (p[0].abs() - FRAC_PI_2).abs() < 1e-10 && (p[0] - s0).abs() < 1e-9));
            assert!(c.min_gradient() > 0.1);
        }
    }

    #[test]
    fn torus_kernel_is_tangent_along_the_whole_circle() {
        let s = builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap();
        let curve = trace_parabolic_curve(&s, [1.5, 0.3], &ParabolicTraceConfig::default()).unwrap();
        let scan = find_tangential_points(&s, &curve, 1e-9).unwrap();
        assert!(scan.points.is_empty());
        assert!(scan.degenerate_arc);
        let nf = adapted_monge_form(&s, [FRAC_PI_2, 0.0]).unwrap();
        assert!(nf.a.abs() < 1e-10 && nf.k > 0.0, "{nf:?}");
    }

    #[test]
    fn convex_ellipsoid_has_no_parabolic_points() {
        let s =
            builtin_surface(&SurfaceKind::EllipsoidTrig { a: 3.0, b: 2.0, c: 1.0, poles: Default::default() }).unwrap();
        assert!(parabolic_curves(&s, &ParabolicTraceConfig { grid: 30, ..Default::default() }).unwrap().is_empty());
    }

    #[test]
    fn cylinder_is_singular() {
        let s = builtin_surface(&SurfaceKind::Cylinder { radius: 1.0 }).unwrap();
        let err = trace_parabolic_curve(&s, [0.1, 0.2], &ParabolicTraceConfig::default());
        assert!(matches!(err, Err(Error::SingularParabolicPoint(_))), "{err:?}");
        let all = parabolic_curves(&s, &ParabolicTraceConfig::default());
        assert!(matches!(all, Err(Error::SingularParabolicPoint(_))), "{all:?}");
    }

    #[test]
    fn cuspidal_curve_is_normal_to_a_d() {
        let (a, d) = (1.0, 0.6);
        let s = monge(1.0, a, 0.2, 0.3, d, [0.0; 5]);
        let cfg = ParabolicTraceConfig { step: 0.005, ..Default::default() };
        let curve = trace_parabolic_curve(&s, [0.01, 0.01], &cfg).unwrap();
        let i = curve
            .points
            .iter()
            .enumerate()
            .min_by(|x, y| x.1[0].hypot(x.1[1]).total_cmp(&y.1[0].hypot(y.1[1])))
            .unwrap()
            .0;
        let (p, q) = (curve.points[i - 1], curve.points[i + 1]);
        let t = [q[0] - p[0], q[1] - p[1]];
        assert!((t[0] * a + t[1] * d).abs() / t[0].hypot(t[1]) < 1e-3);
        let scan = find_tangential_points(&s, &curve, 1e-9).unwrap();
        assert!(scan.points.iter().all(|p| p[0].hypot(p[1]) > 0.1), "{:?}", scan.points);
    }

    #[test]
    fn folded_point_found_at_origin() {
        let s = monge(1.0, 0.0, 0.3, 0.2, 1.0, [4.0, 0.5, 0.0, 0.0, 0.0]);
        let cfg = ParabolicTraceConfig { step: 0.005, ..Default::default() };
        let curve = trace_parabolic_curve(&s, [0.0, 0.001], &cfg).unwrap();
        let scan = find_tangential_points(&s, &curve, 1e-9).unwrap();
        let near: Vec<_> = scan.points.iter().filter(|p| p[0].hypot(p[1]) < 0.05).collect();
        assert_eq!(near.len(), 1, "{:?}", scan.points);
        assert!(near[0][0].hypot(near[0][1]) < 1e-8);
        let r = parabolic_report(&s, *near[0], 1e-6).unwrap();
        assert_eq!(r.harmonic.verdict, ParabolicType::FoldedSaddle);
        assert_eq!(r.asymptotic.verdict, ParabolicType::FoldedFocus);
    }

    #[test]
    fn adapted_form_is_a_fixed_point() {
        let q = [4.0, -0.5, 0.7, 0.2, -0.3];
        let nf = adapted_monge_form(&monge(1.5, 0.4, -0.6, 0.9, 0.8, q), [0.0, 0.0]).unwrap();
        let got = [nf.k, nf.a, nf.b, nf.c, nf.d, nf.big_a, nf.big_b, nf.big_c, nf.big_d, nf.big_e];
        let want = [1.5, 0.4, -0.6, 0.9, 0.8, q[0], q[1], q[2], q[3], q[4]];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn classification_examples() {
        let m = 1e-9;
        let h = classify_parabolic_harmonic(1.0, 1.0, 4.0, m);
        assert_eq!(h.verdict, ParabolicType::FoldedSaddle);
        assert_eq!([h.eigenvalues[0].re, h.eigenvalues[1].re], [2.0, -1.0]);
        assert_eq!(classify_parabolic_harmonic(1.0, 1.0, 2.9, m).verdict, ParabolicType::FoldedNode);
        assert_eq!(classify_parabolic_harmonic(1.0, 1.0, 2.0, m).verdict, ParabolicType::FoldedFocus);
        assert_eq!(classify_parabolic_asymptotic(1.0, 1.0, 2.0, m).verdict, ParabolicType::FoldedSaddle);
        assert_eq!(classify_parabolic_asymptotic(1.0, 1.0, 4.0, m).verdict, ParabolicType::FoldedFocus);
        assert_eq!(classify_parabolic_asymptotic(1.0, 1.0, 3.05, m).verdict, ParabolicType::FoldedNode);
        assert_eq!(classify_parabolic_harmonic(1.0, 1.0, 3.0, m).verdict, ParabolicType::Degenerate);
    }

    #[test]
    fn jacobian_spectra() {
        let j = lie_cartan_jacobians(1.0, 0.0, 1.0, 4.0, 0.0);
        let ev = j.harmonic_eigenvalues;
        assert!((ev[0].re - 2.0).abs() < 1e-12 && (ev[1].re + 1.0).abs() < 1e-12 && ev[2].re.abs() < 1e-12);
        // the printed asymptotic matrix has trace -d: its spectrum is the
        // closed form reflected through the origin
        let ev = j.asymptotic_eigenvalues;
        assert!((ev[0].re + 0.5).abs() < 1e-12 && (ev[0].im.abs() - 7f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((ev[0].mul(ev[1]).re - 2.0).abs() < 1e-12);
    }
}
