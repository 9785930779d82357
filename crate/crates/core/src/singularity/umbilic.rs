use super::graph::{frame_along, graph_jet};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::mean_field::QuadraticLineField;
use crate::surface::{curvature_at, forms_jet, ChartPoint, SurfacePatch};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmbilicSearch {
    /// Search rectangle; the chart domain when `None`.
    pub region: Option<[[f64; 2]; 2]>,
    pub grid: usize,
    /// Accept points with `H^2 - K <= tol^2 (1 + H^2)`. Roundoff in
    /// `H^2 - K` sits near 1e-17, so `tol` much below 1e-8 rejects true umbilics.
    pub tol: f64,
}

impl Default for UmbilicSearch {
    fn default() -> Self {
        Self { region: None, grid: 80, tol: 1e-7 }
    }
}

fn umbilicity(patch: &SurfacePatch, p: ChartPoint) -> Option<f64> {
    let (_, c) = curvature_at(patch, p).ok()?;
    Some(c.umbilicity / (1.0 + c.mean * c.mean))
}

/// `(eG - gE, fE - eF)` and its Jacobian; both components vanish exactly at umbilics.
fn umbilic_system(patch: &SurfacePatch, p: ChartPoint) -> Result<([f64; 2], [[f64; 2]; 2])> {
    let fj = forms_jet(patch, p, 1)?;
    let f1: Jet = fj.e * fj.big_g - fj.g * fj.big_e;
    let f2: Jet = fj.f * fj.big_e - fj.e * fj.big_f;
    Ok(([f1.value(), f2.value()], [f1.gradient(), f2.gradient()]))
}

fn newton_polish(patch: &SurfacePatch, mut p: ChartPoint) -> Option<ChartPoint> {
    let domain = patch.domain();
    for _ in 0..60 {
        let (f, j) = umbilic_system(patch, p).ok()?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let du = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dv = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let norm0 = f[0].hypot(f[1]);
        let mut t = 1.0;
        let mut next = [p[0] - du, p[1] - dv];
        // backtrack on the residual norm
        for _ in 0..30 {
            next = [p[0] - t * du, p[1] - t * dv];
            if domain.contains(next) {
                if let Ok((fn_, _)) = umbilic_system(patch, next) {
                    if fn_[0].hypot(fn_[1]) < norm0 || norm0 == 0.0 {
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !domain.contains(next) {
            return None;
        }
        let step = (next[0] - p[0]).hypot(next[1] - p[1]);
        p = next;
        if step < 1e-15 * (1.0 + p[0].abs() + p[1].abs()) {
            break;
        }
    }
    Some(p)
}

/// Umbilic points: grid minima of `H^2 - K`, refined by Newton's method on
/// `(eG - gE, fE - eF) = 0`. Results are sorted by chart coordinates.
pub fn locate_umbilics(patch: &SurfacePatch, opts: &UmbilicSearch) -> Vec<ChartPoint> {
    let d = patch.domain();
    let [ur, vr] = opts.region.unwrap_or([d.u, d.v]);
    let n = opts.grid.max(4);
    let at = |i: usize, j: usize| {
        [ur[0] + (ur[1] - ur[0]) * i as f64 / n as f64, vr[0] + (vr[1] - vr[0]) * j as f64 / n as f64]
    };
    let w: Vec<Vec<f64>> =
        (0..=n).map(|i| (0..=n).map(|j| umbilicity(patch, at(i, j)).unwrap_or(f64::INFINITY)).collect()).collect();
    let mut seeds = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let c = w[i][j];
            if !c.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a > n as i64 || b > n as i64 {
                        continue;
                    }
                    if w[a as usize][b as usize] < c {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(at(i, j));
            }
        }
    }
    let mut found: Vec<(ChartPoint, Vec3)> = Vec::new();
    let merge_tol = (10.0 * opts.tol).max(1e-7);
    for seed in seeds {
        let Some(p) = newton_polish(patch, seed) else {
            continue;
        };
        let inside = p[0] >= ur[0] - 1e-12 && p[0] <= ur[1] + 1e-12 && p[1] >= vr[0] - 1e-12 && p[1] <= vr[1] + 1e-12;
        let inside = inside || (d.periodic[0] && p[1] >= vr[0] && p[1] <= vr[1]);
        if !inside {
            continue;
        }
        let Some(w) = umbilicity(patch, p) else {
            continue;
        };
        if w > opts.tol * opts.tol {
            continue;
        }
        let p = d.wrap(p);
        let x = patch.position(p);
        if found.iter().all(|(_, y)| (x - *y).norm() > merge_tol) {
            found.push((p, x));
        }
    }
    let mut pts: Vec<ChartPoint> = found.into_iter().map(|(p, _)| p).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts
}

/// Umbilic normal form `z = k/2 (x^2 + y^2) + a/6 x^3 + b/2 x y^2 + c/6 y^3 + O(4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmbilicNormalForm {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Rotation of the tangent axes that removes the `x^2 y` term.
    pub rotation: f64,
}

/// Coefficients `[c30, c21, c12, c03]` of a cubic form after rotating the
/// axes by `theta`.
pub fn rotate_cubic(c: [f64; 4], theta: f64) -> [f64; 4] {
    let (s, co) = theta.sin_cos();
    let (xr, yr) = (Jet::var_u(0.0, 3), Jet::var_v(0.0, 3));
    let x = xr * co - yr * s;
    let y = xr * s + yr * co;
    let f = x * x * x * c[0] + x * x * y * c[1] + x * y * y * c[2] + y * y * y * c[3];
    [f.coeff(3, 0), f.coeff(2, 1), f.coeff(1, 2), f.coeff(0, 3)]
}

/// Tolerance below which a point counts as umbilic for normal-form extraction.
const NORMAL_FORM_UMBILIC_TOL: f64 = 1e-6;

pub fn monge_normal_form(patch: &SurfacePatch, p: ChartPoint) -> Result<UmbilicNormalForm> {
    let (_, curv) = curvature_at(patch, p)?;
    if !curv.is_umbilic(NORMAL_FORM_UMBILIC_TOL) {
        return Err(Error::NotUmbilic(curv.umbilicity));
    }
    let frame = frame_along(patch, p, [1.0, 0.0])?;
    let z = graph_jet(patch, p, &frame, 3)?;
    let k = z.coeff(2, 0) + z.coeff(0, 2);
    let cubic = [z.coeff(3, 0), z.coeff(2, 1), z.coeff(1, 2), z.coeff(0, 3)];
    let size = cubic.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if size <= 1e-10 * (1.0 + k.abs()) {
        return Err(Error::DegenerateCubic);
    }
    let g = |t: f64| rotate_cubic(cubic, t)[1];
    let n = 1440;
    let mut roots = Vec::new();
    let mut prev = g(0.0);
    if prev.abs() <= 1e-14 * size {
        roots.push(0.0);
    }
    for i in 1..=n {
        let t1 = 2.0 * PI * i as f64 / n as f64;
        let cur = g(t1);
        if prev * cur < 0.0 {
            let (mut a, mut b, mut ga) = (2.0 * PI * (i - 1) as f64 / n as f64, t1, prev);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if ga * gm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            roots.push(0.5 * (a + b));
        } else if cur.abs() <= 1e-14 * size && i < n && prev.abs() > 1e-14 * size {
            roots.push(t1);
        }
        prev = cur;
    }
    let coeffs = |t: f64| {
        let r = rotate_cubic(cubic, t);
        (6.0 * r[0], 2.0 * r[2], 6.0 * r[3])
    };
    let theta = roots
        .iter()
        .copied()
        .find(|&t| coeffs(t).1 >= 0.0)
        .or_else(|| roots.first().copied())
        .ok_or(Error::DegenerateCubic)?;
    let (a, b, c) = coeffs(theta);
    Ok(UmbilicNormalForm { k, a, b, c, rotation: theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HarmonicUmbilicType {
    H1,
    H2,
    H3,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrincipalUmbilicType {
    D1,
    D2,
    D3,
    Degenerate,
}

/// A verdict with the quantities that decided it. Margins are the deciding
/// quantities divided by their natural scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmbilicClassification<T> {
    pub verdict: T,
    pub transversality: f64,
    pub discriminant: f64,
    pub transversality_margin: f64,
    pub discriminant_margin: f64,
}

/// Default relative classification margin.
pub const CLASSIFY_MARGIN: f64 = 1e-6;

/// `Delta_h = 4c^2 (2a - b)^2 - [3c^2 + (a - 5b)^2][3(a - 5b)(a - b) + c^2]`.
pub fn delta_h(a: f64, b: f64, c: f64) -> f64 {
    4.0 * c * c * (2.0 * a - b).powi(2)
        - (3.0 * c * c + (a - 5.0 * b).powi(2)) * (3.0 * (a - 5.0 * b) * (a - b) + c * c)
}

/// `Delta_P = 4b(a - 2b)^3 - c^2 (a - 2b)^2`.
pub fn delta_p(a: f64, b: f64, c: f64) -> f64 {
    4.0 * b * (a - 2.0 * b).powi(3) - c * c * (a - 2.0 * b).powi(2)
}

fn classify<T: Copy>(
    t: f64,
    t_scale: f64,
    disc: f64,
    disc_scale: f64,
    a: f64,
    b: f64,
    margin: f64,
    types: [T; 4],
) -> UmbilicClassification<T> {
    let tm = if t_scale > 0.0 { t / t_scale } else { 0.0 };
    let dm = if disc_scale > 0.0 { disc / disc_scale } else { 0.0 };
    let verdict = if tm.abs() <= margin {
        types[3]
    } else if dm > margin {
        types[0]
    } else if dm < -margin {
        if a / b > 1.0 {
            types[1]
        } else {
            types[2]
        }
    } else {
        types[3]
    };
    UmbilicClassification {
        verdict,
        transversality: t,
        discriminant: disc,
        transversality_margin: tm,
        discriminant_margin: dm,
    }
}

pub fn classify_umbilic_harmonic(
    k: f64,
    a: f64,
    b: f64,
    c: f64,
    margin: f64,
) -> UmbilicClassification<HarmonicUmbilicType> {
    use HarmonicUmbilicType::*;
    let s = a.abs() + b.abs() + c.abs();
    classify(k * b * (b - a), k.abs() * s * s, delta_h(a, b, c), s.powi(4), a, b, margin, [H1, H2, H3, Degenerate])
}

pub fn classify_umbilic_principal(a: f64, b: f64, c: f64, margin: f64) -> UmbilicClassification<PrincipalUmbilicType> {
    use PrincipalUmbilicType::*;
    let s = a.abs() + b.abs() + c.abs();
    classify(b * (b - a), s * s, delta_p(a, b, c), s.powi(4), a, b, margin, [D1, D2, D3, Degenerate])
}

/// An equilibrium of the lifted field on the projective line over an umbilic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftEquilibrium {
    /// Chart direction angle in `[0, pi)`.
    pub angle: f64,
    /// Eigenvalue along the fibre.
    pub fibre_eigenvalue: f64,
    /// Eigenvalue along the lifted surface, transverse to the fibre.
    pub transverse_eigenvalue: f64,
    pub saddle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftEquilibria {
    pub equilibria: Vec<LiftEquilibrium>,
    pub saddles: usize,
    pub nodes: usize,
    /// Arcs of the projective line between cyclically consecutive saddles
    /// with no node in between; each is a hyperbolic sector of the foliation.
    pub hyperbolic_sectors: usize,
    /// Maximal runs of nodes, each spanning a parabolic sector.
    pub parabolic_sectors: usize,
}

/// Equilibria of the lifted field over an umbilic, from the first-order
/// jets of the equation's coefficients.
pub fn umbilic_lift_equilibria(field: &QuadraticLineField, p: ChartPoint) -> Result<LiftEquilibria> {
    let ([l, m, n], ..) = field.coeff_jets(p)?;
    let [l1, l2] = l.gradient();
    let [m1, m2] = m.gradient();
    let [n1, n2] = n.gradient();
    let h = |a: f64, b: f64, c: f64, phi: f64| {
        let (s, co) = phi.sin_cos();
        a * s * s + b * s * co + c * co * co
    };
    let dh = |a: f64, b: f64, c: f64, phi: f64| {
        let (s, co) = phi.sin_cos();
        2.0 * (a - c) * s * co + b * (co * co - s * s)
    };
    let r = |phi: f64| h(l1, m1, n1, phi) * phi.cos() + h(l2, m2, n2, phi) * phi.sin();
    let scale = [l1, l2, m1, m2, n1, n2].iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateCubic);
    }
    let nsamp = 3600;
    let mut roots = Vec::new();
    let mut prev = r(0.0);
    for i in 1..=nsamp {
        let t1 = PI * i as f64 / nsamp as f64;
        let cur = r(t1);
        if prev == 0.0 && i == 1 {
            roots.push(0.0);
        }
        if prev * cur < 0.0 {
            let (mut a, mut b, mut ga) = (PI * (i - 1) as f64 / nsamp as f64, t1, prev);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                let gm = r(mid);
                if ga * gm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    ga = gm;
                }
            }
            roots.push(0.5 * (a + b) % PI);
        }
        prev = cur;
    }
    let hstep = 1e-6;
    let equilibria: Vec<LiftEquilibrium> = roots
        .into_iter()
        .map(|phi| {
            let dr = (r(phi + hstep) - r(phi - hstep)) / (2.0 * hstep);
            let fibre = -dr;
            let transverse = phi.cos() * dh(l1, m1, n1, phi) + phi.sin() * dh(l2, m2, n2, phi);
            LiftEquilibrium {
                angle: phi,
                fibre_eigenvalue: fibre,
                transverse_eigenvalue: transverse,
                saddle: fibre * transverse < 0.0,
            }
        })
        .collect();
    let saddles = equilibria.iter().filter(|e| e.saddle).count();
    let nodes = equilibria.len() - saddles;
    let n = equilibria.len();
    let cyclic = |i: usize| (equilibria[i].saddle, equilibria[(i + 1) % n].saddle);
    let hyperbolic_sectors = (0..n).filter(|&i| cyclic(i) == (true, true)).count();
    let parabolic_sectors =
        if saddles == 0 { usize::from(nodes > 0) } else { (0..n).filter(|&i| cyclic(i) == (true, false)).count() };
    Ok(LiftEquilibria { saddles, nodes, hyperbolic_sectors, parabolic_sectors, equilibria })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicReport {
    pub point: ChartPoint,
    pub position: Vec3,
    pub normal_form: UmbilicNormalForm,
    pub harmonic: UmbilicClassification<HarmonicUmbilicType>,
    pub principal: UmbilicClassification<PrincipalUmbilicType>,
    pub lift: LiftEquilibria,
}

pub fn umbilic_report(field: &QuadraticLineField, p: ChartPoint, margin: f64) -> Result<UmbilicReport> {
    let nf = monge_normal_form(&field.patch, p)?;
    Ok(UmbilicReport {
        point: p,
        position: field.patch.position(p),
        normal_form: nf,
        harmonic: classify_umbilic_harmonic(nf.k, nf.a, nf.b, nf.c, margin),
        principal: classify_umbilic_principal(nf.a, nf.b, nf.c, margin),
        lift: umbilic_lift_equilibria(field, p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{builtin_surface, PoleAxis, SurfaceKind};

    fn monge(k: f64, a: f64, b: f64, c: f64) -> SurfacePatch {
        builtin_surface(&SurfaceKind::MongeUmbilic { k, a, b, c, quartic: None }).unwrap()
    }

    #[test]
    fn discriminant_by_hand() {
        // a - 5b = 0 kills most terms: 4 * 1 * 9^2 - 3 * 1
        let (a, b, c) = (5.0f64, 1.0f64, 1.0f64);
        let by_hand = 4.0 * 81.0 - (3.0 + 0.0) * (0.0 + 1.0);
        assert_eq!(delta_h(a, b, c), by_hand);
        assert_eq!(by_hand, 321.0);
    }

    #[test]
    fn classification_table() {
        let m = CLASSIFY_MARGIN;
        assert_eq!(classify_umbilic_harmonic(1.0, 5.0, 1.0, 1.0, m).verdict, HarmonicUmbilicType::H1);
        assert_eq!(classify_umbilic_harmonic(1.0, 6.0, 1.0, 0.0, m).verdict, HarmonicUmbilicType::H2);
        assert_eq!(classify_umbilic_harmonic(1.0, 1.0, 2.0, 0.0, m).verdict, HarmonicUmbilicType::H3);
        assert_eq!(classify_umbilic_harmonic(1.0, 1.0, 1.0, 0.3, m).verdict, HarmonicUmbilicType::Degenerate);
        assert_eq!(classify_umbilic_harmonic(0.0, 5.0, 1.0, 1.0, m).verdict, HarmonicUmbilicType::Degenerate);
    }

    #[test]
    fn normal_form_recovers_monge_coefficients() {
        for (a, b, c) in [(5.0, 1.0, 1.0), (6.0, 1.0, 0.0), (1.0, 2.0, 0.0), (0.4, 0.9, -0.7)] {
            let nf = monge_normal_form(&monge(1.3, a, b, c), [0.0, 0.0]).unwrap();
            assert!(nf.rotation.abs() < 1e-9, "{nf:?}");
            assert!((nf.k - 1.3).abs() < 1e-12);
            assert!((nf.a - a).abs() < 1e-9 && (nf.b - b).abs() < 1e-9 && (nf.c - c).abs() < 1e-9, "{nf:?}");
        }
    }

    #[test]
    fn normal_form_is_rotation_invariant() {
        // a rotated cubic must come back to a form with vanishing x^2 y term and b >= 0
        let cubic = rotate_cubic([0.4 / 6.0, 0.0, 0.9 / 2.0, -0.7 / 6.0], 0.8);
        let back = rotate_cubic(cubic, -0.8);
        assert!(back[1].abs() < 1e-14);
        assert!((back[2] - 0.45).abs() < 1e-14);
    }

    #[test]
    fn sphere_cubic_is_degenerate() {
        let s = builtin_surface(&SurfaceKind::Sphere { radius: 2.0 }).unwrap();
        assert!(matches!(monge_normal_form(&s, [0.3, 0.2]), Err(Error::DegenerateCubic)));
    }

    #[test]
    fn ellipsoid_has_four_umbilics() {
        let s = builtin_surface(&SurfaceKind::EllipsoidTrig { a: 3.0, b: 2.0, c: 1.0, poles: PoleAxis::Z }).unwrap();
        let pts = locate_umbilics(&s, &UmbilicSearch::default());
        assert_eq!(pts.len(), 4, "{pts:?}");
        let (x0, z0) = (3.0 * (5.0f64 / 8.0).sqrt(), (3.0f64 / 8.0).sqrt());
        let field = QuadraticLineField::harmonic(s.clone());
        for p in pts {
            let x = s.position(p);
            assert!((x.x.abs() - x0).abs() < 1e-8 && x.y.abs() < 1e-8 && (x.z.abs() - z0).abs() < 1e-8, "{x:?}");
            let r = umbilic_report(&field, p, CLASSIFY_MARGIN).unwrap();
            assert_eq!(r.harmonic.verdict, HarmonicUmbilicType::H1, "{r:?}");
            assert_eq!(r.principal.verdict, PrincipalUmbilicType::D1, "{r:?}");
        }
    }

    #[test]
    fn torus_has_no_umbilics() {
        let s = builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap();
        assert!(locate_umbilics(&s, &UmbilicSearch { grid: 40, ..Default::default() }).is_empty());
    }

    #[test]
    fn lifted_equilibria_over_model_umbilics() {
        // (saddles, nodes, hyperbolic sectors, parabolic sectors)
        let expect =
            [((5.0, 1.0, 1.0), (1, 0, 1, 0)), ((6.0, 1.0, 0.0), (2, 1, 1, 1)), ((1.0, 2.0, 0.0), (3, 0, 3, 0))];
        for ((a, b, c), counts) in expect {
            let field = QuadraticLineField::harmonic(monge(1.0, a, b, c));
            let l = umbilic_lift_equilibria(&field, [0.0, 0.0]).unwrap();
            assert_eq!((l.saddles, l.nodes, l.hyperbolic_sectors, l.parabolic_sectors), counts, "{a} {b} {c}: {l:?}");
        }
    }
}
