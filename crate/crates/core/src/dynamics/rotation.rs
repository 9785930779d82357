use crate::error::{Error, Result};
use crate::mean_field::{Branch, QuadraticLineField};
use crate::quadrature::tanh_sinh;
use crate::surface::{builtin_surface, PoleAxis, SurfaceKind};
use crate::tracer::{seed_angle, trace_folded_extended, trace_from_state, Atlas, IntegralCurve, Section, TraceConfig};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Requested accuracy of the closed-form quadratures.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// `rho(a) = int_{-pi/2}^{pi/2} sqrt(a / (cos s (1 + a cos s))) ds`, the
/// advance in the azimuth per transit between the parabolic circles of the
/// torus with `a = r/R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusRotation {
    pub a: f64,
    pub integral: f64,
    pub error: f64,
    /// `integral / 2pi`: turns per transit.
    pub turns: f64,
    pub derivative: f64,
}

pub fn torus_rotation_number(a: f64) -> Result<TorusRotation> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameters(format!("torus ratio a = {a} must lie in (0, 1)")));
    }
    // cos s = sin(distance to the nearer endpoint), exact near the ends
    let cos_s = |l: f64, r: f64| l.min(r).sin();
    let q = tanh_sinh(
        |_, l, r| {
            let c = cos_s(l, r);
            (a / (c * (1.0 + a * c))).sqrt()
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        QUADRATURE_TOL,
    )?;
    let dq = tanh_sinh(
        |_, l, r| {
            let c = cos_s(l, r);
            (a / (c * (1.0 + a * c))).sqrt() / (2.0 * a * (1.0 + a * c))
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        QUADRATURE_TOL,
    )?;
    Ok(TorusRotation { a, integral: q.value, error: q.error, turns: q.value / TAU, derivative: dq.value })
}

/// The ratio `a = r/R` whose transit advance equals `target` radians.
pub fn torus_ratio_for_advance(target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-8, 1.0 - 1e-8);
    let f = |a: f64| torus_rotation_number(a).map(|t| t.integral - target);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo * fhi > 0.0 {
        return Err(Error::InvalidParameters(format!("advance {target} is not attained for a in (0, 1)")));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidRotation {
    pub s1: f64,
    pub s2: f64,
    pub rho: f64,
    pub error: f64,
    /// `(b - c)/c` or `(a - b)/b` below 1e-6: `h` is close to a double root.
    pub near_degenerate: bool,
}

fn check_axes(a: f64, b: f64, c: f64) -> Result<()> {
    if !(a > b && b > c && c > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameters(format!("ellipsoid axes need a > b > c > 0, got ({a}, {b}, {c})")));
    }
    Ok(())
}

/// `int dx / sqrt|h(x)|` over `[lo, hi]`, with `h(x) = (x+a^2)(x+b^2)(x+c^2)`.
/// The endpoints must be consecutive roots of `h` or lie between them.
fn h_integral(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let roots = [-a * a, -b * b, -c * c];
    let q = tanh_sinh(
        |x, l, r| {
            // factors vanishing at an endpoint use the exact endpoint distance
            let factor = |root: f64| {
                if root == lo {
                    l
                } else if root == hi {
                    r
                } else {
                    (x - root).abs()
                }
            };
            1.0 / (factor(roots[0]) * factor(roots[1]) * factor(roots[2])).sqrt()
        },
        lo,
        hi,
        QUADRATURE_TOL,
    )?;
    Ok((q.value, q.error))
}

pub fn ellipsoid_rotation_data(a: f64, b: f64, c: f64) -> Result<EllipsoidRotation> {
    check_axes(a, b, c)?;
    let (s1, e1) = h_integral(a, b, c, -b * b, -c * c)?;
    let (s2, e2) = h_integral(a, b, c, -a * a, -b * b)?;
    let rho = s2 / s1;
    Ok(EllipsoidRotation {
        s1,
        s2,
        rho,
        error: rho * (e1 / s1 + e2 / s2),
        near_degenerate: (b - c) / c < 1e-6 || (a - b) / b < 1e-6,
    })
}

/// The four umbilics `(+-x0, 0, +-z0)`, counterclockwise in the `xz`-plane
/// from `(x0, 0, z0)`.
pub fn ellipsoid_umbilics(a: f64, b: f64, c: f64) -> Result<[Vec3; 4]> {
    check_axes(a, b, c)?;
    let x0 = a * ((a * a - b * b) / (a * a - c * c)).sqrt();
    let z0 = c * ((c * c - b * b) / (c * c - a * a)).sqrt();
    Ok([Vec3::new(x0, 0.0, z0), Vec3::new(-x0, 0.0, z0), Vec3::new(-x0, 0.0, -z0), Vec3::new(x0, 0.0, -z0)])
}

/// Arclength coordinate `sigma` on the umbilic ellipse `y = 0`, measured with
/// `d sigma = d lambda / sqrt|h(lambda)|` counterclockwise from the umbilic
/// `(x0, 0, -z0)`. The full ellipse has length `4 (S1 + S2)`.
#[derive(Debug, Clone, Copy)]
pub struct SigmaCoordinate {
    a: f64,
    b: f64,
    c: f64,
    data: EllipsoidRotation,
    psi0: f64,
}

impl SigmaCoordinate {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let data = ellipsoid_rotation_data(a, b, c)?;
        let p1 = ellipsoid_umbilics(a, b, c)?[0];
        Ok(Self { a, b, c, data, psi0: (p1.z / c).atan2(p1.x / a) })
    }

    pub fn length(&self) -> f64 {
        4.0 * (self.data.s1 + self.data.s2)
    }

    pub fn data(&self) -> EllipsoidRotation {
        self.data
    }

    pub fn at(&self, x: Vec3) -> Result<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let (s1, s2) = (self.data.s1, self.data.s2);
        // the non-trivial ellipsoidal coordinate of a point with y = 0
        let lambda = (x.x * x.x + x.z * x.z - a * a - c * c).clamp(-a * a, -c * c);
        let mut psi = (x.z / c).atan2(x.x / a);
        // angle from p4 = (x0, 0, -z0), counterclockwise in [0, 2pi)
        psi = (psi + self.psi0).rem_euclid(TAU);
        let arc = |lo: f64, hi: f64| -> Result<f64> {
            if hi <= lo {
                Ok(0.0)
            } else {
                h_integral(a, b, c, lo, hi).map(|q| q.0)
            }
        };
        let q = 2.0 * self.psi0;
        Ok(if psi < q {
            // arc through (a, 0, 0), lambda in [-b^2, -c^2]
            let f = arc(-b * b, lambda)?;
            if psi < self.psi0 {
                f
            } else {
                2.0 * s1 - f
            }
        } else if psi < PI {
            // arc through (0, 0, c), lambda in [-a^2, -b^2]
            let g = arc(lambda, -b * b)?;
            2.0 * s1 + if psi < PI / 2.0 + self.psi0 { g } else { 2.0 * s2 - g }
        } else if psi < PI + q {
            let f = arc(-b * b, lambda)?;
            2.0 * (s1 + s2) + if psi < PI + self.psi0 { f } else { 2.0 * s1 - f }
        } else {
            let g = arc(lambda, -b * b)?;
            4.0 * s1 + 2.0 * s2 + if psi < 1.5 * PI + self.psi0 { g } else { 2.0 * s2 - g }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RotationVerdict {
    Rational { p: i64, q: i64, distance: f64 },
    IrrationalLike { nearest_p: i64, nearest_q: i64, distance: f64 },
}

/// Least-squares advance per transit of an accumulated coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRotation {
    pub advance: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the linear fit.
    pub residual: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub transits: usize,
}

/// Fits `values[i] = intercept + i * advance`; `values` holds the
/// accumulated (unwrapped) coordinate at successive transit events.
pub fn empirical_rotation_number(values: &[f64]) -> Result<EmpiricalRotation> {
    let transits = values.len().saturating_sub(1);
    if transits < 2 {
        return Err(Error::TooFewTransits(transits));
    }
    let n = values.len() as f64;
    let mean_i = (n - 1.0) / 2.0;
    let mean_v = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let di = i as f64 - mean_i;
        sxy += di * (v - mean_v);
        sxx += di * di;
    }
    let advance = sxy / sxx;
    let intercept = mean_v - advance * mean_i;
    let ss: f64 = values.iter().enumerate().map(|(i, v)| (v - intercept - advance * i as f64).powi(2)).sum();
    let residual = (ss / n).sqrt();
    let stderr = if n > 2.0 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(EmpiricalRotation { advance, intercept, residual, stderr, transits })
}

/// Continued-fraction convergents of `x`, up to denominator `max_q`.
pub fn convergents(x: f64, max_q: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i64;
        let (p, q) = (ai * p1 + p0, ai * q1 + q0);
        if q > max_q {
            break;
        }
        out.push((p, q));
        (p0, q0, p1, q1) = (p1, q1, p, q);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// Rational when some convergent with denominator at most `max_q` lies
/// within `tol` of `turns` and within the certificate `1/(3q^2)`.
pub fn rotation_verdict(turns: f64, tol: f64, max_q: i64) -> RotationVerdict {
    let cs = convergents(turns, max_q);
    for &(p, q) in &cs {
        let distance = (turns - p as f64 / q as f64).abs();
        if distance <= tol && distance < 1.0 / (3.0 * (q * q) as f64) {
            return RotationVerdict::Rational { p, q, distance };
        }
    }
    let (p, q) = cs.last().copied().unwrap_or((turns.round() as i64, 1));
    RotationVerdict::IrrationalLike { nearest_p: p, nearest_q: q, distance: (turns - p as f64 / q as f64).abs() }
}

/// Analytic and empirical rotation numbers, in the raw convention of the
/// closed form (azimuth advance per transit on the torus, `S2/S1` on the
/// ellipsoid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationResult {
    pub analytic: f64,
    pub analytic_error: f64,
    pub empirical: Option<f64>,
    pub empirical_stderr: Option<f64>,
    pub transits: usize,
    /// Rotation as a fraction of a full turn.
    pub turns: f64,
    pub verdict: RotationVerdict,
}

/// Largest denominator tried for rational detection.
pub const MAX_DENOMINATOR: i64 = 64;

fn trace_until<F: Fn(&IntegralCurve) -> bool>(
    mut length: f64,
    cfg: &TraceConfig,
    enough: F,
    run: impl Fn(&TraceConfig) -> Result<IntegralCurve>,
) -> Result<IntegralCurve> {
    for _ in 0..8 {
        let c = TraceConfig { max_length: length, max_steps: usize::MAX / 2, ..*cfg };
        let curve = run(&c)?;
        if enough(&curve) || curve.termination != crate::tracer::Termination::MaxLength {
            return Ok(curve);
        }
        length *= 2.0;
    }
    Err(Error::NoReturn)
}

/// Traces a folded-extended harmonic line on the torus `(r, R)` through
/// `transits + 1` parabolic contacts and fits the azimuth advance.
pub fn torus_empirical_rotation(
    r: f64,
    big_r: f64,
    transits: usize,
    cfg: &TraceConfig,
) -> Result<(IntegralCurve, EmpiricalRotation)> {
    let patch = builtin_surface(&SurfaceKind::Torus { r, big_r })?;
    let atlas = Atlas::single(QuadraticLineField::harmonic(patch));
    let need = transits + 1;
    // a transit between the circles is a few times r long
    let curve = trace_until(
        (need as f64 + 1.0) * 4.0 * r.max(1.0),
        cfg,
        |c| c.contacts.len() >= need,
        |c| trace_folded_extended(&atlas, 0, [0.0, 0.0], Branch::Maximal, c, &[]),
    )?;
    if curve.contacts.len() < need {
        return Err(Error::TooFewTransits(curve.contacts.len().saturating_sub(1)));
    }
    let thetas: Vec<f64> = curve.contacts.iter().take(need).map(|c| c.point[1]).collect();
    let fit = empirical_rotation_number(&thetas)?;
    Ok((curve, fit))
}

pub fn torus_rotation(r: f64, big_r: f64, transits: Option<usize>, cfg: &TraceConfig) -> Result<RotationResult> {
    let t = torus_rotation_number(r / big_r)?;
    let mut result = RotationResult {
        analytic: t.integral,
        analytic_error: t.error,
        empirical: None,
        empirical_stderr: None,
        transits: 0,
        turns: t.turns,
        verdict: rotation_verdict(t.turns, 1e-9, MAX_DENOMINATOR),
    };
    if let Some(n) = transits {
        let (_, fit) = torus_empirical_rotation(r, big_r, n, cfg)?;
        result.empirical = Some(fit.advance.abs());
        result.empirical_stderr = Some(fit.stderr);
        result.transits = fit.transits;
        let turns = fit.advance.abs() / TAU;
        result.verdict = rotation_verdict(turns, (4.0 * fit.stderr).max(1e-6), MAX_DENOMINATOR);
    }
    Ok(result)
}

/// The two trig charts of the ellipsoid, with poles on the `z` and `x` axes.
pub fn ellipsoid_atlas(a: f64, b: f64, c: f64) -> Result<Atlas> {
    let z = builtin_surface(&SurfaceKind::EllipsoidTrig { a, b, c, poles: PoleAxis::Z })?;
    let x = builtin_surface(&SurfaceKind::EllipsoidTrig { a, b, c, poles: PoleAxis::X })?;
    Ok(Atlas::new(&[z, x], crate::mean_field::MeanCurvatureFunction::Harmonic))
}

/// The section `y = 0` containing the umbilics.
pub fn umbilic_section() -> Section {
    Section {
        normal: Vec3::new(0.0, 1.0, 0.0),
        offset: 0.0,
        origin: Vec3::default(),
        axis: Vec3::new(1.0, 0.0, 0.0),
        range: [f64::NEG_INFINITY, f64::INFINITY],
    }
}

/// Return map of a harmonic line on the ellipse `y = 0`: successive
/// crossings into `y > 0`, in the sigma coordinate, and the fitted advance.
/// The advance `w` of a full turn `L` is converted with `w/(L - w)`; on the
/// minimal branch this is `S2/S1`, on the maximal branch its reciprocal.
pub fn ellipsoid_empirical_rotation(
    a: f64,
    b: f64,
    c: f64,
    seed: [f64; 2],
    branch: Branch,
    returns: usize,
    cfg: &TraceConfig,
) -> Result<(Vec<f64>, EmpiricalRotation)> {
    let atlas = ellipsoid_atlas(a, b, c)?;
    let sigma = SigmaCoordinate::new(a, b, c)?;
    let phi = seed_angle(&atlas.fields[0], seed, branch, cfg)?;
    let sections = [umbilic_section()];
    let need = returns + 1;
    let up = |c: &IntegralCurve| c.crossings.iter().filter(|x| x.sign > 0).count();
    let curve = trace_until(
        (need as f64 + 1.0) * 4.0 * a,
        cfg,
        |c| up(c) >= need,
        |c| trace_from_state(&atlas, 0, [seed[0], seed[1], phi], c, &sections, false),
    )?;
    if up(&curve) < need {
        return Err(Error::NoReturn);
    }
    let len = sigma.length();
    let mut acc = Vec::with_capacity(need);
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    for x in curve.crossings.iter().filter(|x| x.sign > 0).take(need) {
        let s = sigma.at(x.pos)?;
        if let Some(p) = prev {
            total += (s - p).rem_euclid(len);
        } else {
            total = s;
        }
        acc.push(total);
        prev = Some(s);
    }
    let fit = empirical_rotation_number(&acc)?;
    Ok((acc, fit))
}

pub fn ellipsoid_rotation(a: f64, b: f64, c: f64, returns: Option<usize>, cfg: &TraceConfig) -> Result<RotationResult> {
    let data = ellipsoid_rotation_data(a, b, c)?;
    let turns = data.s2 / (data.s1 + data.s2);
    let mut result = RotationResult {
        analytic: data.rho,
        analytic_error: data.error,
        empirical: None,
        empirical_stderr: None,
        transits: 0,
        turns,
        verdict: rotation_verdict(turns, 1e-9, MAX_DENOMINATOR),
    };
    if let Some(n) = returns {
        let len = 4.0 * (data.s1 + data.s2);
        let (_, fit) = ellipsoid_empirical_rotation(a, b, c, [0.4, 0.3], Branch::Minimal, n, cfg)?;
        let w = fit.advance / len;
        result.empirical = Some(w / (1.0 - w));
        result.empirical_stderr = Some(fit.stderr / len / (1.0 - w).powi(2));
        result.transits = fit.transits;
        result.turns = w;
        result.verdict = rotation_verdict(w, (4.0 * fit.stderr / len).max(1e-6), MAX_DENOMINATOR);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_reference_values() {
        for (a, want) in [(0.3, 2.70233632520070398), (0.5, 3.37150070962519126), (0.7, 3.86972371757120825)] {
            let t = torus_rotation_number(a).unwrap();
            assert!((t.integral - want).abs() < 1e-12, "{a}: {}", t.integral);
            assert!(t.error < 1e-10 && t.derivative > 0.0);
        }
        assert!(torus_rotation_number(1.0).is_err());
    }

    #[test]
    fn rho_vanishes_like_sqrt_a() {
        // the integrand tends to sqrt(a / cos s), so the ratio tends to sqrt(100)
        let r = torus_rotation_number(1e-4).unwrap().integral / torus_rotation_number(1e-6).unwrap().integral;
        assert!((r - 10.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn half_turn_ratio() {
        let a = torus_ratio_for_advance(PI).unwrap();
        assert!((a - 0.42332753980780554).abs() < 1e-12, "{a}");
    }

    #[test]
    fn ellipsoid_umbilic_closed_form() {
        let p = ellipsoid_umbilics(3.0, 2.0, 1.0).unwrap();
        assert!((p[0].x - 3.0 * (5.0f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((p[0].z - (3.0f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!(ellipsoid_umbilics(2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn near_sphere_ratio_tends_to_one() {
        let e = 1e-3;
        let d = ellipsoid_rotation_data(1.0 + e, 1.0, 1.0 - e).unwrap();
        assert!((d.rho - 1.0).abs() < 1e-2, "{d:?}");
        assert!(!d.near_degenerate);
        assert!(ellipsoid_rotation_data(3.0, 1.0 + 1e-8, 1.0).unwrap().near_degenerate);
    }

    #[test]
    fn sigma_coordinate_is_continuous_and_hits_umbilics() {
        let sc = SigmaCoordinate::new(3.0, 2.0, 1.0).unwrap();
        let d = sc.data();
        let u = ellipsoid_umbilics(3.0, 2.0, 1.0).unwrap();
        let want = [2.0 * d.s1, 2.0 * d.s1 + 2.0 * d.s2, 4.0 * d.s1 + 2.0 * d.s2];
        for (p, w) in u[..3].iter().zip(want) {
            assert!((sc.at(*p).unwrap() - w).abs() < 1e-7, "{p:?}");
        }
        let mut prev = sc.at(u[3]).unwrap();
        assert!(prev.abs() < 1e-7 || (prev - sc.length()).abs() < 1e-7);
        prev = 0.0;
        let psi0 = sc.psi0;
        for i in 1..400 {
            let psi = -psi0 + TAU * i as f64 / 400.0;
            let s = sc.at(Vec3::new(3.0 * psi.cos(), 0.0, psi.sin())).unwrap();
            // sigma grows like a square root of the angle next to an umbilic
            assert!(s > prev && s - prev < 0.25, "{i}: {prev} -> {s}");
            prev = s;
        }
    }

    #[test]
    fn least_squares_fit() {
        let v: Vec<f64> = (0..10).map(|i| 0.5 + 1.25 * i as f64).collect();
        let f = empirical_rotation_number(&v).unwrap();
        assert!((f.advance - 1.25).abs() < 1e-14 && f.residual < 1e-14);
        assert_eq!(empirical_rotation_number(&[0.0, 1.0]), Err(Error::TooFewTransits(1)));
    }

    #[test]
    fn verdicts() {
        assert_eq!(rotation_verdict(0.5, 1e-9, 64), RotationVerdict::Rational { p: 1, q: 2, distance: 0.0 });
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(matches!(rotation_verdict(golden, 1e-9, 64), RotationVerdict::IrrationalLike { .. }));
        assert_eq!(convergents(0.75, 100), vec![(0, 1), (1, 1), (3, 4)]);
    }

    #[test]
    fn torus_leaf_advance_matches_quadrature() {
        let (curve, fit) = torus_empirical_rotation(1.0, 2.0, 50, &TraceConfig::default()).unwrap();
        assert!((fit.advance - 3.37150070962519126).abs() < 1e-4, "{fit:?}");
        // every contact with the parabolic circles is a graze, never a turn back
        assert!(curve.contacts.iter().all(|c| c.kind == crate::tracer::ContactKind::Tangential));
        assert!(curve.contacts.windows(2).all(|w| w[1].point[1] > w[0].point[1]));
    }
}
