use crate::error::{Error, Result};
use crate::mean_field::{geodesic_torsion, Branch, QuadraticLineField};
use crate::ode::{integrate, Control, OdeStatus};
use crate::surface::{forms_jet, ChartPoint, HelixRibbon, SurfacePatch};
use crate::tracer::lift::angle_lift;
use crate::tracer::{seed_angle, trace_from_state, Atlas, Crossing, Cycle, Sample, Section, Termination, TraceConfig};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// First return to the section in the starting direction.
    Return,
    /// First arrival at the section, for transition maps between sections.
    Arrival,
}

/// Crossings closer than this to the start are the start itself.
const SELF_CROSSING: f64 = 1e-9;

/// Follows the leaf of `branch` through `start` to the section.
#[allow(clippy::too_many_arguments)]
pub fn poincare_map(
    atlas: &Atlas,
    chart: usize,
    start: ChartPoint,
    branch: Branch,
    section: &Section,
    kind: MapKind,
    cfg: &TraceConfig,
    folded: bool,
) -> Result<Crossing> {
    let field = &atlas.fields[chart];
    let phi = seed_angle(field, start, branch, cfg)?;
    let patch = &field.patch;
    let sign0 = section.normal.dot(patch.push_forward(start, [phi.cos(), phi.sin()])).signum() as i8;
    let sections = std::slice::from_ref(section);
    let curve = trace_from_state(atlas, chart, [start[0], start[1], phi], cfg, sections, folded)?;
    let hit = curve.crossings.iter().find(|c| {
        c.s > SELF_CROSSING
            && match kind {
                MapKind::Return => c.sign == sign0,
                MapKind::Arrival => true,
            }
    });
    match (hit, curve.termination) {
        (Some(c), _) => Ok(*c),
        (None, Termination::DomainExit) => Err(Error::LeftDomain),
        _ => Err(Error::NoReturn),
    }
}

/// Derivative of a transition map along an arc of a harmonic line, in the
/// normal coordinate `v` along `N x T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionDerivative {
    pub s0: f64,
    pub s1: f64,
    /// `int [ (K/H)_v / (2 tau_g) + (k_g / tau_g)(H - K/H) ] ds`.
    pub integral: f64,
    /// `sqrt(tau_g(s0) / tau_g(s1))`.
    pub prefactor: f64,
    /// `prefactor * exp(integral)`.
    pub derivative: f64,
    /// `int K / H^2 ds` over the same arc.
    pub gauss_over_mean_sq: f64,
    pub end: [f64; 3],
}

/// Geodesic curvature of the curve through `p` with direction angle `phi`
/// and angle rate `dphi` (per unit arclength).
pub fn geodesic_curvature(patch: &SurfacePatch, p: ChartPoint, phi: f64, dphi: f64) -> Option<f64> {
    let a = patch.expand(p, 2);
    let d = |i, j| Vec3::new(a[0].partial(i, j), a[1].partial(i, j), a[2].partial(i, j));
    let (au, av, auu, auv, avv) = (d(1, 0), d(0, 1), d(2, 0), d(1, 1), d(0, 2));
    let normal = au.cross(av).normalized()?;
    let (s, c) = phi.sin_cos();
    let big_p = au * c + av * s;
    let n = big_p.norm();
    let (x1, y1) = (c / n, s / n);
    let dp = (auu * x1 + auv * y1) * c + (auv * x1 + avv * y1) * s + (av * c - au * s) * dphi;
    let dn = big_p.dot(dp) / n;
    let x2 = (-s * dphi * n - c * dn) / (n * n);
    let y2 = (c * dphi * n - s * dn) / (n * n);
    let acc = auu * (x1 * x1) + auv * (2.0 * x1 * y1) + avv * (y1 * y1) + au * x2 + av * y2;
    let t = big_p * (1.0 / n);
    Some(acc.dot(normal.cross(t)))
}

/// Smallest admissible `|tau_g|` along an arc.
pub const TORSION_MIN: f64 = 1e-8;

struct ArcIntegrand {
    rate: [f64; 3],
    integrand: f64,
    gauss_over_mean_sq: f64,
    tau: f64,
}

fn arc_integrand(field: &QuadraticLineField, y: &[f64]) -> Result<ArcIntegrand> {
    let p = [y[0], y[1]];
    let phi = y[2];
    let lift = angle_lift(field, p, phi)?;
    let rate = lift.unit_speed_rate(phi);
    let w = lift.forms.normalize([phi.cos(), phi.sin()]);
    let tau = geodesic_torsion(&lift.forms, &lift.curv, w)?;
    if tau.abs() < TORSION_MIN {
        return Err(Error::TorsionVanishes(tau.abs()));
    }
    let (k, h) = forms_jet(&field.patch, p, 1)?.gauss_mean();
    let mu = k / h;
    let conormal = lift.forms.rotate_quarter(w);
    let g = mu.gradient();
    let mu_v = g[0] * conormal[0] + g[1] * conormal[1];
    let kg =
        geodesic_curvature(&field.patch, p, phi, rate[2]).ok_or(Error::DegenerateJet { u: p[0], v: p[1], det: 0.0 })?;
    let (hv, muv) = (h.value(), mu.value());
    Ok(ArcIntegrand {
        rate,
        integrand: mu_v / (2.0 * tau) + kg / tau * (hv - muv),
        gauss_over_mean_sq: k.value() / (hv * hv),
        tau,
    })
}

/// Integrates the log-derivative along the leaf from the lifted state
/// `start` over surface arclength `length`.
pub fn transition_log_derivative(
    field: &QuadraticLineField,
    start: [f64; 3],
    length: f64,
    cfg: &TraceConfig,
) -> Result<TransitionDerivative> {
    let first = arc_integrand(field, &start)?;
    let rhs = |_: f64, y: &[f64; 5]| -> Option<[f64; 5]> {
        match arc_integrand(field, y) {
            Ok(a) => Some([a.rate[0], a.rate[1], a.rate[2], a.integrand, a.gauss_over_mean_sq]),
            Err(_) => None,
        }
    };
    let y0 = [start[0], start[1], start[2], 0.0, 0.0];
    let out = integrate(rhs, 0.0, y0, length, &cfg.ode(), |_| Control::<5>::Continue);
    if out.status != OdeStatus::Finished {
        return Err(arc_integrand(field, &out.y).err().unwrap_or(Error::LeftDomain));
    }
    let last = arc_integrand(field, &out.y)?;
    let prefactor = (first.tau / last.tau).sqrt();
    Ok(TransitionDerivative {
        s0: 0.0,
        s1: length,
        integral: out.y[3],
        prefactor,
        derivative: prefactor * out.y[3].exp(),
        gauss_over_mean_sq: out.y[4],
        end: [out.y[0], out.y[1], out.y[2]],
    })
}

/// `ln pi'` of a detected cycle; the torsion prefactor cancels over a period.
pub fn cycle_log_derivative(atlas: &Atlas, cycle: &Cycle, cfg: &TraceConfig) -> Result<TransitionDerivative> {
    let c = &cycle.start;
    transition_log_derivative(&atlas.fields[c.chart], [c.point[0], c.point[1], c.phi], cycle.length, cfg)
}

/// `ln pi'` over a closed traced curve of length `length` starting at `start`.
pub fn cycle_log_derivative_from(
    atlas: &Atlas,
    start: &Sample,
    length: f64,
    cfg: &TraceConfig,
) -> Result<TransitionDerivative> {
    transition_log_derivative(&atlas.fields[start.chart], [start.u, start.v, start.phi], length, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Hyperbolicity {
    Hyperbolic { ln_derivative: f64 },
    NonHyperbolic { ln_derivative: f64, margin: f64 },
}

/// Hyperbolic iff `|ln pi'| > margin`; a value exactly at the margin is not.
pub fn hyperbolicity_test(ln_derivative: f64, margin: f64) -> Hyperbolicity {
    if ln_derivative.abs() > margin {
        Hyperbolicity::Hyperbolic { ln_derivative }
    } else {
        Hyperbolicity::NonHyperbolic { ln_derivative, margin }
    }
}

/// Length of the closed core curve of a helix ribbon, by the trapezoid rule
/// (spectrally accurate for periodic integrands).
pub fn ribbon_cycle_length(ribbon: &HelixRibbon) -> f64 {
    let n = 4096;
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| ribbon.speed(-std::f64::consts::PI + i as f64 * h)).sum::<f64>() * h
}

/// `ln pi'` of the core cycle `v = 0` of a helix ribbon.
pub fn ribbon_cycle(ribbon: HelixRibbon, cfg: &TraceConfig) -> Result<TransitionDerivative> {
    let length = ribbon_cycle_length(&ribbon);
    let field = QuadraticLineField::harmonic(SurfacePatch::new(ribbon));
    transition_log_derivative(&field, [-std::f64::consts::PI, 0.0, 0.0], length, cfg)
}

/// First-order response of `ln pi'` to the cubic bump `4 eps tau_g v^3 / 6`
/// in the normal direction, against `int K/H^2 ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub epsilon: f64,
    pub ln_plus: f64,
    pub ln_minus: f64,
    pub derivative: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

pub fn perturbation_check(
    big_r: f64,
    r: f64,
    turns: u32,
    epsilon: f64,
    cfg: &TraceConfig,
) -> Result<PerturbationCheck> {
    let plus = ribbon_cycle(HelixRibbon::new(big_r, r, turns, epsilon, 0.1)?, cfg)?;
    let minus = ribbon_cycle(HelixRibbon::new(big_r, r, turns, -epsilon, 0.1)?, cfg)?;
    let derivative = (plus.integral - minus.integral) / (2.0 * epsilon);
    let predicted = plus.gauss_over_mean_sq;
    Ok(PerturbationCheck {
        epsilon,
        ln_plus: plus.integral,
        ln_minus: minus.integral,
        derivative,
        predicted,
        relative_error: ((derivative - predicted) / predicted).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{builtin_surface, DomainOverride, SurfaceKind, SurfaceSpec};

    #[test]
    fn symmetric_ribbon_cycle_is_not_hyperbolic() {
        let cfg = TraceConfig::default();
        let c = ribbon_cycle(HelixRibbon::new(3.0, 0.5, 5, 0.0, 0.1).unwrap(), &cfg).unwrap();
        assert!(c.integral.abs() < 1e-8, "{c:?}");
        // the leaf closes up after one period
        assert!((c.end[0] - std::f64::consts::PI).abs() < 1e-8 && c.end[1].abs() < 1e-10);
        assert!(matches!(hyperbolicity_test(c.integral, 1e-6), Hyperbolicity::NonHyperbolic { .. }));
    }

    #[test]
    fn margin_boundary_is_conservative() {
        assert!(matches!(hyperbolicity_test(1e-6, 1e-6), Hyperbolicity::NonHyperbolic { .. }));
        assert!(matches!(hyperbolicity_test(-2e-6, 1e-6), Hyperbolicity::Hyperbolic { .. }));
    }

    #[test]
    fn perturbation_response_matches_gauss_over_mean_squared() {
        let p = perturbation_check(3.0, 0.5, 5, 1e-3, &TraceConfig::default()).unwrap();
        assert!(p.predicted > 0.0);
        assert!(p.relative_error < 1e-6, "{p:?}");
    }

    /// Transition between two meridian half-planes of the torus: the
    /// derivative from the arc integral against central differences of the
    /// traced map, converted from section coordinates to normal offsets.
    #[test]
    fn torus_arc_matches_finite_differences() {
        let cfg = TraceConfig::default();
        let (r, big_r) = (1.0, 2.0);
        let patch = builtin_surface(&SurfaceKind::Torus { r, big_r }).unwrap();
        let atlas = Atlas::single(QuadraticLineField::harmonic(patch.clone()));
        let meridian = |theta: f64| {
            let p = patch.position([0.0, theta]);
            let axis = Vec3::new(p.x, p.y, 0.0).normalized().unwrap();
            Section {
                normal: Vec3::new(0.0, 0.0, 1.0).cross(axis),
                offset: 0.0,
                origin: Vec3::default(),
                axis,
                range: [0.0, 10.0],
            }
        };
        let (start, end) = (meridian(0.0), meridian(0.6));
        // |axis component| of the section's tangent, and sine of the angle to the leaf
        let geometry = |p: ChartPoint, phi: f64, sec: &Section| {
            let a = patch.normal(p).unwrap().cross(sec.normal).normalized().unwrap();
            let t = patch.push_forward(p, [phi.cos(), phi.sin()]).normalized().unwrap();
            (a.dot(sec.axis).abs(), t.cross(a).norm())
        };
        for branch in [Branch::Maximal, Branch::Minimal] {
            let (s0, d) = (0.3, 1e-4);
            let map = |s: f64| poincare_map(&atlas, 0, [s, 0.0], branch, &end, MapKind::Arrival, &cfg, false).unwrap();
            let (cp, cm, c0) = (map(s0 + d), map(s0 - d), map(s0));
            let radial = |s: f64| big_r + r * s.cos();
            let dcoord = (cp.coord - cm.coord) / (radial(s0 + d) - radial(s0 - d));
            let phi0 = seed_angle(&atlas.fields[0], [s0, 0.0], branch, &cfg).unwrap();
            let (ax0, sin0) = geometry([s0, 0.0], phi0, &start);
            let (ax1, sin1) = geometry(c0.point, c0.phi, &end);
            let fd = dcoord.abs() * ax0 / ax1 * sin1 / sin0;
            let td = transition_log_derivative(&atlas.fields[0], [s0, 0.0, phi0], c0.s, &cfg).unwrap();
            assert!(((td.derivative - fd) / fd).abs() < 1e-6, "{branch:?}: {} vs {fd}", td.derivative);
            assert!((td.end[1] - 0.6).abs() < 1e-9);
        }
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        // convex cap away from its umbilic, cut to a small square
        let spec = SurfaceSpec {
            kind: SurfaceKind::MongeUmbilic { k: 1.0, a: 0.5, b: 0.1, c: 0.2, quartic: None },
            domain: Some(DomainOverride { u: [0.02, 0.2], v: [0.02, 0.2] }),
        };
        let atlas = Atlas::single(QuadraticLineField::harmonic(spec.build().unwrap()));
        let far = Section {
            normal: Vec3::new(1.0, 0.0, 0.0),
            offset: 100.0,
            origin: Vec3::default(),
            axis: Vec3::new(0.0, 1.0, 0.0),
            range: [-1.0, 1.0],
        };
        let err = poincare_map(
            &atlas,
            0,
            [0.1, 0.1],
            Branch::Minimal,
            &far,
            MapKind::Arrival,
            &TraceConfig::default(),
            false,
        );
        assert_eq!(err, Err(Error::LeftDomain));
    }

    #[test]
    fn geodesic_curvature_of_a_parallel() {
        // torus parallel s = s0 has k_g = -sin s0 / (R + r cos s0) up to orientation
        let patch = builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap();
        let s0: f64 = 0.4;
        let kg = geodesic_curvature(&patch, [s0, 0.3], std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!((kg.abs() - s0.sin() / (2.0 + s0.cos())).abs() < 1e-12, "{kg}");
    }
}
