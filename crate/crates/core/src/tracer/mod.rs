//! Integral curves of quadratic line fields.
//!
//! Curves are integrated in the angle fibre: the state is `(u, v, phi)`,
//! where `(cos phi, sin phi)` is the chart direction, and the parameter is
//! arclength in the surface metric. The angle rate comes from implicit
//! differentiation of the lifted equation `H(u, v, phi) = 0`, so the two
//! branches are never separated explicitly and continuation through
//! tangential folds is automatic.

pub mod lift;

pub use lift::{
    angle_lift, lie_cartan_field, lift_value, nearest_mod_pi, root_angles, AngleLift, LiftValue, LiftedPoint,
};

use crate::error::{Error, Result};
use crate::mean_field::{geodesic_torsion, Branch, MeanCurvatureFunction, QuadraticLineField};
use crate::ode::{integrate, locate_event, Control, OdeOptions, OdeStatus, Step};
use crate::surface::{ChartPoint, Domain, SurfacePatch};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::cell::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceConfig {
    pub initial_step: f64,
    pub max_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_length: f64,
    pub max_steps: usize,
    /// Stop (or fold) where `K` falls below this value.
    pub parabolic_tol: f64,
    /// Stop where `H^2 - K <= umbilic_tol^2 (1 + H^2)`.
    pub umbilic_tol: f64,
    /// `|tau_g|` below which a sample carries no branch label.
    pub branch_tol: f64,
    /// Cusp detection threshold on the fold ratio.
    pub cusp_tol: f64,
    /// Stop with `ClosedUp` on returning within this 3-space distance of the seed.
    pub close_tol: Option<f64>,
    /// Switch charts when the current chart quality drops below this value.
    pub switch_quality: f64,
    pub reverse: bool,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            initial_step: 1e-3,
            max_step: 0.05,
            rtol: 1e-10,
            atol: 1e-12,
            max_length: 10.0,
            max_steps: 200_000,
            parabolic_tol: 1e-10,
            umbilic_tol: 1e-6,
            branch_tol: 1e-7,
            cusp_tol: 1e-3,
            close_tol: None,
            switch_quality: 0.35,
            reverse: false,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.initial_step, self.max_step, self.rtol, self.atol, self.max_length];
        if pos.iter().any(|x| !(*x > 0.0)) || self.max_steps == 0 {
            return Err(Error::InvalidParameters("trace tolerances and lengths must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            h0: self.initial_step,
            h_min: 1e-13,
            h_max: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    DomainExit,
    ParabolicContact,
    UmbilicContact,
    MaxLength,
    ClosedUp,
    StepFailure,
}

/// Outside the domain, or within roundoff of a non-periodic edge.
fn at_edge(domain: &Domain, p: ChartPoint) -> bool {
    let near = |x: f64, r: [f64; 2], per: bool| {
        let tol = 1e-9 * (r[1] - r[0]);
        !per && (x - r[0] < tol || r[1] - x < tol)
    };
    !domain.contains(p) || near(p[0], domain.u, domain.periodic[0]) || near(p[1], domain.v, domain.periodic[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub u: f64,
    pub v: f64,
    /// Chart direction angle.
    pub phi: f64,
    /// Arclength in the surface metric.
    pub s: f64,
    pub branch: Option<Branch>,
    pub chart: usize,
    pub pos: Vec3,
}

impl Sample {
    pub fn point(&self) -> ChartPoint {
        [self.u, self.v]
    }

    /// Slope `dv/du`.
    pub fn p(&self) -> f64 {
        self.phi.tan()
    }
}

/// A plane section `normal . x = offset`, with crossings kept only where
/// `axis . (x - origin)` lies in `range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub normal: Vec3,
    pub offset: f64,
    pub origin: Vec3,
    pub axis: Vec3,
    pub range: [f64; 2],
}

impl Section {
    pub fn value(&self, x: Vec3) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn coordinate(&self, x: Vec3) -> f64 {
        self.axis.dot(x - self.origin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub section: usize,
    pub s: f64,
    pub point: ChartPoint,
    pub chart: usize,
    pub pos: Vec3,
    /// Position along the section.
    pub coord: f64,
    /// `+1` when crossing towards positive `normal . x`.
    pub sign: i8,
    /// Chart direction angle at the crossing.
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    /// The curve touches the fold and continues smoothly on the other branch.
    Tangential,
    /// The projected curve turns back at a cusp.
    Cusp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub s: f64,
    pub point: ChartPoint,
    pub chart: usize,
    pub pos: Vec3,
    pub kind: ContactKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralCurve {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub crossings: Vec<Crossing>,
    pub contacts: Vec<Contact>,
}

impl IntegralCurve {
    pub fn length(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s) - self.samples.first().map_or(0.0, |s| s.s)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("curves have at least one sample")
    }
}

/// Charts covering one surface, tried in order when the active chart
/// degenerates.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub fields: Vec<QuadraticLineField>,
}

impl Atlas {
    pub fn single(field: QuadraticLineField) -> Self {
        Self { fields: vec![field] }
    }

    pub fn new(patches: &[SurfacePatch], mean: MeanCurvatureFunction) -> Self {
        Self { fields: patches.iter().map(|p| QuadraticLineField::new(p.clone(), mean)).collect() }
    }

    pub fn mean(&self) -> MeanCurvatureFunction {
        self.fields[0].mean
    }

    fn patch(&self, chart: usize) -> &SurfacePatch {
        &self.fields[chart].patch
    }

    /// Re-expresses a chart point and direction angle in another chart.
    pub fn transfer(&self, from: usize, to: usize, p: ChartPoint, phi: f64) -> Option<(ChartPoint, f64)> {
        let a = self.patch(from);
        let b = self.patch(to);
        let t = a.push_forward(p, [phi.cos(), phi.sin()]);
        let q = b.locate(a.position(p))?;
        if !b.contains(q) {
            return None;
        }
        let j = b.jet2(q);
        let (e, f, g) = (j.du.dot(j.du), j.du.dot(j.dv), j.dv.dot(j.dv));
        let (ru, rv) = (t.dot(j.du), t.dot(j.dv));
        let det = e * g - f * f;
        let w = [(g * ru - f * rv) / det, (e * rv - f * ru) / det];
        Some((q, w[1].atan2(w[0])))
    }

    fn best_chart(&self, pos: Vec3) -> Option<(usize, ChartPoint, f64)> {
        let mut best: Option<(usize, ChartPoint, f64)> = None;
        for (i, f) in self.fields.iter().enumerate() {
            if let Some(q) = f.patch.locate(pos) {
                if f.patch.contains(q) {
                    let quality = f.patch.chart_quality(q);
                    if best.is_none_or(|b| quality > b.2) {
                        best = Some((i, q, quality));
                    }
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Single,
    Folded,
}

/// Where the discriminant is this small (relative), the angle is not
/// re-projected onto the lifted surface.
const PROJECT_DISC_MIN: f64 = 1e-6;

fn branch_label(lift: &AngleLift, phi: f64, tol: f64) -> Option<Branch> {
    let tau = geodesic_torsion(&lift.forms, &lift.curv, [phi.cos(), phi.sin()]).ok()?;
    if tau.abs() < tol {
        None
    } else if tau < 0.0 {
        Some(Branch::Minimal)
    } else {
        Some(Branch::Maximal)
    }
}

const GRAZE_COS: f64 = 0.1;

/// Contacts closer than this in arclength are the same event seen twice.
const CONTACT_MERGE: f64 = 1e-6;

fn push_contact(contacts: &mut Vec<Contact>, c: Contact) {
    match contacts.last_mut() {
        Some(last) if (c.s - last.s).abs() < CONTACT_MERGE => *last = c,
        _ => contacts.push(c),
    }
}

fn uses_gauss_boundary(mean: MeanCurvatureFunction) -> bool {
    matches!(mean, MeanCurvatureFunction::Harmonic | MeanCurvatureFunction::Geometric)
}

fn disc_rel(c: [f64; 3]) -> f64 {
    let scale = c[0].abs().max(c[1].abs()).max(c[2].abs());
    if scale == 0.0 {
        return 0.0;
    }
    (c[1] * c[1] - 4.0 * c[0] * c[2]) / (scale * scale)
}

struct Run<'a> {
    atlas: &'a Atlas,
    cfg: TraceConfig,
    sections: &'a [Section],
    mode: Mode,
}

impl Run<'_> {
    fn lift_at(&self, chart: usize, y: &[f64; 3]) -> Option<AngleLift> {
        let f = &self.atlas.fields[chart];
        if !f.patch.contains([y[0], y[1]]) {
            return None;
        }
        angle_lift(f, [y[0], y[1]], y[2]).ok()
    }

    fn sample(&self, chart: usize, s: f64, y: &[f64; 3], lift: Option<&AngleLift>) -> Sample {
        let patch = self.atlas.patch(chart);
        let branch = lift.and_then(|l| branch_label(l, y[2], self.cfg.branch_tol));
        Sample { u: y[0], v: y[1], phi: y[2], s, branch, chart, pos: patch.position([y[0], y[1]]) }
    }

    fn parabolic_measure(&self, lift: &AngleLift) -> f64 {
        if uses_gauss_boundary(self.atlas.mean()) {
            lift.curv.gauss
        } else {
            disc_rel(lift.coeffs)
        }
    }

    /// True when the direction `y[2]` is nearly tangent to the level set of the parabolic measure.
    fn grazes(&self, c: usize, y: &[f64; 3]) -> bool {
        let h = 1e-6;
        let m = |du: f64, dv: f64| {
            self.lift_at(c, &[y[0] + du, y[1] + dv, y[2]]).map(|l| {
                if uses_gauss_boundary(self.atlas.mean()) {
                    l.curv.gauss
                } else {
                    disc_rel(l.coeffs)
                }
            })
        };
        let (Some(up), Some(um), Some(vp), Some(vm)) = (m(h, 0.0), m(-h, 0.0), m(0.0, h), m(0.0, -h)) else {
            return false;
        };
        let grad = [(up - um) / (2.0 * h), (vp - vm) / (2.0 * h)];
        let norm = grad[0].hypot(grad[1]);
        norm > 0.0 && (grad[0] * y[2].cos() + grad[1] * y[2].sin()).abs() < GRAZE_COS * norm
    }

    fn execute(&self, chart0: usize, y0: [f64; 3]) -> Result<IntegralCurve> {
        self.cfg.validate()?;
        let chart = Cell::new(chart0);
        let first = self.lift_at(chart0, &y0).ok_or_else(|| Error::BadSeed("seed outside the chart domain".into()))?;
        let seed_pos = self.atlas.patch(chart0).position([y0[0], y0[1]]);
        let mut samples = vec![self.sample(chart0, 0.0, &y0, Some(&first))];
        let mut crossings = Vec::new();
        let mut contacts = Vec::new();
        let mut termination = None;
        let mut failure: Option<Error> = None;
        let mut pending_reset: Option<(f64, [f64; 3])> = None;

        let rhs = |_t: f64, y: &[f64; 3]| -> Option<[f64; 3]> {
            let lift = self.lift_at(chart.get(), y)?;
            if lift.hphi == 0.0 {
                return None;
            }
            Some(lift.unit_speed_rate(y[2]))
        };

        let mut on_step = |step: &Step<3>| -> Control<3> {
            let c = chart.get();
            let patch = self.atlas.patch(c);
            let Some(lift1) = self.lift_at(c, &step.y1) else {
                termination = Some(Termination::DomainExit);
                return Control::Stop;
            };
            let lift0 = self.lift_at(c, &step.y0);

            // section crossings
            for (k, sec) in self.sections.iter().enumerate() {
                let g = |_: f64, y: &[f64; 3]| sec.value(patch.position([y[0], y[1]]));
                let (g0, g1) = (g(step.t0, &step.y0), g(step.t1, &step.y1));
                if g0 * g1 < 0.0 || (g1 == 0.0 && g0 != 0.0) {
                    if let Some((t, y)) = locate_event(step, g, 1e-13) {
                        let pos = patch.position([y[0], y[1]]);
                        let coord = sec.coordinate(pos);
                        if coord >= sec.range[0] && coord <= sec.range[1] {
                            crossings.push(Crossing {
                                section: k,
                                s: t,
                                point: [y[0], y[1]],
                                chart: c,
                                pos,
                                coord,
                                sign: if g1 > g0 { 1 } else { -1 },
                                phi: y[2],
                            });
                        }
                    }
                }
            }

            // umbilic approach
            if lift1.curv.is_umbilic(self.cfg.umbilic_tol) {
                samples.push(self.sample(c, step.t1, &step.y1, Some(&lift1)));
                termination = Some(Termination::UmbilicContact);
                return Control::Stop;
            }

            // fold passage: H_phi changes sign exactly where the two roots merge
            let fold_fn = |_: f64, y: &[f64; 3]| {
                self.lift_at(c, y).map_or(0.0, |l| if l.scale > 0.0 { l.hphi / l.scale } else { 0.0 })
            };
            let crossed_fold = lift0.as_ref().is_some_and(|l0| l0.hphi * lift1.hphi < 0.0);
            if crossed_fold {
                let (t, y) = locate_event(step, fold_fn, 1e-12).unwrap_or((step.t1, step.y1));
                let lift = self.lift_at(c, &y);
                samples.push(self.sample(c, t, &y, lift.as_ref()));
                let pos = patch.position([y[0], y[1]]);
                push_contact(
                    &mut contacts,
                    Contact { s: t, point: [y[0], y[1]], chart: c, pos, kind: ContactKind::Tangential },
                );
                if self.mode == Mode::Single {
                    termination = Some(Termination::ParabolicContact);
                    return Control::Stop;
                }
            }

            // transversal approach to the parabolic set
            let measure = self.parabolic_measure(&lift1);
            let cusp = lift1.fold_ratio(step.y1[2]) < self.cfg.cusp_tol;
            if measure < self.cfg.parabolic_tol || cusp {
                let (t, y) = if measure < self.cfg.parabolic_tol {
                    let g = |_: f64, y: &[f64; 3]| {
                        self.lift_at(c, y).map_or(-1.0, |l| self.parabolic_measure(&l) - self.cfg.parabolic_tol)
                    };
                    locate_event(step, g, 1e-12).unwrap_or((step.t1, step.y1))
                } else {
                    (step.t1, step.y1)
                };
                let lift = self.lift_at(c, &y);
                samples.push(self.sample(c, t, &y, lift.as_ref()));
                if self.mode == Mode::Single {
                    termination = Some(Termination::ParabolicContact);
                    return Control::Stop;
                }
                let Some(lift) = lift else {
                    termination = Some(Termination::StepFailure);
                    return Control::Stop;
                };
                // continue on the other root, turning back
                let roots = root_angles(lift.coeffs);
                let w_cur = [y[2].cos(), y[2].sin()];
                let other = roots
                    .iter()
                    .map(|&r| nearest_mod_pi(y[2], r))
                    .max_by(|a, b| (a - y[2]).abs().total_cmp(&(b - y[2]).abs()));
                let Some(other) = other else {
                    failure = Some(Error::TangentialContact { u: y[0], v: y[1] });
                    return Control::Stop;
                };
                // a leaf grazing the parabolic set carries on, one hitting it transversally turns back
                let kind = if self.grazes(c, &y) { ContactKind::Tangential } else { ContactKind::Cusp };
                let mut phi = other;
                if (lift.forms.first(w_cur, [phi.cos(), phi.sin()]) > 0.0) != (kind == ContactKind::Tangential) {
                    phi += std::f64::consts::PI;
                }
                let pos = patch.position([y[0], y[1]]);
                push_contact(&mut contacts, Contact { s: t, point: [y[0], y[1]], chart: c, pos, kind });
                return Control::Reset(t, [y[0], y[1], phi]);
            }

            // closing up
            if let Some(tol) = self.cfg.close_tol {
                if step.t1 > 10.0 * self.cfg.max_step {
                    let dist = |t: f64| {
                        let y = step.dense(t);
                        (patch.position([y[0], y[1]]) - seed_pos).norm()
                    };
                    let (mut a, mut b) = (step.t0, step.t1);
                    for _ in 0..60 {
                        let m1 = a + (b - a) / 3.0;
                        let m2 = b - (b - a) / 3.0;
                        if dist(m1) < dist(m2) {
                            b = m2;
                        } else {
                            a = m1;
                        }
                    }
                    let tm = 0.5 * (a + b);
                    if dist(tm) < tol {
                        let y = step.dense(tm);
                        let lift = self.lift_at(c, &y);
                        samples.push(self.sample(c, tm, &y, lift.as_ref()));
                        termination = Some(Termination::ClosedUp);
                        return Control::Stop;
                    }
                }
            }

            samples.push(self.sample(c, step.t1, &step.y1, Some(&lift1)));

            // chart switch
            if self.atlas.fields.len() > 1 && patch.chart_quality([step.y1[0], step.y1[1]]) < self.cfg.switch_quality {
                if let Some((j, q, quality)) = self.atlas.best_chart(samples.last().unwrap().pos) {
                    if j != c && quality > patch.chart_quality([step.y1[0], step.y1[1]]) {
                        if let Some((q2, phi)) = self.atlas.transfer(c, j, [step.y1[0], step.y1[1]], step.y1[2]) {
                            let _ = q;
                            chart.set(j);
                            return Control::Reset(step.t1, [q2[0], q2[1], phi]);
                        }
                    }
                }
            }

            // stay on the lifted surface
            if lift1.scale > 0.0
                && disc_rel(lift1.coeffs) > PROJECT_DISC_MIN
                && (lift1.h / lift1.scale).abs() > 1e-11
                && lift1.hphi != 0.0
            {
                let phi = step.y1[2] - lift1.h / lift1.hphi;
                pending_reset = Some((step.t1, [step.y1[0], step.y1[1], phi]));
            }
            if let Some((t, y)) = pending_reset.take() {
                return Control::Reset(t, y);
            }
            Control::Continue
        };

        let out = integrate(rhs, 0.0, y0, self.cfg.max_length, &self.cfg.ode(), &mut on_step);
        if let Some(e) = failure {
            return Err(e);
        }
        let termination = termination.unwrap_or(match out.status {
            OdeStatus::Finished => Termination::MaxLength,
            OdeStatus::RhsFailed | OdeStatus::StepUnderflow => {
                // stalled against a chart edge: the leaf leaves the domain
                if at_edge(&self.atlas.patch(chart.get()).domain(), [out.y[0], out.y[1]]) {
                    Termination::DomainExit
                } else if self.mode == Mode::Folded {
                    return Err(Error::TangentialContact { u: out.y[0], v: out.y[1] });
                } else {
                    Termination::StepFailure
                }
            }
            OdeStatus::MaxSteps => Termination::MaxLength,
            OdeStatus::Stopped => Termination::StepFailure,
        });
        Ok(IntegralCurve { samples, termination, crossings, contacts })
    }
}

/// Initial angle for a branch at a seed, oriented so that `dv >= 0`
/// (`du > 0` when `dv = 0`), or the opposite when `reverse` is set.
pub fn seed_angle(field: &QuadraticLineField, seed: ChartPoint, branch: Branch, cfg: &TraceConfig) -> Result<f64> {
    if !field.patch.contains(seed) {
        return Err(Error::BadSeed(format!("({}, {}) is outside the chart domain", seed[0], seed[1])));
    }
    let (forms, curv) = crate::surface::curvature_at(&field.patch, seed)?;
    if curv.is_umbilic(cfg.umbilic_tol) {
        return Err(Error::BadSeed("seed is umbilic".into()));
    }
    if uses_gauss_boundary(field.mean) && curv.gauss <= cfg.parabolic_tol {
        return Err(Error::BadSeed(format!("seed is not elliptic (K = {:e})", curv.gauss)));
    }
    let dir = field.branch_direction(seed, branch).map_err(|e| Error::BadSeed(e.to_string()))?;
    let tau = geodesic_torsion(&forms, &curv, dir)?;
    if tau.abs() < cfg.branch_tol {
        return Err(Error::BadSeed(format!("ambiguous branch at seed (|tau_g| = {:e})", tau.abs())));
    }
    let mut phi = dir[1].atan2(dir[0]);
    let positive = dir[1] > 0.0 || (dir[1] == 0.0 && dir[0] > 0.0);
    if !positive {
        phi += std::f64::consts::PI;
    }
    if cfg.reverse {
        phi += std::f64::consts::PI;
    }
    Ok(phi)
}

/// Traces one leaf of the chosen branch until it leaves the regular region.
pub fn trace_line(
    field: &QuadraticLineField,
    seed: ChartPoint,
    branch: Branch,
    cfg: &TraceConfig,
    sections: &[Section],
) -> Result<IntegralCurve> {
    let phi = seed_angle(field, seed, branch, cfg)?;
    let atlas = Atlas::single(field.clone());
    Run { atlas: &atlas, cfg: *cfg, sections, mode: Mode::Single }.execute(0, [seed[0], seed[1], phi])
}

/// Traces a leaf continued across the parabolic set by the other branch,
/// switching charts of `atlas` as needed.
pub fn trace_folded_extended(
    atlas: &Atlas,
    chart: usize,
    seed: ChartPoint,
    branch: Branch,
    cfg: &TraceConfig,
    sections: &[Section],
) -> Result<IntegralCurve> {
    let phi = seed_angle(&atlas.fields[chart], seed, branch, cfg)?;
    trace_from_state(atlas, chart, [seed[0], seed[1], phi], cfg, sections, true)
}

/// Traces from an explicit lifted state `(u, v, phi)`.
pub fn trace_from_state(
    atlas: &Atlas,
    chart: usize,
    state: [f64; 3],
    cfg: &TraceConfig,
    sections: &[Section],
    folded: bool,
) -> Result<IntegralCurve> {
    let mode = if folded { Mode::Folded } else { Mode::Single };
    Run { atlas, cfg: *cfg, sections, mode }.execute(chart, state)
}

/// A closed sub-curve found between two same-direction section crossings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub start: Crossing,
    pub end: Crossing,
    /// Period length.
    pub length: f64,
}

/// Finds the first pair of successive same-direction crossings of
/// `section` that agree to `tol` in 3-space.
pub fn cycle_detect(curve: &IntegralCurve, section: usize, tol: f64) -> Option<Cycle> {
    let xs: Vec<&Crossing> = curve.crossings.iter().filter(|c| c.section == section).collect();
    for (i, a) in xs.iter().enumerate() {
        if let Some(b) = xs[i + 1..].iter().find(|b| b.sign == a.sign) {
            if (b.pos - a.pos).norm() <= tol {
                return Some(Cycle { start: **a, end: **b, length: b.s - a.s });
            }
        }
    }
    None
}

/// `max |H| / scale` over the samples: how far the curve drifted from the
/// lifted surface.
pub fn residual(atlas: &Atlas, curve: &IntegralCurve) -> f64 {
    curve
        .samples
        .iter()
        .filter_map(|s| {
            let l = angle_lift(&atlas.fields[s.chart], s.point(), s.phi).ok()?;
            (l.scale > 0.0).then(|| (l.h / l.scale).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
