//! Static SVG rendering of line configurations.
//!
//! Leaves are drawn per branch: maximal in blue, minimal in red (dashed),
//! samples without a branch label (folds, near-zero torsion) in grey.
//! Separatrices are drawn wider and darker. The elliptic region is shaded,
//! the parabolic set is a thick olive line, umbilics are circles and folded
//! singularities are diamonds, each labelled with its type.

use crate::error::Result;
use crate::mean_field::{Branch, QuadraticLineField};
use crate::report::AnalysisReport;
use crate::singularity::{
    classify_parabolic_harmonic, lie_cartan_jacobians, parabolic_curves, umbilic_lift_equilibria, umbilic_report,
    ParabolicTraceConfig,
};
use crate::surface::{curvature_at, ChartPoint, DomainOverride, SurfaceKind, SurfacePatch, SurfaceSpec};
use crate::tracer::{seed_angle, trace_from_state, Atlas, IntegralCurve, TraceConfig};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    /// Chart coordinates of the first chart.
    #[default]
    Chart,
    /// Orthographic view of the embedded surface; angles in radians.
    Orthographic { azimuth: f64, elevation: f64 },
}

impl Projection {
    pub fn apply(&self, x: Vec3) -> [f64; 2] {
        match *self {
            Projection::Chart => [x.x, x.y],
            Projection::Orthographic { azimuth, elevation } => {
                let (sa, ca) = azimuth.sin_cos();
                let (se, ce) = elevation.sin_cos();
                let right = -sa * x.x + ca * x.y;
                let up = -se * (ca * x.x + sa * x.y) + ce * x.z;
                [right, up]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub at: [f64; 2],
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub points: Vec<[f64; 2]>,
    pub branch: Option<Branch>,
    pub separatrix: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SvgScene {
    /// `[[x0, x1], [y0, y1]]` in scene coordinates.
    pub viewport: [[f64; 2]; 2],
    /// Shaded rectangles `[[x0, x1], [y0, y1]]` covering the elliptic region.
    pub elliptic: Vec<[[f64; 2]; 2]>,
    pub parabolic: Vec<Vec<[f64; 2]>>,
    pub umbilics: Vec<Marker>,
    pub folded: Vec<Marker>,
    pub leaves: Vec<Leaf>,
}

impl SvgScene {
    pub fn new(viewport: [[f64; 2]; 2]) -> Self {
        Self { viewport, ..Self::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.elliptic.is_empty()
            && self.parabolic.is_empty()
            && self.umbilics.is_empty()
            && self.folded.is_empty()
            && self.leaves.is_empty()
    }

    /// Adds a traced curve, split into runs of constant branch label. Only
    /// samples in `chart` are kept in chart projection; periodic wrap-arounds
    /// break the polyline.
    pub fn add_curve(
        &mut self,
        atlas: &Atlas,
        chart: usize,
        curve: &IntegralCurve,
        proj: Projection,
        separatrix: bool,
    ) {
        let pts: Vec<(Option<[f64; 2]>, Option<Branch>)> = curve
            .samples
            .iter()
            .map(|s| {
                let p = match proj {
                    Projection::Chart if s.chart == chart => {
                        let w = atlas.fields[chart].patch.domain().wrap([s.u, s.v]);
                        Some(w)
                    }
                    Projection::Chart => None,
                    _ => Some(proj.apply(s.pos)),
                };
                (p, s.branch)
            })
            .collect();
        self.add_runs(&pts, separatrix, proj == Projection::Chart);
    }

    fn add_runs(&mut self, pts: &[(Option<[f64; 2]>, Option<Branch>)], separatrix: bool, detect_wrap: bool) {
        let [[x0, x1], [y0, y1]] = self.viewport;
        let (jx, jy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
        let mut run: Vec<[f64; 2]> = Vec::new();
        let mut branch = None;
        let flush = |run: &mut Vec<[f64; 2]>, branch: Option<Branch>, leaves: &mut Vec<Leaf>| {
            if run.len() >= 2 {
                leaves.push(Leaf { points: std::mem::take(run), branch, separatrix });
            }
            run.clear();
        };
        for &(p, b) in pts {
            let Some(p) = p else {
                flush(&mut run, branch, &mut self.leaves);
                continue;
            };
            if let Some(last) = run.last().copied() {
                let jump = detect_wrap && ((p[0] - last[0]).abs() > jx || (p[1] - last[1]).abs() > jy);
                if jump {
                    flush(&mut run, branch, &mut self.leaves);
                } else if b != branch {
                    // share the joint so runs stay connected
                    flush(&mut run, branch, &mut self.leaves);
                    run.push(last);
                }
            }
            branch = b;
            run.push(p);
        }
        flush(&mut run, branch, &mut self.leaves);
    }

    /// Shades cells of an `n x n` grid over the viewport where `K > 0`,
    /// merging horizontal runs.
    pub fn shade_elliptic(&mut self, patch: &SurfacePatch, n: usize) {
        let [[x0, x1], [y0, y1]] = self.viewport;
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        for j in 0..n {
            let yc = y0 + (j as f64 + 0.5) * hy;
            let mut start: Option<usize> = None;
            for i in 0..=n {
                let inside = i < n && {
                    let p = [x0 + (i as f64 + 0.5) * hx, yc];
                    patch.contains(p) && curvature_at(patch, p).map(|(_, c)| c.gauss > 0.0).unwrap_or(false)
                };
                match (inside, start) {
                    (true, None) => start = Some(i),
                    (false, Some(s)) => {
                        let cell =
                            [[x0 + s as f64 * hx, x0 + i as f64 * hx], [y0 + j as f64 * hy, y0 + (j + 1) as f64 * hy]];
                        self.elliptic.push(cell);
                        start = None;
                    }
                    _ => {}
                }
            }
        }
    }

    /// Scene for an analysis report: its parabolic lines, singular points and
    /// traced curves.
    pub fn from_report(report: &AnalysisReport, proj: Projection) -> Result<Self> {
        let atlas = report.config.atlas()?;
        let patch = &atlas.fields[0].patch;
        let chart = proj == Projection::Chart;
        let project = |p: ChartPoint, pos: Vec3| if chart { p } else { proj.apply(pos) };

        let mut parabolic = Vec::new();
        for line in &report.parabolic {
            let pts: Vec<[f64; 2]> = line.points.iter().map(|p| project(*p, patch.position(*p))).collect();
            parabolic.push(pts);
        }
        let umbilics: Vec<Marker> = report
            .umbilics
            .iter()
            .map(|u| Marker { at: project(u.point, u.position), label: format!("{:?}", u.harmonic.verdict) })
            .collect();
        let folded: Vec<Marker> = report
            .parabolic
            .iter()
            .flat_map(|l| l.tangential.iter())
            .map(|t| Marker { at: project(t.point, t.position), label: format!("{:?}", t.harmonic.verdict) })
            .collect();

        let viewport = if chart {
            let d = patch.domain();
            [d.u, d.v]
        } else {
            let mut all: Vec<[f64; 2]> = parabolic.iter().flatten().copied().collect();
            all.extend(umbilics.iter().chain(folded.iter()).map(|m| m.at));
            all.extend(report.curves.iter().flat_map(|c| c.points.iter().map(|p| proj.apply(p.pos))));
            bounding_box(&all)
        };
        let mut scene = SvgScene { viewport, parabolic, umbilics, folded, ..SvgScene::default() };
        if chart {
            scene.shade_elliptic(patch, 64);
        }
        for c in &report.curves {
            let pts: Vec<(Option<[f64; 2]>, Option<Branch>)> = c
                .points
                .iter()
                .map(|p| {
                    let at = match proj {
                        Projection::Chart if p.chart == 0 => Some(patch.domain().wrap([p.u, p.v])),
                        Projection::Chart => None,
                        _ => Some(proj.apply(p.pos)),
                    };
                    (at, p.branch)
                })
                .collect();
            scene.add_runs(&pts, false, chart);
        }
        Ok(scene)
    }
}

/// Padded bounding box, never degenerate.
fn bounding_box(pts: &[[f64; 2]]) -> [[f64; 2]; 2] {
    if pts.is_empty() {
        return [[-1.0, 1.0], [-1.0, 1.0]];
    }
    let mut b = [[f64::INFINITY, f64::NEG_INFINITY], [f64::INFINITY, f64::NEG_INFINITY]];
    for p in pts {
        for k in 0..2 {
            b[k][0] = b[k][0].min(p[k]);
            b[k][1] = b[k][1].max(p[k]);
        }
    }
    for r in &mut b {
        let pad = 0.05 * (r[1] - r[0]).max(1e-9);
        r[0] -= pad;
        r[1] += pad;
    }
    b
}

/// Liang-Barsky clipping of the segment `a -> b`; returns the parameter
/// interval inside the box.
fn clip_segment(a: [f64; 2], b: [f64; 2], vp: &[[f64; 2]; 2]) -> Option<(f64, f64)> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        for (p, q) in [(-d[k], a[k] - vp[k][0]), (d[k], vp[k][1] - a[k])] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    match t {
        0.0 => a,
        1.0 => b,
        _ => [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
    }
}

fn clamp_to(p: [f64; 2], vp: &[[f64; 2]; 2]) -> [f64; 2] {
    [p[0].clamp(vp[0][0], vp[0][1]), p[1].clamp(vp[1][0], vp[1][1])]
}

/// Splits a polyline into the pieces inside the viewport.
pub fn clip_polyline(points: &[[f64; 2]], vp: &[[f64; 2]; 2]) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    let mut cur: Vec<[f64; 2]> = Vec::new();
    for w in points.windows(2) {
        match clip_segment(w[0], w[1], vp) {
            Some((t0, t1)) => {
                if t0 > 0.0 || cur.is_empty() {
                    if cur.len() >= 2 {
                        out.push(std::mem::take(&mut cur));
                    }
                    cur.clear();
                    cur.push(clamp_to(lerp(w[0], w[1], t0), vp));
                }
                cur.push(clamp_to(lerp(w[0], w[1], t1), vp));
                if t1 < 1.0 {
                    out.push(std::mem::take(&mut cur));
                }
            }
            None => {
                if cur.len() >= 2 {
                    out.push(std::mem::take(&mut cur));
                }
                cur.clear();
            }
        }
    }
    if cur.len() >= 2 {
        out.push(cur);
    }
    out
}

const WIDTH: f64 = 800.0;

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Renders the scene as an SVG 1.1 document. Output depends only on the
/// scene, so equal scenes give identical bytes.
pub fn render_svg(scene: &SvgScene) -> String {
    let vp = scene.viewport;
    let (dx, dy) = (vp[0][1] - vp[0][0], vp[1][1] - vp[1][0]);
    let height = (WIDTH * dy / dx).clamp(200.0, 1600.0);
    let px = |p: [f64; 2]| [(p[0] - vp[0][0]) / dx * WIDTH, (vp[1][1] - p[1]) / dy * height];
    let inside = |p: [f64; 2]| p[0] >= vp[0][0] && p[0] <= vp[0][1] && p[1] >= vp[1][0] && p[1] <= vp[1][1];
    let path = |pts: &[[f64; 2]]| -> String {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let [x, y] = px(*p);
            let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, num(x), num(y));
        }
        d
    };

    let mut s = String::new();
    let (w, h) = (num(WIDTH), num(height));
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    s.push_str(
        "<style>\n\
         .elliptic{fill:#f3ecd2;stroke:none}\n\
         .parabolic{fill:none;stroke:#6b7d1f;stroke-width:2.5}\n\
         .leaf{fill:none;stroke-width:1;stroke-linejoin:round}\n\
         .maximal{stroke:#1f5fa8}\n\
         .minimal{stroke:#c0392b;stroke-dasharray:5 3}\n\
         .unlabelled{stroke:#888888}\n\
         .separatrix{stroke-width:2.4}\n\
         .umbilic{fill:#ffffff;stroke:#000000;stroke-width:1.5}\n\
         .folded{fill:#000000;stroke:none}\n\
         .label{font-family:sans-serif;font-size:12px;fill:#000000}\n\
         </style>\n",
    );
    let _ = writeln!(s, r##"<rect x="0.00" y="0.00" width="{w}" height="{h}" fill="#ffffff" stroke="#000000"/>"##);

    s.push_str("<g id=\"elliptic\">\n");
    for cell in &scene.elliptic {
        let x = [cell[0][0].max(vp[0][0]), cell[0][1].min(vp[0][1])];
        let y = [cell[1][0].max(vp[1][0]), cell[1][1].min(vp[1][1])];
        if x[0] >= x[1] || y[0] >= y[1] {
            continue;
        }
        let [ax, ay] = px([x[0], y[1]]);
        let rw = (x[1] - x[0]) / dx * WIDTH;
        let rh = (y[1] - y[0]) / dy * height;
        let _ = writeln!(
            s,
            r#"<rect class="elliptic" x="{}" y="{}" width="{}" height="{}"/>"#,
            num(ax),
            num(ay),
            num(rw),
            num(rh)
        );
    }
    s.push_str("</g>\n<g id=\"leaves\">\n");
    // separatrices last so they sit on top
    let mut leaves: Vec<&Leaf> = scene.leaves.iter().filter(|l| !l.separatrix).collect();
    leaves.extend(scene.leaves.iter().filter(|l| l.separatrix));
    for leaf in leaves {
        let class = match leaf.branch {
            Some(Branch::Maximal) => "maximal",
            Some(Branch::Minimal) => "minimal",
            None => "unlabelled",
        };
        let sep = if leaf.separatrix { " separatrix" } else { "" };
        for piece in clip_polyline(&leaf.points, &vp) {
            let _ = writeln!(s, r#"<path class="leaf {class}{sep}" d="{}"/>"#, path(&piece));
        }
    }
    s.push_str("</g>\n<g id=\"parabolic\">\n");
    for line in &scene.parabolic {
        for piece in clip_polyline(line, &vp) {
            let _ = writeln!(s, r#"<path class="parabolic" d="{}"/>"#, path(&piece));
        }
    }
    s.push_str("</g>\n<g id=\"markers\">\n");
    // labels go to the right of the marker unless that would leave the frame
    let label = |s: &mut String, m: &Marker| {
        let [x, y] = px(m.at);
        let right = x < 0.85 * WIDTH;
        let (lx, anchor) = if right { (x + 8.0, "start") } else { (x - 8.0, "end") };
        let ly = (y - 6.0).max(12.0);
        let _ = writeln!(
            s,
            r#"<text class="label" x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
            num(lx),
            num(ly),
            escape(&m.label)
        );
    };
    for m in scene.umbilics.iter().filter(|m| inside(m.at)) {
        let [x, y] = px(m.at);
        let _ = writeln!(s, r#"<circle class="umbilic" cx="{}" cy="{}" r="5.00"/>"#, num(x), num(y));
        label(&mut s, m);
    }
    for m in scene.folded.iter().filter(|m| inside(m.at)) {
        let [x, y] = px(m.at);
        let pts = [(x, y - 6.0), (x + 6.0, y), (x, y + 6.0), (x - 6.0, y)];
        let d: Vec<String> = pts.iter().map(|(a, b)| format!("{},{}", num(*a), num(*b))).collect();
        let _ = writeln!(s, r#"<polygon class="folded" points="{}"/>"#, d.join(" "));
        label(&mut s, m);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn short_config(length: f64) -> TraceConfig {
    TraceConfig { max_length: length, max_step: length / 50.0, ..TraceConfig::default() }
}

/// Traces the full leaf through a lifted state, in both orientations.
fn both_ways(atlas: &Atlas, state: [f64; 3], cfg: &TraceConfig, folded: bool) -> Vec<IntegralCurve> {
    let mut out = Vec::new();
    for flip in [0.0, std::f64::consts::PI] {
        let s = [state[0], state[1], state[2] + flip];
        let run = trace_from_state(atlas, 0, s, cfg, &[], folded).or_else(|_| {
            if folded {
                trace_from_state(atlas, 0, s, cfg, &[], false)
            } else {
                Err(crate::Error::NoReturn)
            }
        });
        if let Ok(c) = run {
            out.push(c);
        }
    }
    out
}

/// Harmonic lines around an umbilic of the normal form `(k, a, b, c)`, with
/// the separatrices (leaves ending at the umbilic along saddle directions of
/// the lifted field) highlighted.
pub fn umbilic_scene(k: f64, a: f64, b: f64, c: f64, radius: f64) -> Result<SvgScene> {
    let spec = SurfaceSpec {
        kind: SurfaceKind::MongeUmbilic { k, a, b, c, quartic: None },
        domain: Some(DomainOverride { u: [-1.2 * radius, 1.2 * radius], v: [-1.2 * radius, 1.2 * radius] }),
    };
    let field = QuadraticLineField::harmonic(spec.build()?);
    let atlas = Atlas::single(field.clone());
    let mut scene = SvgScene::new([[-radius, radius], [-radius, radius]]);
    let report = umbilic_report(&field, [0.0, 0.0], crate::singularity::CLASSIFY_MARGIN)?;
    scene.umbilics.push(Marker { at: [0.0, 0.0], label: format!("{:?}", report.harmonic.verdict) });
    let cfg = short_config(3.0 * radius);

    let lift = umbilic_lift_equilibria(&field, [0.0, 0.0])?;
    for eq in lift.equilibria.iter().filter(|e| e.saddle) {
        for side in [0.0, std::f64::consts::PI] {
            let theta = eq.angle + side;
            let seed = [0.05 * radius * theta.cos(), 0.05 * radius * theta.sin()];
            // the branch whose direction at the seed is closest to the radial one
            let mut best: Option<(f64, f64)> = None;
            for branch in [Branch::Minimal, Branch::Maximal] {
                let Ok(phi) = seed_angle(&field, seed, branch, &cfg) else { continue };
                let gap = (phi - theta).rem_euclid(std::f64::consts::PI);
                let gap = gap.min(std::f64::consts::PI - gap);
                if best.is_none_or(|(g, _)| gap < g) {
                    best = Some((gap, phi));
                }
            }
            let Some((_, phi)) = best else { continue };
            // outward orientation only; the half-leaf is anchored at the umbilic
            let phi = if (phi - theta).cos() < 0.0 { phi + std::f64::consts::PI } else { phi };
            if let Ok(curve) = trace_from_state(&atlas, 0, [seed[0], seed[1], phi], &cfg, &[], false) {
                let mut pts = vec![(Some([0.0, 0.0]), curve.samples.first().and_then(|s| s.branch))];
                pts.extend(curve.samples.iter().map(|s| (Some([s.u, s.v]), s.branch)));
                scene.add_runs(&pts, true, false);
            }
        }
    }
    for i in 0..12 {
        let t = std::f64::consts::TAU * (i as f64 + 0.5) / 12.0;
        let seed = [0.6 * radius * t.cos(), 0.6 * radius * t.sin()];
        for branch in [Branch::Minimal, Branch::Maximal] {
            if let Ok(phi) = seed_angle(&field, seed, branch, &cfg) {
                for curve in both_ways(&atlas, [seed[0], seed[1], phi], &cfg, false) {
                    scene.add_curve(&atlas, 0, &curve, Projection::Chart, false);
                }
            }
        }
    }
    Ok(scene)
}

/// Harmonic lines near a tangential parabolic point of the adapted form with
/// `a = b = c = 0`, `k`, `d` and quartic coefficient `A`. The separatrices are
/// seeded on the parabolas `y = m x^2 / 2` given by the real eigen-directions
/// of the lifted field, whose slopes are `m = (lambda - 2kd) / (2k^2)`.
pub fn folded_scene(k: f64, d: f64, big_a: f64, radius: f64) -> Result<SvgScene> {
    let spec = SurfaceSpec {
        kind: SurfaceKind::MongeParabolic { k, a: 0.0, b: 0.0, c: 0.0, d, quartic: [big_a, 0.0, 0.0, 0.0, 0.0] },
        domain: Some(DomainOverride { u: [-1.2 * radius, 1.2 * radius], v: [-1.2 * radius, 1.2 * radius] }),
    };
    let patch = spec.build()?;
    let field = QuadraticLineField::harmonic(patch.clone());
    let atlas = Atlas::single(field.clone());
    let mut scene = SvgScene::new([[-radius, radius], [-radius, radius]]);
    scene.shade_elliptic(&patch, 64);
    let pcfg = ParabolicTraceConfig { step: radius / 50.0, ..ParabolicTraceConfig::default() };
    for curve in parabolic_curves(&patch, &pcfg)? {
        scene.parabolic.push(curve.points);
    }
    let class = classify_parabolic_harmonic(k, d, big_a, crate::singularity::CLASSIFY_MARGIN);
    scene.folded.push(Marker { at: [0.0, 0.0], label: format!("{:?}", class.verdict) });

    let cfg = short_config(3.0 * radius);
    let jac = lie_cartan_jacobians(k, 0.0, d, big_a, 0.0);
    for ev in jac.harmonic_eigenvalues.iter().take(2).filter(|e| e.im == 0.0 && e.re != 0.0) {
        let m = (ev.re - 2.0 * k * d) / (2.0 * k * k);
        // one elliptic seed suffices: the folded trace passes through the point
        let seed = [0.05 * radius, -0.05 * radius]
            .into_iter()
            .map(|x| [x, 0.5 * m * x * x])
            .find(|p| curvature_at(&patch, *p).map(|(_, c)| c.gauss > cfg.parabolic_tol).unwrap_or(false));
        if let Some(p) = seed {
            for curve in both_ways(&atlas, [p[0], p[1], (m * p[0]).atan()], &cfg, true) {
                scene.add_curve(&atlas, 0, &curve, Projection::Chart, true);
            }
        }
    }
    for i in 0..10 {
        let x = radius * (-0.9 + 1.8 * i as f64 / 9.0);
        for y in [0.3 * radius, -0.3 * radius, 0.7 * radius, -0.7 * radius] {
            for branch in [Branch::Minimal, Branch::Maximal] {
                if let Ok(phi) = seed_angle(&field, [x, y], branch, &cfg) {
                    for curve in both_ways(&atlas, [x, y, phi], &cfg, true) {
                        scene.add_curve(&atlas, 0, &curve, Projection::Chart, false);
                    }
                }
            }
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every coordinate in `d`, `x`, `y`, `cx`, `cy` and `points` attributes.
    fn drawn_coordinates(svg: &str) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for line in
            svg.lines().filter(|l| l.starts_with("<path") || l.starts_with("<circle") || l.starts_with("<polygon"))
        {
            let attr = |name: &str| line.split(&format!(" {name}=\"")).nth(1).and_then(|r| r.split('"').next());
            let nums = |t: &str| -> Vec<f64> {
                t.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'))
                    .filter_map(|x| x.parse().ok())
                    .collect()
            };
            let v: Vec<f64> = if let Some(d) = attr("d") {
                nums(d)
            } else if let Some(p) = attr("points") {
                nums(p)
            } else {
                vec![attr("cx").unwrap().parse().unwrap(), attr("cy").unwrap().parse().unwrap()]
            };
            out.extend(v.chunks(2).map(|c| (c[0], c[1])));
        }
        out
    }

    #[test]
    fn empty_scene_renders_the_frame() {
        let scene = SvgScene::new([[0.0, 1.0], [0.0, 1.0]]);
        assert!(scene.is_empty());
        let svg = render_svg(&scene);
        assert!(svg.starts_with("<?xml") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("<rect x=\"0.00\" y=\"0.00\" width=\"800.00\" height=\"800.00\""));
        assert!(!svg.contains("<path") && !svg.contains("<circle"));
    }

    #[test]
    fn markers_outside_are_dropped() {
        let mut scene = SvgScene::new([[0.0, 1.0], [0.0, 2.0]]);
        scene.umbilics.push(Marker { at: [0.5, 1.0], label: "H1".into() });
        scene.umbilics.push(Marker { at: [1.5, 1.0], label: "H2".into() });
        scene.folded.push(Marker { at: [0.2, 0.2], label: "a<b".into() });
        let svg = render_svg(&scene);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(">H1<") && !svg.contains(">H2<") && svg.contains("a&lt;b"));
        // tall viewport: height follows the aspect ratio
        assert!(svg.contains("height=\"1600.00\""));
    }

    proptest! {
        #[test]
        fn clipped_polylines_stay_inside(
            pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..40),
            x0 in -1.0f64..0.0, w in 0.1f64..2.0, y0 in -1.0f64..0.0, h in 0.1f64..2.0,
        ) {
            let vp = [[x0, x0 + w], [y0, y0 + h]];
            let line: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            for piece in clip_polyline(&line, &vp) {
                prop_assert!(piece.len() >= 2);
                for p in piece {
                    prop_assert!(p[0] >= vp[0][0] && p[0] <= vp[0][1] && p[1] >= vp[1][0] && p[1] <= vp[1][1]);
                }
            }
        }

        #[test]
        fn inside_polylines_are_kept_whole(pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..20)) {
            let line: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let pieces = clip_polyline(&line, &[[0.0, 1.0], [0.0, 1.0]]);
            prop_assert_eq!(pieces, vec![line]);
        }
    }

    #[test]
    fn h3_scene_has_three_separatrices_per_foliation() {
        let scene = umbilic_scene(1.0, 1.0, 2.0, 0.0, 0.5).unwrap();
        assert_eq!(scene.umbilics[0].label, "H3");
        let seps: Vec<&Leaf> = scene.leaves.iter().filter(|l| l.separatrix).collect();
        assert_eq!(seps.len(), 6);
        for branch in [Branch::Minimal, Branch::Maximal] {
            assert_eq!(seps.iter().filter(|l| l.branch == Some(branch)).count(), 3);
        }
        // all meet the marker and leave the neighbourhood in distinct directions
        let mut angles: Vec<f64> = seps
            .iter()
            .map(|l| {
                assert_eq!(l.points[0], [0.0, 0.0]);
                let p = l.points[l.points.len() / 4];
                p[1].atan2(p[0])
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        assert!(angles.windows(2).all(|w| w[1] - w[0] > 0.3), "{angles:?}");

        let svg = render_svg(&scene);
        assert_eq!(svg.matches("separatrix").count() - 1, 6);
        for (x, y) in drawn_coordinates(&svg) {
            assert!((0.0..=800.0).contains(&x) && (0.0..=800.0).contains(&y), "{x} {y}");
        }
        assert_eq!(svg, render_svg(&umbilic_scene(1.0, 1.0, 2.0, 0.0, 0.5).unwrap()));
    }

    #[test]
    fn folded_saddle_scene_has_two_separatrices_through_the_point() {
        let r = 0.5;
        let scene = folded_scene(1.0, 1.0, 4.0, r).unwrap();
        assert_eq!(scene.folded[0].label, "FoldedSaddle");
        assert!(!scene.parabolic.is_empty() && !scene.elliptic.is_empty());
        let through: Vec<&Leaf> = scene
            .leaves
            .iter()
            .filter(|l| l.separatrix && l.points.iter().any(|p| p[0].hypot(p[1]) < 1e-3 * r))
            .collect();
        assert_eq!(through.len(), 2);
        // one follows the kernel direction, the other the parabola y = -3x^2/4
        let far = |l: &Leaf| *l.points.last().unwrap();
        let mut ys: Vec<f64> = through.iter().map(|l| far(l)[1] / far(l)[0].powi(2)).collect();
        ys.sort_by(f64::total_cmp);
        assert!(ys[0] < -0.3 && ys[1].abs() < 0.3, "{ys:?}");
    }

    #[test]
    fn report_scene_in_both_projections() {
        let cfg = crate::report::AnalysisConfig::from_toml(
            "[surface]\nkind = \"torus\"\nr = 1.0\nR = 2.0\n[[seeds]]\npoint = [0.3, 0.0]\nbranch = \"maximal\"\n[trace]\nmax_length = 6.0",
        )
        .unwrap();
        let stages = crate::report::Stages { parabolic: true, curves: true, ..crate::report::Stages::NONE };
        let report = crate::report::analyze(&cfg, stages).unwrap();
        let chart = SvgScene::from_report(&report, Projection::Chart).unwrap();
        assert_eq!(chart.viewport[0], [-std::f64::consts::PI, std::f64::consts::PI]);
        assert!(!chart.elliptic.is_empty() && chart.parabolic.len() == 2 && !chart.leaves.is_empty());
        let ortho = SvgScene::from_report(&report, Projection::Orthographic { azimuth: 0.3, elevation: 0.6 }).unwrap();
        assert!(ortho.elliptic.is_empty());
        let vp = ortho.viewport;
        for p in ortho.leaves.iter().flat_map(|l| l.points.iter()).chain(ortho.parabolic.iter().flatten()) {
            assert!(p[0] >= vp[0][0] && p[0] <= vp[0][1] && p[1] >= vp[1][0] && p[1] <= vp[1][1]);
        }
    }
}
