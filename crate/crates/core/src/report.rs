//! Analysis configuration and the versioned JSON report.

use crate::dynamics::{
    cycle_log_derivative_from, ellipsoid_rotation, hyperbolicity_test, perturbation_check, ribbon_cycle,
    torus_rotation, Hyperbolicity, PerturbationCheck, RotationResult,
};
use crate::error::{Error, Result};
use crate::mean_field::{Branch, MeanCurvatureFunction, QuadraticLineField};
use crate::singularity::{
    find_tangential_points, locate_umbilics, parabolic_curves, parabolic_report, umbilic_report, ParabolicReport,
    ParabolicTraceConfig, UmbilicReport, UmbilicSearch, CLASSIFY_MARGIN,
};
use crate::surface::{builtin_surface, ChartPoint, HelixRibbon, PoleAxis, SurfaceKind, SurfacePatch, SurfaceSpec};
use crate::sweep::{run_sweep, SweepSpec, SweepTable};
use crate::tracer::{residual, seed_angle, trace_from_state, Atlas, IntegralCurve, Sample, Termination, TraceConfig};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Bumped whenever a field of [`AnalysisReport`] changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

mod mean_name {
    use crate::mean_field::MeanCurvatureFunction;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &MeanCurvatureFunction, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(m)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MeanCurvatureFunction, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seed {
    pub point: ChartPoint,
    pub branch: Branch,
    #[serde(default)]
    pub chart: usize,
    #[serde(default)]
    pub reverse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotationRequest {
    /// Transits (torus) or returns (ellipsoid) for the empirical estimate;
    /// analytic value only when absent.
    pub transits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleRequest {
    /// `|ln pi'|` at or below this value is reported non-hyperbolic.
    pub margin: f64,
    /// Perturbation size for the ribbon's first-order check; skipped when 0.
    pub epsilon: f64,
}

impl Default for CycleRequest {
    fn default() -> Self {
        Self { margin: 1e-6, epsilon: 1e-3 }
    }
}

fn harmonic() -> MeanCurvatureFunction {
    MeanCurvatureFunction::Harmonic
}

fn default_margin() -> f64 {
    CLASSIFY_MARGIN
}

fn default_alignment() -> f64 {
    1e-10
}

fn default_budget() -> usize {
    400
}

/// Everything an analysis run depends on. Read from TOML; echoed verbatim
/// into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub surface: SurfaceSpec,
    #[serde(default = "harmonic", with = "mean_name")]
    pub mean: MeanCurvatureFunction,
    /// Relative classification margin.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Tolerance on the alignment function when locating tangential points.
    #[serde(default = "default_alignment")]
    pub alignment_tol: f64,
    /// Points kept per traced curve in the report.
    #[serde(default = "default_budget")]
    pub curve_budget: usize,
    /// Continue leaves across the parabolic set.
    #[serde(default)]
    pub folded: bool,
    #[serde(default)]
    pub seeds: Vec<Seed>,
    #[serde(default)]
    pub trace: TraceConfig,
    #[serde(default)]
    pub umbilic: UmbilicSearch,
    #[serde(default)]
    pub parabolic: ParabolicTraceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RotationRequest>,
    #[serde(default)]
    pub cycles: CycleRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl AnalysisConfig {
    pub fn new(surface: SurfaceSpec) -> Self {
        Self {
            surface,
            mean: harmonic(),
            margin: default_margin(),
            alignment_tol: default_alignment(),
            curve_budget: default_budget(),
            folded: false,
            seeds: Vec::new(),
            trace: TraceConfig::default(),
            umbilic: UmbilicSearch::default(),
            parabolic: ParabolicTraceConfig::default(),
            rotation: None,
            cycles: CycleRequest::default(),
            sweep: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.trace.validate()?;
        if !(self.margin >= 0.0 && self.alignment_tol > 0.0 && self.cycles.margin >= 0.0) {
            return Err(Error::InvalidParameters("margins must be non-negative".into()));
        }
        if self.curve_budget < 2 {
            return Err(Error::InvalidParameters("curve_budget must be at least 2".into()));
        }
        if self.umbilic.grid < 2 || self.parabolic.grid < 2 {
            return Err(Error::InvalidParameters("search grids need at least 2 cells".into()));
        }
        Ok(())
    }

    /// Charts used for tracing: both trig charts for an ellipsoid, the
    /// configured chart otherwise.
    pub fn atlas(&self) -> Result<Atlas> {
        let patch = self.surface.build()?;
        Ok(match self.surface.kind {
            SurfaceKind::EllipsoidTrig { a, b, c, poles } if self.surface.domain.is_none() => {
                let poles = if poles == PoleAxis::Z { PoleAxis::X } else { PoleAxis::Z };
                let other = builtin_surface(&SurfaceKind::EllipsoidTrig { a, b, c, poles })?;
                Atlas::new(&[patch, other], self.mean)
            }
            _ => Atlas::single(QuadraticLineField::new(patch, self.mean)),
        })
    }
}

/// Which parts of the analysis to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stages {
    pub umbilics: bool,
    pub parabolic: bool,
    pub curves: bool,
    pub rotation: bool,
    pub cycles: bool,
    pub sweep: bool,
}

impl Stages {
    pub const NONE: Self =
        Self { umbilics: false, parabolic: false, curves: false, rotation: false, cycles: false, sweep: false };

    /// Every stage the configuration asks for.
    pub fn all(cfg: &AnalysisConfig) -> Self {
        Self {
            umbilics: true,
            parabolic: true,
            curves: true,
            rotation: cfg.rotation.is_some(),
            cycles: true,
            sweep: cfg.sweep.is_some(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub chart: usize,
    pub u: f64,
    pub v: f64,
    pub s: f64,
    pub branch: Option<Branch>,
    pub pos: Vec3,
}

impl From<&Sample> for CurvePoint {
    fn from(s: &Sample) -> Self {
        Self { chart: s.chart, u: s.u, v: s.v, s: s.s, branch: s.branch, pos: s.pos }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub seed: Seed,
    pub termination: Termination,
    pub length: f64,
    /// Sample count before down-sampling.
    pub samples: usize,
    /// Largest scaled value of the lifted equation along the curve.
    pub residual: f64,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicLine {
    pub points: Vec<ChartPoint>,
    pub closed: bool,
    pub min_gradient: f64,
    pub degenerate_arc: bool,
    pub tangential: Vec<ParabolicReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleSource {
    RibbonCore,
    /// A traced curve (by index) that closed up on itself.
    Curve(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub source: CycleSource,
    pub length: f64,
    pub ln_derivative: f64,
    /// `int K/H^2 ds` along the cycle.
    pub gauss_over_mean_sq: f64,
    pub verdict: Hyperbolicity,
    pub perturbation: Option<PerturbationCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
    /// The failure is due to the request (bad seed, unsupported surface).
    pub input: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: AnalysisConfig,
    pub stages: Stages,
    pub umbilics: Vec<UmbilicReport>,
    pub parabolic: Vec<ParabolicLine>,
    pub curves: Vec<CurveReport>,
    pub rotation: Option<RotationResult>,
    pub cycles: Vec<CycleReport>,
    pub sweep: Option<SweepTable>,
    pub failures: Vec<StageFailure>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        text.push('\n');
        // serde_json writes non-finite floats as null, which would not parse back
        if serde_json::from_str::<Self>(&text).is_err() {
            return Err(Error::InvalidParameters("report contains non-finite values".into()));
        }
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "report schema {} is not supported (expected {SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }
}

/// Keeps at most `budget` samples, spaced uniformly in arclength, always
/// including both ends.
pub fn decimate(samples: &[Sample], budget: usize) -> Vec<CurvePoint> {
    if samples.len() <= budget.max(2) {
        return samples.iter().map(CurvePoint::from).collect();
    }
    let (s0, s1) = (samples[0].s, samples[samples.len() - 1].s);
    let mut out: Vec<CurvePoint> = Vec::with_capacity(budget);
    let mut i = 0;
    let mut last = usize::MAX;
    for j in 0..budget {
        let target = s0 + (s1 - s0) * j as f64 / (budget - 1) as f64;
        while i + 1 < samples.len() && samples[i].s < target {
            i += 1;
        }
        if i != last {
            out.push(CurvePoint::from(&samples[i]));
            last = i;
        }
    }
    out
}

fn failure(stage: &str, e: &Error) -> StageFailure {
    StageFailure { stage: stage.into(), message: e.to_string(), input: e.is_input() }
}

fn trace_seed(atlas: &Atlas, cfg: &AnalysisConfig, seed: &Seed) -> Result<IntegralCurve> {
    if seed.chart >= atlas.fields.len() {
        return Err(Error::BadSeed(format!("chart {} does not exist", seed.chart)));
    }
    let tc = TraceConfig { reverse: seed.reverse, ..cfg.trace };
    let phi = seed_angle(&atlas.fields[seed.chart], seed.point, seed.branch, &tc)?;
    trace_from_state(atlas, seed.chart, [seed.point[0], seed.point[1], phi], &tc, &[], cfg.folded)
}

fn parabolic_stage(patch: &SurfacePatch, cfg: &AnalysisConfig, failures: &mut Vec<StageFailure>) -> Vec<ParabolicLine> {
    let curves = match parabolic_curves(patch, &cfg.parabolic) {
        Ok(c) => c,
        Err(e) => {
            failures.push(failure("parabolic", &e));
            return Vec::new();
        }
    };
    let mut out = Vec::with_capacity(curves.len());
    for curve in curves {
        let scan = match find_tangential_points(patch, &curve, cfg.alignment_tol) {
            Ok(s) => s,
            Err(e) => {
                failures.push(failure("parabolic", &e));
                continue;
            }
        };
        let mut tangential = Vec::new();
        for p in &scan.points {
            match parabolic_report(patch, *p, cfg.margin) {
                Ok(r) => tangential.push(r),
                Err(e) => failures.push(failure("parabolic", &e)),
            }
        }
        let min_gradient = if curve.points.is_empty() { 0.0 } else { curve.min_gradient() };
        out.push(ParabolicLine {
            points: curve.points,
            closed: curve.closed,
            min_gradient,
            degenerate_arc: scan.degenerate_arc,
            tangential,
        });
    }
    out
}

fn rotation_stage(cfg: &AnalysisConfig) -> Result<RotationResult> {
    let transits = cfg.rotation.unwrap_or_default().transits;
    match cfg.surface.kind {
        SurfaceKind::Torus { r, big_r } => torus_rotation(r, big_r, transits, &cfg.trace),
        SurfaceKind::EllipsoidTrig { a, b, c, .. } | SurfaceKind::EllipsoidEllipsoidal { a, b, c } => {
            ellipsoid_rotation(a, b, c, transits, &cfg.trace)
        }
        _ => Err(Error::InvalidParameters("rotation numbers are available for the torus and the ellipsoid".into())),
    }
}

fn cycle_stage(
    atlas: &Atlas,
    cfg: &AnalysisConfig,
    curves: &[(IntegralCurve, Seed)],
    failures: &mut Vec<StageFailure>,
) -> Vec<CycleReport> {
    let mut out = Vec::new();
    let verdict = |ln: f64| hyperbolicity_test(ln, cfg.cycles.margin);
    if let SurfaceKind::HelixRibbon { big_r, r, turns, epsilon, width } = cfg.surface.kind {
        let run = HelixRibbon::new(big_r, r, turns, epsilon, width).and_then(|rb| ribbon_cycle(rb, &cfg.trace));
        match run {
            Ok(t) => {
                let perturbation = if cfg.cycles.epsilon > 0.0 && epsilon == 0.0 {
                    perturbation_check(big_r, r, turns, cfg.cycles.epsilon, &cfg.trace)
                        .map_err(|e| failures.push(failure("cycles", &e)))
                        .ok()
                } else {
                    None
                };
                out.push(CycleReport {
                    source: CycleSource::RibbonCore,
                    length: t.s1,
                    ln_derivative: t.integral,
                    gauss_over_mean_sq: t.gauss_over_mean_sq,
                    verdict: verdict(t.integral),
                    perturbation,
                });
            }
            Err(e) => failures.push(failure("cycles", &e)),
        }
    }
    for (i, (curve, _)) in curves.iter().enumerate() {
        if curve.termination != Termination::ClosedUp {
            continue;
        }
        match cycle_log_derivative_from(atlas, &curve.samples[0], curve.length(), &cfg.trace) {
            Ok(t) => out.push(CycleReport {
                source: CycleSource::Curve(i),
                length: t.s1,
                ln_derivative: t.integral,
                gauss_over_mean_sq: t.gauss_over_mean_sq,
                verdict: verdict(t.integral),
                perturbation: None,
            }),
            Err(e) => failures.push(failure("cycles", &e)),
        }
    }
    out
}

/// Runs the requested stages. Numerical failures of individual stages are
/// collected in the report; only an unusable configuration is an error.
pub fn analyze(cfg: &AnalysisConfig, stages: Stages) -> Result<AnalysisReport> {
    cfg.validate()?;
    let atlas = cfg.atlas()?;
    let field = &atlas.fields[0];
    let mut failures = Vec::new();

    let umbilics = if stages.umbilics {
        let mut out = Vec::new();
        for p in locate_umbilics(&field.patch, &cfg.umbilic) {
            match umbilic_report(field, p, cfg.margin) {
                Ok(r) => out.push(r),
                Err(e) => failures.push(failure("umbilics", &e)),
            }
        }
        out
    } else {
        Vec::new()
    };

    let parabolic = if stages.parabolic { parabolic_stage(&field.patch, cfg, &mut failures) } else { Vec::new() };

    let mut traced = Vec::new();
    if stages.curves || stages.cycles {
        for seed in &cfg.seeds {
            match trace_seed(&atlas, cfg, seed) {
                Ok(c) => traced.push((c, *seed)),
                Err(e) => failures.push(failure("curves", &e)),
            }
        }
    }

    let rotation = if stages.rotation {
        match rotation_stage(cfg) {
            Ok(r) => Some(r),
            Err(e) => {
                failures.push(failure("rotation", &e));
                None
            }
        }
    } else {
        None
    };

    let cycles = if stages.cycles { cycle_stage(&atlas, cfg, &traced, &mut failures) } else { Vec::new() };

    let sweep = match (stages.sweep, &cfg.sweep) {
        (true, Some(spec)) => run_sweep(spec).map_err(|e| failures.push(failure("sweep", &e))).ok(),
        (true, None) => {
            failures.push(failure("sweep", &Error::InvalidParameters("no [sweep] table in the configuration".into())));
            None
        }
        _ => None,
    };

    let curves = if stages.curves {
        traced
            .iter()
            .map(|(c, seed)| CurveReport {
                seed: *seed,
                termination: c.termination,
                length: c.length(),
                samples: c.samples.len(),
                residual: residual(&atlas, c),
                points: decimate(&c.samples, cfg.curve_budget),
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        stages,
        umbilics,
        parabolic,
        curves,
        rotation,
        cycles,
        sweep,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = r#"
folded = true

[surface]
kind = "torus"
r = 1.0
R = 2.0

[[seeds]]
point = [0.3, 0.0]
branch = "maximal"

[[seeds]]
point = [-0.5, 1.0]
branch = "minimal"

[trace]
max_length = 4.0

[rotation]
"#;

    #[test]
    fn config_defaults_and_echo() {
        let cfg = AnalysisConfig::from_toml(TORUS).unwrap();
        assert_eq!(cfg.mean, MeanCurvatureFunction::Harmonic);
        assert_eq!(cfg.margin, CLASSIFY_MARGIN);
        assert_eq!(cfg.trace.rtol, TraceConfig::default().rtol);
        assert_eq!(cfg.seeds.len(), 2);
        assert_eq!(cfg.rotation, Some(RotationRequest { transits: None }));
        let back: AnalysisConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            AnalysisConfig::from_toml("foo = 1\n[surface]\nkind = \"sphere\"\nradius = 1.0"),
            Err(Error::Config(_))
        ));
        let bad = "curve_budget = 1\n[surface]\nkind = \"sphere\"\nradius = 1.0";
        assert!(matches!(AnalysisConfig::from_toml(bad), Err(Error::InvalidParameters(_))));
        assert!(AnalysisConfig::from_toml("mean = \"holder:x\"\n[surface]\nkind = \"sphere\"\nradius = 1.0").is_err());
    }

    #[test]
    fn torus_report_round_trips() {
        let cfg = AnalysisConfig::from_toml(TORUS).unwrap();
        let report = analyze(&cfg, Stages::all(&cfg)).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert!(report.umbilics.is_empty());
        assert_eq!(report.parabolic.len(), 2);
        assert!(report.parabolic.iter().all(|l| l.closed && l.degenerate_arc));
        assert_eq!(report.curves.len(), 2);
        assert!(report.curves.iter().all(|c| c.points.len() <= cfg.curve_budget && c.residual < 1e-6));
        let rot = report.rotation.as_ref().unwrap();
        assert!(rot.empirical.is_none());
        let text = report.to_json().unwrap();
        let back = AnalysisReport::from_json(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn stage_failures_are_collected() {
        let mut cfg = AnalysisConfig::from_toml(TORUS).unwrap();
        cfg.seeds[1].chart = 3;
        // the sphere has no rotation number
        let report = analyze(&cfg, Stages { curves: true, ..Stages::NONE }).unwrap();
        assert_eq!(report.curves.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert!(report.failures[0].input);
        cfg.surface = SurfaceSpec { kind: SurfaceKind::Sphere { radius: 1.0 }, domain: None };
        let report = analyze(&cfg, Stages { rotation: true, ..Stages::NONE }).unwrap();
        assert!(report.rotation.is_none() && report.failures[0].stage == "rotation");
    }

    #[test]
    fn ribbon_core_is_reported_non_hyperbolic() {
        let cfg = AnalysisConfig::from_toml("[surface]\nkind = \"helix_ribbon\"\nR = 3.0\nr = 0.5\nturns = 5").unwrap();
        let report = analyze(&cfg, Stages { cycles: true, ..Stages::NONE }).unwrap();
        let c = &report.cycles[0];
        assert_eq!(c.source, CycleSource::RibbonCore);
        assert!(matches!(c.verdict, Hyperbolicity::NonHyperbolic { .. }));
        assert!(c.perturbation.unwrap().relative_error < 1e-6);
    }

    fn sample(s: f64) -> Sample {
        Sample { u: s, v: 0.0, phi: 0.0, s, branch: None, chart: 0, pos: Vec3::default() }
    }

    #[test]
    fn decimation_is_uniform_in_arclength() {
        // dense at the start, sparse at the end
        let samples: Vec<Sample> = (0..=1000).map(|i| sample((i as f64 / 1000.0).powi(3))).collect();
        let out = decimate(&samples, 11);
        assert!(out.len() <= 11);
        assert_eq!(out[0].s, 0.0);
        assert_eq!(out.last().unwrap().s, 1.0);
        for w in out.windows(2) {
            assert!(w[1].s - w[0].s < 0.13, "{} {}", w[0].s, w[1].s);
        }
        assert_eq!(decimate(&samples[..5], 11).len(), 5);
    }
}
