use clap::{Args, Parser, Subcommand, ValueEnum};
use hmc_core::mean_field::{Branch, MeanCurvatureFunction};
use hmc_core::report::{AnalysisConfig, RotationRequest, Seed};
use hmc_core::surface::{SurfaceKind, SurfaceSpec};
use hmc_core::{Error, Result};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "hmc", version, about = "Harmonic mean curvature lines on parametrized surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every stage the configuration asks for.
    Analyze(Common),
    /// Trace harmonic lines from seeds.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Seed `u,v` (repeatable).
        #[arg(long, value_parser = parse_point)]
        seed: Vec<[f64; 2]>,
        #[arg(long, default_value = "maximal")]
        branch: Branch,
        /// Continue leaves across the parabolic set.
        #[arg(long)]
        folded: bool,
        /// Arclength budget per leaf.
        #[arg(long)]
        length: Option<f64>,
    },
    /// Locate and classify umbilic points.
    Umbilics(Common),
    /// Trace the parabolic set and classify its tangential points.
    Parabolic(Common),
    /// Analytic and empirical rotation numbers (torus, ellipsoid).
    Rotation {
        #[command(flatten)]
        common: Common,
        /// Transits (torus) or returns (ellipsoid) to trace; 50 and 20 by default.
        #[arg(long)]
        transits: Option<usize>,
        /// Skip the traced estimate.
        #[arg(long)]
        analytic_only: bool,
    },
    /// Return-map derivatives of cycles.
    Poincare(Common),
    /// Write an SVG of a report or of a local model.
    Render(RenderArgs),
    /// Parameter sweep as a delimited table.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "tab")]
        delimiter: Delimiter,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Delimiter {
    Tab,
    Comma,
}

impl Delimiter {
    pub fn char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
        }
    }
}

/// Flags shared by the analysis subcommands. Flags override the config file.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the JSON report instead of a summary.
    #[arg(long)]
    pub json: bool,
    /// Write the output to a file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Mean curvature function (harmonic, arithmetic, geometric, holder:<r>, ...).
    #[arg(long)]
    pub mean: Option<MeanCurvatureFunction>,
    /// Relative classification margin.
    #[arg(long)]
    pub margin: Option<f64>,
}

/// Surface kind and parameters; names match the `[surface]` config table.
#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// torus, sphere, cylinder, ellipsoid, ellipsoid-ellipsoidal, monge-umbilic,
    /// monge-parabolic, helix-ribbon.
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub turns: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
}

impl SurfaceArgs {
    pub fn spec(&self) -> Result<Option<SurfaceSpec>> {
        let Some(name) = &self.surface else {
            let any =
                [self.r, self.big_r, self.radius, self.a, self.b, self.c, self.d, self.k, self.epsilon, self.width];
            if any.iter().any(Option::is_some) || self.turns.is_some() {
                return Err(Error::Config("surface parameters given without --surface".into()));
            }
            return Ok(None);
        };
        let kind = match name.replace('-', "_").as_str() {
            "ellipsoid" => "ellipsoid_trig".to_string(),
            other => other.to_string(),
        };
        let mut table = toml::Table::new();
        table.insert("kind".into(), kind.into());
        let params = [
            ("r", self.r),
            ("R", self.big_r),
            ("radius", self.radius),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("k", self.k),
            ("epsilon", self.epsilon),
            ("width", self.width),
        ];
        for (key, value) in params {
            if let Some(v) = value {
                table.insert(key.into(), v.into());
            }
        }
        if let Some(t) = self.turns {
            table.insert("turns".into(), i64::from(t).into());
        }
        let kind: SurfaceKind =
            table.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        Ok(Some(SurfaceSpec { kind, domain: None }))
    }
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [u, v] => Ok([u.trim().parse().map_err(|_| "bad u")?, v.trim().parse().map_err(|_| "bad v")?]),
        _ => Err(format!("expected `u,v`, got `{s}`")),
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl Common {
    /// The config file, with command-line flags applied on top.
    pub fn config(&self) -> Result<AnalysisConfig> {
        let surface = self.surface.spec()?;
        let mut cfg = match (&self.config, surface) {
            (Some(path), surface) => {
                let mut cfg = AnalysisConfig::from_toml(&read(path)?)?;
                if let Some(s) = surface {
                    cfg.surface = s;
                }
                cfg
            }
            (None, Some(s)) => AnalysisConfig::new(s),
            (None, None) => return Err(Error::Config("give --config or --surface".into())),
        };
        if let Some(m) = self.mean {
            cfg.mean = m;
        }
        if let Some(m) = self.margin {
            cfg.margin = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn apply_trace_flags(
    cfg: &mut AnalysisConfig,
    seeds: &[[f64; 2]],
    branch: Branch,
    folded: bool,
    length: Option<f64>,
) {
    cfg.seeds.extend(seeds.iter().map(|&point| Seed { point, branch, chart: 0, reverse: false }));
    cfg.folded |= folded;
    if let Some(l) = length {
        cfg.trace.max_length = l;
    }
}

pub fn apply_rotation_flags(cfg: &mut AnalysisConfig, transits: Option<usize>, analytic_only: bool) {
    let default = match cfg.surface.kind {
        SurfaceKind::Torus { .. } => 50,
        _ => 20,
    };
    let configured = cfg.rotation.and_then(|r| r.transits);
    let transits = if analytic_only { None } else { transits.or(configured).or(Some(default)) };
    cfg.rotation = Some(RotationRequest { transits });
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// TOML render configuration (`report`, `output`, optional `[projection]`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON report to draw.
    #[arg(long, conflicts_with = "model")]
    pub report: Option<PathBuf>,
    /// Local model instead of a report: `umbilic` (uses --k --a --b --c) or
    /// `folded` (uses --k --d --A).
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long = "A", allow_hyphen_values = true)]
    pub big_a: Option<f64>,
    /// Half-width of the model's chart window.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Draw the embedded surface orthographically instead of the chart.
    #[arg(long)]
    pub orthographic: bool,
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    pub azimuth: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub elevation: f64,
    /// Output SVG path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Model {
    Umbilic,
    Folded,
}
