mod args;
mod summary;

use args::{Cli, Command, Model, RenderArgs};
use clap::Parser;
use hmc_core::report::{analyze, AnalysisReport, Stages};
use hmc_core::svg::{folded_scene, render_svg, umbilic_scene, Projection, SvgScene};
use hmc_core::{Error, Result};
use serde::Deserialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const INPUT_ERROR: u8 = 2;
const NUMERICAL_FAILURE: u8 = 3;

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()) {
                // a reader that stopped early (`| head`) is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| Error::Config(e.to_string())),
            }
        }
    }
}

fn finish(report: &AnalysisReport) -> ExitCode {
    for f in &report.failures {
        eprintln!("warning: {} failed: {}", f.stage, f.message);
    }
    if report.failures.iter().any(|f| f.input) {
        ExitCode::from(INPUT_ERROR)
    } else if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NUMERICAL_FAILURE)
    }
}

fn run_analysis(common: &args::Common, cfg: &hmc_core::report::AnalysisConfig, stages: Stages) -> Result<ExitCode> {
    let report = analyze(cfg, stages)?;
    let text = if common.json { report.to_json()? } else { summary::summary(&report) };
    emit(&text, common.out.as_deref())?;
    Ok(finish(&report))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderConfig {
    report: PathBuf,
    output: Option<PathBuf>,
    #[serde(default)]
    projection: Projection,
}

fn render(a: &RenderArgs) -> Result<ExitCode> {
    let (scene, out) = if let Some(model) = a.model {
        let need = |x: Option<f64>, name: &str| x.ok_or_else(|| Error::Config(format!("--{name} is required")));
        let k = a.k.unwrap_or(1.0);
        let scene = match model {
            Model::Umbilic => umbilic_scene(k, need(a.a, "a")?, need(a.b, "b")?, need(a.c, "c")?, a.radius)?,
            Model::Folded => folded_scene(k, need(a.d, "d")?, need(a.big_a, "A")?, a.radius)?,
        };
        (scene, a.out.clone())
    } else {
        let (report_path, out, projection) = match (&a.config, &a.report) {
            (Some(cfg_path), None) => {
                let rc: RenderConfig =
                    toml::from_str(&args::read(cfg_path)?).map_err(|e| Error::Config(e.message().to_string()))?;
                // paths in the config are relative to it
                let base = cfg_path.parent().unwrap_or(Path::new("."));
                (base.join(rc.report), a.out.clone().or(rc.output.map(|o| base.join(o))), rc.projection)
            }
            (None, Some(r)) => {
                let projection = if a.orthographic {
                    Projection::Orthographic { azimuth: a.azimuth, elevation: a.elevation }
                } else {
                    Projection::Chart
                };
                (r.clone(), a.out.clone(), projection)
            }
            _ => return Err(Error::Config("give exactly one of --config, --report or --model".into())),
        };
        let report = AnalysisReport::from_json(&args::read(&report_path)?)?;
        (SvgScene::from_report(&report, projection)?, out)
    };
    if scene.is_empty() {
        eprintln!("warning: empty scene, drawing the frame only");
    }
    emit(&render_svg(&scene), out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze(common) => {
            let cfg = common.config()?;
            run_analysis(&common, &cfg, Stages::all(&cfg))
        }
        Command::Trace { common, seed, branch, folded, length } => {
            let mut cfg = common.config()?;
            args::apply_trace_flags(&mut cfg, &seed, branch, folded, length);
            if cfg.seeds.is_empty() {
                return Err(Error::Config("no seeds: give --seed or [[seeds]] in the config".into()));
            }
            run_analysis(&common, &cfg, Stages { curves: true, ..Stages::NONE })
        }
        Command::Umbilics(common) => {
            run_analysis(&common, &common.config()?, Stages { umbilics: true, ..Stages::NONE })
        }
        Command::Parabolic(common) => {
            run_analysis(&common, &common.config()?, Stages { parabolic: true, ..Stages::NONE })
        }
        Command::Rotation { common, transits, analytic_only } => {
            let mut cfg = common.config()?;
            args::apply_rotation_flags(&mut cfg, transits, analytic_only);
            run_analysis(&common, &cfg, Stages { rotation: true, ..Stages::NONE })
        }
        Command::Poincare(common) => run_analysis(&common, &common.config()?, Stages { cycles: true, ..Stages::NONE }),
        Command::Render(a) => render(&a),
        Command::Sweep { common, delimiter } => {
            let cfg = common.config()?;
            let report = analyze(&cfg, Stages { sweep: true, ..Stages::NONE })?;
            let text = match (&report.sweep, common.json) {
                (_, true) => report.to_json()?,
                (Some(t), false) => t.to_delimited(delimiter.char()),
                (None, false) => String::new(),
            };
            emit(&text, common.out.as_deref())?;
            Ok(finish(&report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input() { INPUT_ERROR } else { NUMERICAL_FAILURE })
        }
    }
}
