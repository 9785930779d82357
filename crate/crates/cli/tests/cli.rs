use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmc")).args(args).output().expect("hmc runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Structure must match exactly; numbers within a relative tolerance.
fn same_shape(got: &Value, want: &Value, path: &str, tol: f64) -> Result<(), String> {
    match (got, want) {
        (Value::Number(g), Value::Number(w)) => {
            let (g, w) = (g.as_f64().unwrap(), w.as_f64().unwrap());
            if (g - w).abs() <= tol * w.abs().max(1e-6) {
                Ok(())
            } else {
                Err(format!("{path}: {g} vs {w}"))
            }
        }
        (Value::Array(g), Value::Array(w)) => {
            if g.len() != w.len() {
                return Err(format!("{path}: length {} vs {}", g.len(), w.len()));
            }
            g.iter().zip(w).enumerate().try_for_each(|(i, (g, w))| same_shape(g, w, &format!("{path}[{i}]"), tol))
        }
        (Value::Object(g), Value::Object(w)) => {
            let (gk, wk): (Vec<_>, Vec<_>) = (g.keys().collect(), w.keys().collect());
            if gk != wk {
                return Err(format!("{path}: keys {gk:?} vs {wk:?}"));
            }
            g.iter().try_for_each(|(k, v)| same_shape(v, &w[k], &format!("{path}.{k}"), tol))
        }
        _ if got == want => Ok(()),
        _ => Err(format!("{path}: {got} vs {want}")),
    }
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, text: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, text).unwrap();
        return;
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let got: Value = serde_json::from_str(text).unwrap();
    if let Err(e) = same_shape(&got, &want, "$", 1e-6) {
        panic!("{name} drifted from the golden file at {e}");
    }
}

#[test]
fn ellipsoid_umbilics_match_golden() {
    let out = hmc(&["umbilics", "--surface", "ellipsoid", "--a", "3", "--b", "2", "--c", "1", "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let umbilics = v["umbilics"].as_array().unwrap();
    assert_eq!(umbilics.len(), 4);
    assert!(umbilics.iter().all(|u| u["harmonic"]["verdict"] == "H1" && u["principal"]["verdict"] == "D1"));
    golden("ellipsoid_umbilics.json", &text);
}

#[test]
fn torus_analysis_matches_golden() {
    let cfg = data("torus.toml");
    let out = hmc(&["analyze", "--config", cfg.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["curves"].as_array().unwrap().len(), 2);
    let rot = &v["rotation"];
    let diff = rot["analytic"].as_f64().unwrap() - rot["empirical"].as_f64().unwrap();
    assert!(diff.abs() < 1e-4, "{rot}");
    golden("torus_analysis.json", &text);
}

#[test]
fn runs_are_byte_identical() {
    let cfg = data("torus.toml");
    let args = ["analyze", "--config", cfg.to_str().unwrap(), "--json"];
    let (a, b) = (hmc(&args), hmc(&args));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&hmc(&["rotation", "--surface", "torus", "--r", "1", "--R", "2", "--analytic-only"])), 0);
    // rotation is only defined for tori and ellipsoids
    assert_eq!(code(&hmc(&["rotation", "--surface", "sphere", "--radius", "1"])), 2);
    assert_eq!(code(&hmc(&["umbilics", "--surface", "torus", "--r", "1"])), 2);
    assert_eq!(code(&hmc(&["umbilics", "--no-such-flag"])), 2);
    assert_eq!(code(&hmc(&["analyze", "--config", "/nonexistent/config.toml"])), 2);
    // every sphere point is umbilic and no classification is possible
    let out = hmc(&["umbilics", "--surface", "sphere", "--radius", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("umbilics failed"));
}

#[test]
fn summary_is_human_readable() {
    let out = hmc(&["rotation", "--surface", "torus", "--r", "1", "--R", "2", "--transits", "10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("analytic") && text.contains("empirical"), "{text}");
}

#[test]
fn render_from_a_report_config() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let cfg = data("torus.toml");
    let out = hmc(&["analyze", "--config", cfg.to_str().unwrap(), "--json", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let render = dir.path().join("render.toml");
    std::fs::write(&render, "report = \"report.json\"\noutput = \"scene.svg\"\n").unwrap();
    let out = hmc(&["render", "--config", render.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("scene.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("<path").count() >= 2);
}

#[test]
fn render_a_local_model() {
    let out = hmc(&["render", "--model", "umbilic", "--a", "1", "--b", "2", "--c", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("<svg "));
    // missing normal-form coefficient
    assert_eq!(code(&hmc(&["render", "--model", "folded", "--d", "1"])), 2);
}

#[test]
fn sweep_writes_a_table() {
    let cfg = data("sweep.toml");
    let out = hmc(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2, "{text}");
    let width = lines[0].split('\t').count();
    assert!(width >= 4 && lines.iter().all(|l| l.split('\t').count() == width));
    let csv = hmc(&["sweep", "--config", cfg.to_str().unwrap(), "--delimiter", "comma"]);
    assert!(String::from_utf8(csv.stdout).unwrap().lines().all(|l| l.split(',').count() == width));
}
