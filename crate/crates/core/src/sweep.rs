//! Parameter sweeps, run in parallel and written as delimiter-separated tables.

use crate::dynamics::torus_rotation_number;
use crate::error::{Error, Result};
use crate::singularity::{
    classify_parabolic_asymptotic, classify_parabolic_harmonic, classify_umbilic_harmonic, classify_umbilic_principal,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `count` evenly spaced values from `start` to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 || !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidParameters("grid needs finite ends and at least one value".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let h = (self.end - self.start) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| if i + 1 == self.count { self.end } else { self.start + h * i as f64 }).collect())
    }
}

fn one() -> f64 {
    1.0
}

fn margin() -> f64 {
    crate::singularity::CLASSIFY_MARGIN
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    /// Azimuth advance per transit on tori with ratio `a = r/R`.
    TorusRotation { a: Grid },
    /// Harmonic and principal types of umbilic normal forms `(k, a, b, c)`.
    UmbilicTable {
        #[serde(default = "one")]
        k: f64,
        a: Grid,
        b: Grid,
        c: Grid,
        #[serde(default = "margin")]
        margin: f64,
    },
    /// Folded-singularity types at tangential parabolic points `(k, d, A)`.
    ParabolicTable {
        #[serde(default = "one")]
        k: f64,
        d: Grid,
        #[serde(rename = "A")]
        big_a: Grid,
        #[serde(default = "margin")]
        margin: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x:e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepTable {
    /// Header line, then one line per parameter point.
    pub fn to_delimited(&self, sep: char) -> String {
        let mut out = self.columns.join(&sep.to_string());
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&line.join(&sep.to_string()));
            out.push('\n');
        }
        out
    }
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn text<T: std::fmt::Debug>(t: T) -> Cell {
    Cell::Text(format!("{t:?}"))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    use Cell::Num;
    let (cols, rows) = match *spec {
        SweepSpec::TorusRotation { a } => {
            let values = a.values()?;
            if values.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return Err(Error::InvalidParameters("torus ratio must lie in (0, 1)".into()));
            }
            let rows: Result<Vec<_>> = values
                .par_iter()
                .map(|&a| {
                    let t = torus_rotation_number(a)?;
                    Ok(vec![Num(a), Num(t.integral), Num(t.error), Num(t.turns)])
                })
                .collect();
            (columns(&["a", "rho", "error", "turns"]), rows?)
        }
        SweepSpec::UmbilicTable { k, a, b, c, margin } => {
            let mut points = Vec::new();
            for &a in &a.values()? {
                for &b in &b.values()? {
                    for &c in &c.values()? {
                        points.push((a, b, c));
                    }
                }
            }
            let rows = points
                .par_iter()
                .map(|&(a, b, c)| {
                    let h = classify_umbilic_harmonic(k, a, b, c, margin);
                    let p = classify_umbilic_principal(a, b, c, margin);
                    vec![
                        Num(k),
                        Num(a),
                        Num(b),
                        Num(c),
                        Num(h.discriminant),
                        Num(h.discriminant_margin),
                        Num(h.transversality_margin),
                        text(h.verdict),
                        Num(p.discriminant_margin),
                        text(p.verdict),
                    ]
                })
                .collect();
            let names = [
                "k",
                "a",
                "b",
                "c",
                "delta_h",
                "delta_h_margin",
                "transversality_margin",
                "harmonic",
                "delta_p_margin",
                "principal",
            ];
            (columns(&names), rows)
        }
        SweepSpec::ParabolicTable { k, d, big_a, margin } => {
            let mut points = Vec::new();
            for &d in &d.values()? {
                for &big_a in &big_a.values()? {
                    points.push((d, big_a));
                }
            }
            let rows = points
                .par_iter()
                .map(|&(d, big_a)| {
                    let h = classify_parabolic_harmonic(k, d, big_a, margin);
                    let s = classify_parabolic_asymptotic(k, d, big_a, margin);
                    vec![
                        Num(k),
                        Num(d),
                        Num(big_a),
                        Num(h.saddle_quantity),
                        Num(h.discriminant),
                        text(h.verdict),
                        Num(h.eigenvalue_product()),
                        Num(s.discriminant),
                        text(s.verdict),
                        Num(s.eigenvalue_product()),
                    ]
                })
                .collect();
            let names =
                ["k", "d", "A", "sigma", "delta", "harmonic", "lambda_product", "delta_a", "asymptotic", "r_product"];
            (columns(&names), rows)
        }
    };
    Ok(SweepTable { spec: *spec, columns: cols, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends_are_exact() {
        let g = Grid { start: 0.1, end: 0.7, count: 7 }.values().unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!((g[0], g[6]), (0.1, 0.7));
        assert!(Grid { start: 0.0, end: 1.0, count: 0 }.values().is_err());
    }

    #[test]
    fn umbilic_table_rows_follow_the_grid() {
        let spec: SweepSpec = toml::from_str(
            "kind = \"umbilic_table\"\na = { start = 5.0, end = 6.0, count = 2 }\n\
             b = { start = 1.0, end = 1.0, count = 1 }\nc = { start = 0.0, end = 1.0, count = 2 }",
        )
        .unwrap();
        let t = run_sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 4);
        // (5, 1, 1) is the H1 form, (6, 1, 0) the H2 form
        assert_eq!(t.rows[1][7], Cell::Text("H1".into()));
        assert_eq!(t.rows[2][7], Cell::Text("H2".into()));
        let tsv = t.to_delimited('\t');
        assert_eq!(tsv.lines().count(), 5);
        assert!(tsv.starts_with("k\ta\tb\tc\tdelta_h"));
    }

    #[test]
    fn parabolic_products_match_closed_forms() {
        let spec = SweepSpec::ParabolicTable {
            k: 1.5,
            d: Grid { start: -1.0, end: 1.0, count: 5 },
            big_a: Grid { start: -2.0, end: 6.0, count: 5 },
            margin: 1e-6,
        };
        let t = run_sweep(&spec).unwrap();
        for row in &t.rows {
            let [Cell::Num(k), Cell::Num(d), Cell::Num(a)] = [&row[0], &row[1], &row[2]].map(Clone::clone) else {
                panic!()
            };
            let Cell::Num(lp) = row[6] else { panic!() };
            let Cell::Num(rp) = row[9] else { panic!() };
            let q = a * k - 3.0 * d * d;
            assert!((lp + 2.0 * k * k * q).abs() < 1e-10 * (1.0 + q.abs()));
            assert!((rp - 2.0 * q).abs() < 1e-10 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn torus_rejects_bad_ratio() {
        let spec = SweepSpec::TorusRotation { a: Grid { start: 0.5, end: 1.5, count: 3 } };
        assert!(run_sweep(&spec).is_err());
    }
}
