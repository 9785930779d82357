//! Plain-text summaries of analysis reports.

use hmc_core::dynamics::{Hyperbolicity, RotationVerdict};
use hmc_core::report::{AnalysisReport, CycleSource};
use std::fmt::Write;

pub fn summary(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let st = r.stages;
    let _ = writeln!(s, "surface: {:?}", r.config.surface.kind);
    if st.umbilics {
        let _ = writeln!(s, "umbilics: {}", r.umbilics.len());
        for u in &r.umbilics {
            let nf = &u.normal_form;
            let _ = writeln!(
                s,
                "  ({:.9}, {:.9})  pos ({:.6}, {:.6}, {:.6})  form (k, a, b, c) = ({:.6}, {:.6}, {:.6}, {:.6})",
                u.point[0], u.point[1], u.position.x, u.position.y, u.position.z, nf.k, nf.a, nf.b, nf.c
            );
            let _ = writeln!(
                s,
                "    harmonic {:?} (margin {:.3e})  principal {:?} (margin {:.3e})  lift saddles {} nodes {}",
                u.harmonic.verdict,
                u.harmonic.discriminant_margin,
                u.principal.verdict,
                u.principal.discriminant_margin,
                u.lift.saddles,
                u.lift.nodes
            );
        }
    }
    if st.parabolic {
        let _ = writeln!(s, "parabolic curves: {}", r.parabolic.len());
        for (i, l) in r.parabolic.iter().enumerate() {
            let _ = writeln!(
                s,
                "  #{i}: {} points, {}, min |grad K| {:.3e}{}",
                l.points.len(),
                if l.closed { "closed" } else { "open" },
                l.min_gradient,
                if l.degenerate_arc { ", kernel tangent along the whole curve" } else { "" }
            );
            for t in &l.tangential {
                let _ = writeln!(
                    s,
                    "    tangential ({:.6}, {:.6}): harmonic {:?}, asymptotic {:?}, sigma {:.4e}, delta {:.4e}",
                    t.point[0], t.point[1], t.harmonic.verdict, t.asymptotic.verdict, t.sigma, t.delta
                );
            }
        }
    }
    if st.curves {
        let _ = writeln!(s, "curves: {}", r.curves.len());
        for c in &r.curves {
            let _ = writeln!(
                s,
                "  seed ({}, {}) {}: {:?} after length {:.6}, {} samples, residual {:.2e}",
                c.seed.point[0], c.seed.point[1], c.seed.branch, c.termination, c.length, c.samples, c.residual
            );
        }
    }
    if let Some(rot) = &r.rotation {
        let _ = writeln!(s, "rotation:");
        let _ = writeln!(s, "  analytic   {:.12} (quadrature error {:.1e})", rot.analytic, rot.analytic_error);
        if let Some(e) = rot.empirical {
            let _ = writeln!(
                s,
                "  empirical  {:.12} (stderr {:.1e}, {} transits)",
                e,
                rot.empirical_stderr.unwrap_or(0.0),
                rot.transits
            );
            let _ = writeln!(s, "  difference {:.3e}", e - rot.analytic);
        }
        let verdict = match rot.verdict {
            RotationVerdict::Rational { p, q, distance } => format!("rational {p}/{q} (distance {distance:.1e})"),
            RotationVerdict::IrrationalLike { nearest_p, nearest_q, distance } => {
                format!("irrational-like (nearest {nearest_p}/{nearest_q}, distance {distance:.1e})")
            }
        };
        let _ = writeln!(s, "  turns      {:.12}  {verdict}", rot.turns);
    }
    if st.cycles {
        let _ = writeln!(s, "cycles: {}", r.cycles.len());
        for c in &r.cycles {
            let source = match c.source {
                CycleSource::RibbonCore => "ribbon core".to_string(),
                CycleSource::Curve(i) => format!("curve #{i}"),
            };
            let verdict = match c.verdict {
                Hyperbolicity::Hyperbolic { .. } => "hyperbolic".to_string(),
                Hyperbolicity::NonHyperbolic { margin, .. } => format!("not hyperbolic (margin {margin:.1e})"),
            };
            let _ = writeln!(
                s,
                "  {source}: length {:.9}, ln pi' {:.3e}, {verdict}; int K/H^2 ds {:.9}",
                c.length, c.ln_derivative, c.gauss_over_mean_sq
            );
            if let Some(p) = c.perturbation {
                let _ = writeln!(
                    s,
                    "    d/d eps ln pi' {:.9} against {:.9} (relative error {:.2e}, eps {:.0e})",
                    p.derivative, p.predicted, p.relative_error, p.epsilon
                );
            }
        }
    }
    if let Some(t) = &r.sweep {
        let _ = writeln!(s, "sweep: {} rows", t.rows.len());
    }
    for f in &r.failures {
        let _ = writeln!(s, "failed ({}): {}", f.stage, f.message);
    }
    s
}
