use super::*;
use crate::surface::{builtin_surface, SurfaceKind};
use std::f64::consts::{FRAC_PI_2, PI};

fn torus_field(r: f64, big_r: f64) -> QuadraticLineField {
    QuadraticLineField::harmonic(builtin_surface(&SurfaceKind::Torus { r, big_r }).unwrap())
}

/// Classical RK4 for `ds/dtheta = sign sqrt(cos s (1 + a cos s) / a)`.
fn separable_oracle(a: f64, s0: f64, sign: f64, theta: f64) -> f64 {
    let f = |s: f64| sign * (s.cos() * (1.0 + a * s.cos()) / a).max(0.0).sqrt();
    let n = 20_000;
    let h = theta / n as f64;
    let mut s = s0;
    for _ in 0..n {
        let k1 = f(s);
        let k2 = f(s + 0.5 * h * k1);
        let k3 = f(s + 0.5 * h * k2);
        let k4 = f(s + h * k3);
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    s
}

#[test]
fn torus_leaf_matches_separable_equation() {
    let field = torus_field(1.0, 2.0);
    let cfg = TraceConfig { max_length: 3.0, ..Default::default() };
    let curve = trace_line(&field, [0.0, 0.0], Branch::Maximal, &cfg, &[]).unwrap();
    assert!(curve.samples.len() > 10);
    let sign = (curve.samples[5].u - curve.samples[0].u).signum() * (curve.samples[5].v - curve.samples[0].v).signum();
    let mut worst = 0.0f64;
    for s in curve.samples.iter().step_by(7) {
        let oracle = separable_oracle(0.5, 0.0, sign, s.v);
        worst = worst.max((oracle - s.u).abs());
    }
    assert!(worst < 1e-6, "worst deviation {worst}");
    assert!(curve.samples.iter().all(|s| s.branch == Some(Branch::Maximal) || s.branch.is_none()));
}

#[test]
fn maximal_branch_rises_with_theta() {
    let field = torus_field(1.0, 2.0);
    let cfg = TraceConfig { max_length: 0.5, ..Default::default() };
    let curve = trace_line(&field, [0.0, 0.0], Branch::Maximal, &cfg, &[]).unwrap();
    let end = curve.last();
    assert!(end.v > 0.0);
    assert!(end.u > 0.0, "maximal leaf should have ds/dtheta > 0, got end {:?}", end.point());
}

#[test]
fn single_leaf_stops_at_parabolic_circle() {
    let field = torus_field(1.0, 2.0);
    let cfg = TraceConfig { max_length: 20.0, ..Default::default() };
    let curve = trace_line(&field, [0.0, 0.0], Branch::Maximal, &cfg, &[]).unwrap();
    assert_eq!(curve.termination, Termination::ParabolicContact);
    assert!((curve.last().u.abs() - FRAC_PI_2).abs() < 1e-5, "{:?}", curve.last());
}

#[test]
fn parabolic_seed_is_rejected() {
    let field = torus_field(1.0, 2.0);
    let err = trace_line(&field, [FRAC_PI_2, 0.0], Branch::Maximal, &TraceConfig::default(), &[]);
    assert!(matches!(err, Err(Error::BadSeed(_))));
}

#[test]
fn folded_torus_line_alternates_between_parabolic_circles() {
    let field = torus_field(1.0, 2.0);
    let atlas = Atlas::single(field);
    let cfg = TraceConfig { max_length: 25.0, ..Default::default() };
    let curve = trace_folded_extended(&atlas, 0, [0.0, 0.0], Branch::Maximal, &cfg, &[]).unwrap();
    assert!(curve.contacts.len() >= 3, "{} contacts", curve.contacts.len());
    for pair in curve.contacts.windows(2) {
        let (a, b) = (pair[0].point[0], pair[1].point[0]);
        assert!((a.abs() - FRAC_PI_2).abs() < 1e-6 && (b.abs() - FRAC_PI_2).abs() < 1e-6);
        assert!(a * b < 0.0, "contacts should alternate: {a} {b}");
    }
    // branch labels flip at each contact
    let labels: Vec<Branch> = curve.samples.iter().filter_map(|s| s.branch).collect();
    let flips = labels.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, curve.contacts.len());
    assert!(residual(&atlas, &curve) < 1e-8);
}

#[test]
fn leaves_are_reversible() {
    let field = torus_field(1.0, 2.0);
    let cfg = TraceConfig { max_length: 2.0, ..Default::default() };
    let fwd = trace_line(&field, [0.3, 0.1], Branch::Minimal, &cfg, &[]).unwrap();
    let end = *fwd.last();
    let atlas = Atlas::single(field);
    let back = trace_from_state(&atlas, 0, [end.u, end.v, end.phi + PI], &cfg, &[], false).unwrap();
    let home = back.last();
    assert!((home.u - 0.3).abs() < 1e-7 && (home.v - 0.1).abs() < 1e-7, "{home:?}");
}

#[test]
fn torus_section_crossings() {
    let field = torus_field(1.0, 2.0);
    let atlas = Atlas::single(field);
    // theta = -pi/2 half-plane: y = (R + r cos s) > 0 side, plane x = 0
    let sec = Section {
        normal: Vec3::new(1.0, 0.0, 0.0),
        offset: 0.0,
        origin: Vec3::default(),
        axis: Vec3::new(0.0, 1.0, 0.0),
        range: [0.0, 10.0],
    };
    let cfg = TraceConfig { max_length: 30.0, ..Default::default() };
    let curve = trace_folded_extended(&atlas, 0, [0.0, 0.0], Branch::Maximal, &cfg, &[sec]).unwrap();
    assert!(!curve.crossings.is_empty());
    for c in &curve.crossings {
        assert!(c.pos.x.abs() < 1e-9 && c.pos.y > 0.0);
    }
}
