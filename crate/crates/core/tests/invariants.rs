use std::f64::consts::PI;

use hmc_core::dynamics::{convergents, empirical_rotation_number};
use hmc_core::jet::Jet;
use hmc_core::mean_field::{Branch, MeanCurvatureFunction, QuadraticLineField};
use hmc_core::quadrature::tanh_sinh;
use hmc_core::surface::{builtin_surface, curvature_at, normal_curvature, PoleAxis, SurfaceKind};
use hmc_core::sweep::Grid;
use hmc_core::tracer::{residual, trace_line, Atlas, TraceConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_derivatives_match_closed_forms(u in -2.0f64..2.0, v in -2.0f64..2.0) {
        let (x, y) = (Jet::var_u(u, 3), Jet::var_v(v, 3));
        let f = (x * y).sin();
        // d/du sin(uv) = v cos(uv), d2/dudv = cos(uv) - uv sin(uv)
        prop_assert!((f.partial(1, 0) - v * (u * v).cos()).abs() < 1e-12);
        prop_assert!((f.partial(1, 1) - ((u * v).cos() - u * v * (u * v).sin())).abs() < 1e-12);
        let one = x.sin().powi(2) + x.cos().powi(2);
        prop_assert!((one.value() - 1.0).abs() < 1e-14 && one.gradient()[0].abs() < 1e-13);
        let back = y.exp().ln();
        prop_assert!((back.partial(0, 1) - 1.0).abs() < 1e-13 && back.partial(0, 2).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_endpoint_singular_integrand(a in -3.0f64..0.0, w in 0.1f64..4.0) {
        let b = a + w;
        // integral of sqrt((x-a)(b-x)) is pi (b-a)^2 / 8
        let q = tanh_sinh(|_, da, db| (da * db).sqrt(), a, b, 1e-12).unwrap();
        prop_assert!((q.value - PI * w * w / 8.0).abs() < 1e-11 * w * w, "{q:?}");
        let cubic = tanh_sinh(|x, _, _| x * x * x, a, b, 1e-12).unwrap();
        prop_assert!((cubic.value - (b.powi(4) - a.powi(4)) / 4.0).abs() < 1e-10);
    }

    /// Harmonic directions carry normal curvature equal to the harmonic mean.
    #[test]
    fn harmonic_directions_bend_by_the_harmonic_mean(
        c in 0.5f64..1.5, db in 0.2f64..1.0, da in 0.2f64..1.0, u in -1.2f64..1.2, v in -3.0f64..3.0,
    ) {
        let (b, a) = (c + db, c + db + da);
        let patch = builtin_surface(&SurfaceKind::EllipsoidTrig { a, b, c, poles: PoleAxis::Z }).unwrap();
        let (forms, curv) = curvature_at(&patch, [u, v]).unwrap();
        prop_assume!(curv.umbilicity > 1e-6);
        let want = 2.0 * curv.k1 * curv.k2 / (curv.k1 + curv.k2);
        let field = QuadraticLineField::harmonic(patch);
        let dirs = field.directions([u, v], 1e-12).unwrap();
        prop_assert_eq!(dirs.as_slice().len(), 2);
        for d in dirs.as_slice() {
            prop_assert!((normal_curvature(&forms, *d) - want).abs() < 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn means_lie_between_the_curvatures(k1 in 0.01f64..10.0, k2 in 0.01f64..10.0, r in -4.0f64..4.0, neg: bool) {
        let s = if neg { -1.0 } else { 1.0 };
        let (lo, hi) = (k1.min(k2), k1.max(k2));
        for mean in [
            MeanCurvatureFunction::Harmonic,
            MeanCurvatureFunction::Arithmetic,
            MeanCurvatureFunction::Geometric,
            MeanCurvatureFunction::Holder(r),
        ] {
            let m = mean.eval(s * k1, s * k2).unwrap() * s;
            prop_assert!(m >= lo * (1.0 - 1e-12) && m <= hi * (1.0 + 1e-12), "{mean:?}: {m}");
        }
        let h = MeanCurvatureFunction::Harmonic.eval(k1, k2).unwrap();
        let g = MeanCurvatureFunction::Geometric.eval(k1, k2).unwrap();
        let ar = MeanCurvatureFunction::Arithmetic.eval(k1, k2).unwrap();
        prop_assert!(h <= g * (1.0 + 1e-12) && g <= ar * (1.0 + 1e-12));
    }

    #[test]
    fn convergents_approximate(x in 0.0f64..1.0) {
        for (p, q) in convergents(x, 200) {
            prop_assert!(q >= 1 && (x - p as f64 / q as f64).abs() <= 1.0 / (q * q) as f64 + 1e-15);
        }
    }

    #[test]
    fn linear_fit_recovers_slope(start in -10.0f64..10.0, slope in -5.0f64..5.0, n in 3usize..40) {
        let values: Vec<f64> = (0..n).map(|i| start + slope * i as f64).collect();
        let fit = empirical_rotation_number(&values).unwrap();
        prop_assert!((fit.advance - slope).abs() < 1e-10 && fit.transits == n - 1);
    }

    #[test]
    fn grids_are_monotone_with_exact_ends(start in -5.0f64..5.0, w in 0.0f64..5.0, count in 1usize..50) {
        let g = Grid { start, end: start + w, count };
        let vals = g.values().unwrap();
        prop_assert_eq!(vals.len(), count);
        prop_assert_eq!(vals[0], start);
        prop_assert!(count == 1 || *vals.last().unwrap() == start + w);
        prop_assert!(vals.windows(2).all(|p| p[0] <= p[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Traced leaves stay on the lifted surface of the equation.
    #[test]
    fn traced_leaves_satisfy_the_equation(s in -1.2f64..1.2, t in -3.0f64..3.0, maximal: bool) {
        let patch = builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap();
        let atlas = Atlas::single(QuadraticLineField::harmonic(patch));
        let branch = if maximal { Branch::Maximal } else { Branch::Minimal };
        let cfg = TraceConfig { max_length: 2.0, ..Default::default() };
        let curve = trace_line(&atlas.fields[0], [s, t], branch, &cfg, &[]).unwrap();
        prop_assert!(curve.samples.len() > 2);
        prop_assert!(residual(&atlas, &curve) < 1e-8);
    }
}
