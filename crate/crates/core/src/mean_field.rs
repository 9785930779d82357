//! Binary differential equations of mean-curvature lines.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::{
    curvature_at, forms_jet, ChartPoint, CurvatureData, FundamentalForms, SurfacePatch, CURVATURE_TOL,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Choice of mean `mu(k1, k2)` of the principal curvatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mean", content = "r")]
pub enum MeanCurvatureFunction {
    Harmonic,
    Arithmetic,
    Geometric,
    Asymptotic,
    PrincipalMin,
    PrincipalMax,
    Holder(f64),
}

impl MeanCurvatureFunction {
    /// Evaluates `mu(k1, k2)`.
    ///
    /// Means of two negative curvatures are taken with a negative sign, so
    /// that `mu` stays between `k1` and `k2` wherever `k1 k2 > 0`.
    pub fn eval(&self, k1: f64, k2: f64) -> Result<f64> {
        let h = 0.5 * (k1 + k2);
        let k = k1 * k2;
        match *self {
            Self::Harmonic => {
                if h.abs() <= CURVATURE_TOL {
                    Err(Error::HarmonicUndefined(h.abs()))
                } else {
                    Ok(k / h)
                }
            }
            Self::Arithmetic => Ok(h),
            Self::Geometric => {
                if k < -CURVATURE_TOL {
                    Err(Error::MuUndefined(format!("geometric mean needs K >= 0, K = {k:e}")))
                } else {
                    Ok(k.max(0.0).sqrt().copysign(h))
                }
            }
            Self::Asymptotic => Ok(0.0),
            Self::PrincipalMin => Ok(k1.min(k2)),
            Self::PrincipalMax => Ok(k1.max(k2)),
            Self::Holder(r) => holder(k1, k2, r),
        }
    }

    /// `mu` at a point, with `K/H` for the harmonic mean (no principal
    /// curvature square roots involved).
    pub fn at(&self, curv: &CurvatureData) -> Result<f64> {
        match self {
            Self::Harmonic => {
                if curv.mean.abs() <= CURVATURE_TOL {
                    Err(Error::HarmonicUndefined(curv.mean.abs()))
                } else {
                    Ok(curv.gauss / curv.mean)
                }
            }
            _ => self.eval(curv.k1, curv.k2),
        }
    }
}

/// `mu` as a jet, from jets of the Gaussian and mean curvature.
pub fn mu_jet(mean: MeanCurvatureFunction, gauss: Jet, h: Jet) -> Result<Jet> {
    let order = gauss.order();
    let split = || {
        let disc = h * h - gauss;
        if disc.value() <= CURVATURE_TOL * CURVATURE_TOL {
            return Err(Error::UmbilicPoint(disc.value()));
        }
        let root = disc.sqrt();
        Ok((h - root, h + root))
    };
    Ok(match mean {
        MeanCurvatureFunction::Harmonic => {
            if h.value().abs() <= CURVATURE_TOL {
                return Err(Error::HarmonicUndefined(h.value().abs()));
            }
            gauss / h
        }
        MeanCurvatureFunction::Arithmetic => h,
        MeanCurvatureFunction::Geometric => {
            if gauss.value() <= CURVATURE_TOL {
                return Err(Error::MuUndefined("geometric mean needs K > 0 for derivatives".into()));
            }
            gauss.sqrt().scale(h.value().signum())
        }
        MeanCurvatureFunction::Asymptotic => Jet::constant(0.0, order),
        MeanCurvatureFunction::PrincipalMin => split()?.0,
        MeanCurvatureFunction::PrincipalMax => split()?.1,
        MeanCurvatureFunction::Holder(r) => {
            if r.abs() < 1e-12 {
                return mu_jet(MeanCurvatureFunction::Geometric, gauss, h);
            }
            if r == 1.0 {
                return Ok(h);
            }
            if r == -1.0 {
                return mu_jet(MeanCurvatureFunction::Harmonic, gauss, h);
            }
            let (k1, k2) = split()?;
            if k1.value() * k2.value() <= 0.0 {
                return Err(Error::MuUndefined("Holder mean derivatives need k1 k2 > 0".into()));
            }
            let sign = k1.value().signum();
            let (a1, a2) = (k1.scale(sign), k2.scale(sign));
            ((a1.powf(r) + a2.powf(r)) * 0.5).powf(1.0 / r).scale(sign)
        }
    })
}

fn holder(k1: f64, k2: f64, r: f64) -> Result<f64> {
    if !r.is_finite() {
        return Err(Error::MuUndefined("non-finite Holder exponent".into()));
    }
    if r.abs() < 1e-12 {
        return MeanCurvatureFunction::Geometric.eval(k1, k2);
    }
    if r == 1.0 {
        return Ok(0.5 * (k1 + k2));
    }
    if r == -1.0 {
        return MeanCurvatureFunction::Harmonic.eval(k1, k2);
    }
    if k1 * k2 > 0.0 {
        let sign = k1.signum();
        let s = 0.5 * (k1.abs().powf(r) + k2.abs().powf(r));
        return Ok(sign * s.powf(1.0 / r));
    }
    let n = r.round();
    if r == n && (k1 != 0.0 || n > 0.0) && (k2 != 0.0 || n > 0.0) {
        let s = 0.5 * (k1.powi(n as i32) + k2.powi(n as i32));
        if n as i64 % 2 != 0 {
            return Ok(s.signum() * s.abs().powf(1.0 / n));
        }
        return Ok(s.powf(1.0 / n).copysign(k1 + k2));
    }
    Err(Error::MuUndefined(format!("Holder mean of exponent {r} needs k1 k2 > 0 (k1 = {k1:e}, k2 = {k2:e})")))
}

impl fmt::Display for MeanCurvatureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Harmonic => f.write_str("harmonic"),
            Self::Arithmetic => f.write_str("arithmetic"),
            Self::Geometric => f.write_str("geometric"),
            Self::Asymptotic => f.write_str("asymptotic"),
            Self::PrincipalMin => f.write_str("principal-min"),
            Self::PrincipalMax => f.write_str("principal-max"),
            Self::Holder(r) => write!(f, "holder:{r}"),
        }
    }
}

impl FromStr for MeanCurvatureFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "harmonic" => Self::Harmonic,
            "arithmetic" => Self::Arithmetic,
            "geometric" => Self::Geometric,
            "asymptotic" => Self::Asymptotic,
            "principal-min" => Self::PrincipalMin,
            "principal-max" => Self::PrincipalMax,
            other => {
                let r = other
                    .strip_prefix("holder:")
                    .and_then(|r| r.parse::<f64>().ok())
                    .filter(|r| r.is_finite())
                    .ok_or_else(|| Error::Config(format!("unknown mean function `{other}`")))?;
                Self::Holder(r)
            }
        })
    }
}

/// Coefficients `(Lc, Mc, Nc)` of `Lc dv^2 + Mc du dv + Nc du^2 = 0`.
pub type Coeffs = [f64; 3];

/// `(g - mu G, 2 (f - mu F), e - mu E)`.
pub fn coeffs_with_mu(forms: &FundamentalForms, mu: f64) -> Coeffs {
    [forms.g - mu * forms.big_g, 2.0 * (forms.f - mu * forms.big_f), forms.e - mu * forms.big_e]
}

/// Harmonic-line equation with `mu = K/H`.
pub fn harmonic_bde_eq1(forms: &FundamentalForms, curv: &CurvatureData) -> Result<Coeffs> {
    let mu = MeanCurvatureFunction::Harmonic.at(curv)?;
    Ok(coeffs_with_mu(forms, mu))
}

/// Polynomial form of the harmonic-line equation, defined everywhere.
///
/// Equals `(eG - 2fF + gE)` times [`harmonic_bde_eq1`], that is
/// `2H (EG - F^2)` times it.
pub fn harmonic_bde_eq2(forms: &FundamentalForms) -> Coeffs {
    let FundamentalForms { big_e, big_f, big_g, e, f, g } = *forms;
    [
        g * (g * big_e - e * big_g) + 2.0 * f * (f * big_g - g * big_f),
        2.0 * g * (f * big_e - e * big_f) + 2.0 * e * (f * big_g - g * big_f),
        e * (e * big_g - g * big_e) + 2.0 * f * (f * big_e - e * big_f),
    ]
}

pub fn mu_bde(forms: &FundamentalForms, curv: &CurvatureData, mu: MeanCurvatureFunction) -> Result<Coeffs> {
    Ok(coeffs_with_mu(forms, mu.at(curv)?))
}

/// Root structure of a binary quadratic equation at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "directions")]
pub enum Directions {
    /// All coefficients vanish.
    Indeterminate,
    /// Negative discriminant.
    None,
    /// Double root.
    One([f64; 2]),
    Two([[f64; 2]; 2]),
}

impl Directions {
    pub fn as_slice(&self) -> &[[f64; 2]] {
        match self {
            Self::One(d) => std::slice::from_ref(d),
            Self::Two(d) => d,
            _ => &[],
        }
    }
}

/// Real roots `x` of `a x^2 + b x + c = 0` with `|a|` not smaller than `|c|`.
fn stable_roots(a: f64, b: f64, c: f64, disc: f64) -> [f64; 2] {
    let sq = disc.max(0.0).sqrt();
    let q = -0.5 * (b + sq.copysign(if b == 0.0 { 1.0 } else { b }));
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { -r1 };
    [r1, r2]
}

/// Solves `Lc dv^2 + Mc du dv + Nc du^2 = 0` for projective directions,
/// normalized to unit length in the metric of `forms`. `tol` is relative to
/// the largest coefficient.
pub fn directions(coeffs: Coeffs, forms: &FundamentalForms, tol: f64) -> Directions {
    let [lc, mc, nc] = coeffs;
    let scale = lc.abs().max(mc.abs()).max(nc.abs());
    if !(scale > tol) {
        return Directions::Indeterminate;
    }
    let (lc, mc, nc) = (lc / scale, mc / scale, nc / scale);
    let disc = mc * mc - 4.0 * lc * nc;
    if disc < -tol {
        return Directions::None;
    }
    let dirs: Vec<[f64; 2]> = if lc.abs() <= tol && nc.abs() <= tol {
        vec![[1.0, 0.0], [0.0, 1.0]]
    } else if nc.abs() >= lc.abs() {
        // p = du/dv solves Nc p^2 + Mc p + Lc = 0
        stable_roots(nc, mc, lc, disc).iter().map(|&p| [p, 1.0]).collect()
    } else {
        // q = dv/du solves Lc q^2 + Mc q + Nc = 0
        stable_roots(lc, mc, nc, disc).iter().map(|&q| [1.0, q]).collect()
    };
    let dirs: Vec<[f64; 2]> = dirs.into_iter().map(|d| forms.normalize(d)).collect();
    if disc.abs() <= tol {
        Directions::One(dirs[0])
    } else {
        Directions::Two([dirs[0], dirs[1]])
    }
}

/// Angle from the `k1` principal direction to `dir`, in the metric.
pub fn principal_angle(forms: &FundamentalForms, curv: &CurvatureData, dir: [f64; 2]) -> Result<f64> {
    let [d1, d2] = curv.directions.ok_or(Error::UmbilicPoint(curv.umbilicity))?;
    Ok(forms.first(d2, dir).atan2(forms.first(d1, dir)))
}

/// `tau_g = (k2 - k1) sin theta cos theta`, theta measured from the `k1` direction.
pub fn geodesic_torsion(forms: &FundamentalForms, curv: &CurvatureData, dir: [f64; 2]) -> Result<f64> {
    let theta = principal_angle(forms, curv, dir)?;
    Ok((curv.k2 - curv.k1) * theta.sin() * theta.cos())
}

/// The two harmonic foliations, told apart by the sign of the geodesic torsion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Minimal,
    Maximal,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Self::Minimal => -1.0,
            Self::Maximal => 1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::Minimal => Self::Maximal,
            Self::Maximal => Self::Minimal,
        }
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimal" | "min" => Ok(Self::Minimal),
            "maximal" | "max" => Ok(Self::Maximal),
            other => Err(Error::Config(format!("unknown branch `{other}`"))),
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Minimal => "minimal",
            Self::Maximal => "maximal",
        })
    }
}

/// Default threshold on `|tau_g|` below which the branch is ambiguous.
pub const BRANCH_TOL: f64 = 1e-7;

pub fn foliation_branch(forms: &FundamentalForms, curv: &CurvatureData, dir: [f64; 2], tol: f64) -> Result<Branch> {
    let tau = geodesic_torsion(forms, curv, dir)?;
    if tau.abs() < tol {
        Err(Error::AmbiguousBranch(tau.abs()))
    } else if tau < 0.0 {
        Ok(Branch::Minimal)
    } else {
        Ok(Branch::Maximal)
    }
}

/// Where the coefficient triple comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Eq1,
    Eq2,
    GenericMu,
}

/// A quadratic line field on a patch.
#[derive(Debug, Clone)]
pub struct QuadraticLineField {
    pub patch: SurfacePatch,
    pub mean: MeanCurvatureFunction,
    pub provenance: Provenance,
}

impl QuadraticLineField {
    pub fn harmonic(patch: SurfacePatch) -> Self {
        Self { patch, mean: MeanCurvatureFunction::Harmonic, provenance: Provenance::Eq1 }
    }

    pub fn new(patch: SurfacePatch, mean: MeanCurvatureFunction) -> Self {
        let provenance = match mean {
            MeanCurvatureFunction::Harmonic => Provenance::Eq1,
            _ => Provenance::GenericMu,
        };
        Self { patch, mean, provenance }
    }

    pub fn coeffs(&self, p: ChartPoint) -> Result<Coeffs> {
        let (forms, curv) = curvature_at(&self.patch, p)?;
        match self.provenance {
            Provenance::Eq2 => Ok(harmonic_bde_eq2(&forms)),
            _ => mu_bde(&forms, &curv, self.mean),
        }
    }

    /// Coefficients as first-order jets about `p`, with the forms and
    /// curvature data at `p`.
    pub fn coeff_jets(&self, p: ChartPoint) -> Result<([Jet; 3], FundamentalForms, CurvatureData)> {
        let fj = forms_jet(&self.patch, p, 1)?;
        let forms = fj.at_base();
        let curv = CurvatureData::from_forms(&forms, CURVATURE_TOL);
        let jets = match self.provenance {
            Provenance::Eq2 => {
                let (e, f, g) = (fj.e, fj.f, fj.g);
                let (ee, ff, gg) = (fj.big_e, fj.big_f, fj.big_g);
                [
                    g * (g * ee - e * gg) + f * (f * gg - g * ff) * 2.0,
                    g * (f * ee - e * ff) * 2.0 + e * (f * gg - g * ff) * 2.0,
                    e * (e * gg - g * ee) + f * (f * ee - e * ff) * 2.0,
                ]
            }
            _ => {
                let (k, h) = fj.gauss_mean();
                let mu = mu_jet(self.mean, k, h)?;
                [fj.g - mu * fj.big_g, (fj.f - mu * fj.big_f) * 2.0, fj.e - mu * fj.big_e]
            }
        };
        Ok((jets, forms, curv))
    }

    pub fn directions(&self, p: ChartPoint, tol: f64) -> Result<Directions> {
        let (forms, _) = curvature_at(&self.patch, p)?;
        Ok(directions(self.coeffs(p)?, &forms, tol))
    }

    /// The line-field direction at `p` on the given branch.
    pub fn branch_direction(&self, p: ChartPoint, branch: Branch) -> Result<[f64; 2]> {
        let (forms, curv) = curvature_at(&self.patch, p)?;
        let d = directions(self.coeffs(p)?, &forms, 1e-12);
        for dir in d.as_slice() {
            if foliation_branch(&forms, &curv, *dir, BRANCH_TOL)? == branch {
                return Ok(*dir);
            }
        }
        Err(Error::AmbiguousBranch(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{builtin_surface, fundamental_forms, SurfaceKind};
    use std::f64::consts::FRAC_PI_3;

    fn torus_point() -> (FundamentalForms, CurvatureData) {
        let t = builtin_surface(&SurfaceKind::Torus { r: 1.0, big_r: 2.0 }).unwrap();
        curvature_at(&t, [FRAC_PI_3, 0.0]).unwrap()
    }

    #[test]
    fn torus_eq1_coefficients() {
        let (f, c) = torus_point();
        let [l, m, n] = harmonic_bde_eq1(&f, &c).unwrap();
        // hand evaluation: -1.25 + 6.25/3, 0, -1 + 1/3
        assert!((l - 5.0 / 6.0).abs() < 1e-12);
        assert!(m.abs() < 1e-12);
        assert!((n + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn torus_eq2_coefficients() {
        let (f, c) = torus_point();
        let [l, m, n] = harmonic_bde_eq2(&f);
        assert!((l + 6.25).abs() < 1e-12 && m.abs() < 1e-12 && (n - 5.0).abs() < 1e-12);
        let scale = 2.0 * c.mean * f.metric_det();
        let eq1 = harmonic_bde_eq1(&f, &c).unwrap();
        for (a, b) in [l, m, n].iter().zip(eq1) {
            assert!((a - scale * b).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_directions_and_branches() {
        let (f, c) = torus_point();
        let d = directions(harmonic_bde_eq1(&f, &c).unwrap(), &f, 1e-12);
        let Directions::Two(dirs) = d else { panic!("{d:?}") };
        // du/dv = +-sqrt(0.8333/0.6667), then metric normalization
        let ratio = (1.25f64).sqrt();
        for dir in dirs {
            assert!((dir[0].abs() / dir[1].abs() - ratio).abs() < 1e-12);
        }
        let expected = 0.2f64.sqrt() * (0.36f64 - 0.2).sqrt() / 0.6;
        let taus: Vec<f64> = dirs.iter().map(|d| geodesic_torsion(&f, &c, *d).unwrap()).collect();
        assert!((taus[0].abs() - expected).abs() < 1e-12);
        assert!((taus[0] + taus[1]).abs() < 1e-12);
        let branches: Vec<Branch> = dirs.iter().map(|d| foliation_branch(&f, &c, *d, BRANCH_TOL).unwrap()).collect();
        assert_ne!(branches[0], branches[1]);
    }

    #[test]
    fn sphere_is_indeterminate() {
        let s = builtin_surface(&SurfaceKind::Sphere { radius: 2.0 }).unwrap();
        let (f, c) = curvature_at(&s, [0.3, 0.4]).unwrap();
        let eq1 = harmonic_bde_eq1(&f, &c).unwrap();
        assert_eq!(directions(eq1, &f, 1e-10), Directions::Indeterminate);
        assert!(harmonic_bde_eq2(&f).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn parabolic_origin_has_single_direction() {
        let s =
            builtin_surface(&SurfaceKind::MongeParabolic { k: 1.0, a: 1.0, b: 0.5, c: 0.2, d: 0.3, quartic: [0.0; 5] })
                .unwrap();
        let f = fundamental_forms(&s, [0.0, 0.0]).unwrap();
        let d = directions(harmonic_bde_eq2(&f), &f, 1e-12);
        assert_eq!(d, Directions::One([1.0, 0.0]));
    }

    #[test]
    fn principal_direction_has_zero_torsion() {
        let (f, c) = torus_point();
        let d1 = c.directions.unwrap()[0];
        assert!(geodesic_torsion(&f, &c, d1).unwrap().abs() < 1e-14);
        let arithmetic = directions(mu_bde(&f, &c, MeanCurvatureFunction::Arithmetic).unwrap(), &f, 1e-12);
        for d in arithmetic.as_slice() {
            let tau = geodesic_torsion(&f, &c, *d).unwrap().abs();
            assert!((tau - c.umbilicity.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn holder_limits() {
        let (k1, k2) = (0.7, 2.3);
        let h = MeanCurvatureFunction::Holder;
        assert!((h(1.0).eval(k1, k2).unwrap() - 1.5).abs() < 1e-12);
        assert!((h(-1.0).eval(k1, k2).unwrap() - 2.0 * k1 * k2 / (k1 + k2)).abs() < 1e-12);
        let g = (k1 * k2).sqrt();
        assert!((h(1e-4).eval(k1, k2).unwrap() - g).abs() < 1e-4);
        assert!((h(-1e-4).eval(k1, k2).unwrap() - g).abs() < 1e-4);
        assert!((h(1e-4).eval(-k1, -k2).unwrap() + g).abs() < 1e-4);
        assert!(h(0.5).eval(-1.0, 1.0).is_err());
        assert!(MeanCurvatureFunction::Geometric.eval(-1.0, 1.0).is_err());
    }

    #[test]
    fn coefficient_jets_match_finite_differences() {
        let s =
            builtin_surface(&SurfaceKind::EllipsoidTrig { a: 3.0, b: 2.0, c: 1.0, poles: Default::default() }).unwrap();
        for mean in [
            MeanCurvatureFunction::Harmonic,
            MeanCurvatureFunction::Geometric,
            MeanCurvatureFunction::PrincipalMax,
            MeanCurvatureFunction::Holder(0.5),
        ] {
            let field = QuadraticLineField::new(s.clone(), mean);
            let p = [0.7, 0.4];
            let (jets, ..) = field.coeff_jets(p).unwrap();
            let h = 1e-5;
            for k in 0..3 {
                let du = (field.coeffs([p[0] + h, p[1]]).unwrap()[k] - field.coeffs([p[0] - h, p[1]]).unwrap()[k])
                    / (2.0 * h);
                let dv = (field.coeffs([p[0], p[1] + h]).unwrap()[k] - field.coeffs([p[0], p[1] - h]).unwrap()[k])
                    / (2.0 * h);
                assert!((jets[k].partial(1, 0) - du).abs() < 1e-7, "{mean} {k}");
                assert!((jets[k].partial(0, 1) - dv).abs() < 1e-7, "{mean} {k}");
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for m in
            [MeanCurvatureFunction::Harmonic, MeanCurvatureFunction::PrincipalMax, MeanCurvatureFunction::Holder(-2.5)]
        {
            assert_eq!(m.to_string().parse::<MeanCurvatureFunction>().unwrap(), m);
        }
        assert!("holder:x".parse::<MeanCurvatureFunction>().is_err());
    }
}
