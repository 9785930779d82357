use crate::error::Result;
use crate::mean_field::QuadraticLineField;
use crate::surface::{ChartPoint, CurvatureData, FundamentalForms};
use serde::{Deserialize, Serialize};

/// A point `(x, y, p)` on the Lie-Cartan surface `Lc p^2 + Mc p + Nc = 0`,
/// `p = dy/dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub x: f64,
    pub y: f64,
    pub p: f64,
}

/// `H(x, y, p)` and its first partials.
#[derive(Debug, Clone, Copy)]
pub struct LiftValue {
    pub h: f64,
    pub hx: f64,
    pub hy: f64,
    pub hp: f64,
}

pub fn lift_value(field: &QuadraticLineField, lp: LiftedPoint) -> Result<LiftValue> {
    let ([l, m, n], ..) = field.coeff_jets([lp.x, lp.y])?;
    let p = lp.p;
    let at = |i, j| l.partial(i, j) * p * p + m.partial(i, j) * p + n.partial(i, j);
    Ok(LiftValue { h: at(0, 0), hx: at(1, 0), hy: at(0, 1), hp: 2.0 * l.value() * p + m.value() })
}

/// Lie-Cartan vector field `(H_p, p H_p, -(H_x + p H_y))`, tangent to `H = 0`.
pub fn lie_cartan_field(field: &QuadraticLineField, lp: LiftedPoint) -> Result<[f64; 3]> {
    let v = lift_value(field, lp)?;
    Ok([v.hp, lp.p * v.hp, -(v.hx + lp.p * v.hy)])
}

/// The lifted equation in the angle fibre, `H(u, v, phi)` for the direction
/// `(cos phi, sin phi)`, with partials and the pointwise geometry.
#[derive(Debug, Clone, Copy)]
pub struct AngleLift {
    pub h: f64,
    pub hu: f64,
    pub hv: f64,
    pub hphi: f64,
    /// Largest coefficient magnitude, for relative tests.
    pub scale: f64,
    pub coeffs: [f64; 3],
    pub forms: FundamentalForms,
    pub curv: CurvatureData,
}

pub fn angle_lift(field: &QuadraticLineField, p: ChartPoint, phi: f64) -> Result<AngleLift> {
    let ([l, m, n], forms, curv) = field.coeff_jets(p)?;
    let (s, c) = phi.sin_cos();
    let (ss, sc, cc) = (s * s, s * c, c * c);
    let at = |i, j| l.partial(i, j) * ss + m.partial(i, j) * sc + n.partial(i, j) * cc;
    let (lv, mv, nv) = (l.value(), m.value(), n.value());
    Ok(AngleLift {
        h: at(0, 0),
        hu: at(1, 0),
        hv: at(0, 1),
        hphi: 2.0 * (lv - nv) * sc + mv * (cc - ss),
        scale: lv.abs().max(mv.abs()).max(nv.abs()),
        coeffs: [lv, mv, nv],
        forms,
        curv,
    })
}

impl AngleLift {
    /// Chart velocity and angle rate for unit metric speed along
    /// `(cos phi, sin phi)`: the lifted field divided by `H_phi`.
    pub fn unit_speed_rate(&self, phi: f64) -> [f64; 3] {
        let w = [phi.cos(), phi.sin()];
        let speed = self.forms.norm(w);
        let num = self.hu * w[0] + self.hv * w[1];
        [w[0] / speed, w[1] / speed, -num / (self.hphi * speed)]
    }

    /// `|H_phi| / (|H_phi| + |H_u cos + H_v sin|)`; small near a fold
    /// where the projected curve has a cusp.
    pub fn fold_ratio(&self, phi: f64) -> f64 {
        let num = (self.hu * phi.cos() + self.hv * phi.sin()).abs();
        let den = self.hphi.abs();
        if num + den == 0.0 {
            1.0
        } else {
            den / (num + den)
        }
    }
}

/// Roots of `Lc sin^2 + Mc sin cos + Nc cos^2 = 0` as angles in `(-pi, pi]`.
pub fn root_angles(coeffs: [f64; 3]) -> Vec<f64> {
    let [l, m, n] = coeffs;
    let scale = l.abs().max(m.abs()).max(n.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let (l, m, n) = (l / scale, m / scale, n / scale);
    let disc = m * m - 4.0 * l * n;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (m + sq.copysign(if m == 0.0 { 1.0 } else { m }));
    if n.abs() >= l.abs() {
        // cot phi solves n c^2 + m c + l = 0
        let c1 = q / n;
        let c2 = if q != 0.0 { l / q } else { -c1 };
        vec![1f64.atan2(c1), 1f64.atan2(c2)]
    } else {
        // tan phi solves l t^2 + m t + n = 0
        let t1 = q / l;
        let t2 = if q != 0.0 { n / q } else { -t1 };
        vec![t1.atan(), t2.atan()]
    }
}

/// The representative of `root` modulo `pi` nearest to `phi`.
pub fn nearest_mod_pi(phi: f64, root: f64) -> f64 {
    let pi = std::f64::consts::PI;
    root + ((phi - root) / pi).round() * pi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{builtin_surface, SurfaceKind};

    fn parabolic(a: f64) -> QuadraticLineField {
        QuadraticLineField::harmonic(
            builtin_surface(&SurfaceKind::MongeParabolic { k: 1.0, a, b: 0.7, c: 0.3, d: 0.4, quartic: [0.0; 5] })
                .unwrap(),
        )
    }

    #[test]
    fn lie_cartan_regular_and_singular_at_parabolic_origin() {
        let origin = LiftedPoint { x: 0.0, y: 0.0, p: 0.0 };
        let regular = lie_cartan_field(&parabolic(1.5), origin).unwrap();
        assert!(regular.iter().map(|x| x.abs()).fold(0.0, f64::max) > 1e-3);
        let v = lift_value(&parabolic(1.5), origin).unwrap();
        assert!(v.h.abs() < 1e-14 && v.hp.abs() < 1e-14);
        let singular = lie_cartan_field(&parabolic(0.0), origin).unwrap();
        assert!(singular.iter().all(|x| x.abs() < 1e-12), "{singular:?}");
    }

    #[test]
    fn roots_solve_the_equation() {
        for c in [[1.0, 0.3, -2.0], [0.0, 1.0, 0.0], [1e-9, 2.0, -1.0], [-3.0, 0.0, 1.0]] {
            let roots = root_angles(c);
            assert_eq!(roots.len(), 2);
            for phi in roots {
                let (s, co) = phi.sin_cos();
                assert!((c[0] * s * s + c[1] * s * co + c[2] * co * co).abs() < 1e-12, "{c:?}");
            }
        }
        assert!(root_angles([1.0, 0.0, 1.0]).is_empty());
    }
}
