use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::{ChartPoint, SurfacePatch};
use crate::vec3::Vec3;

/// Orthonormal frame `(e1, e2, n)` of 3-space at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub n: Vec3,
}

/// Inverts `(x, y) = (X(du, dv), Y(du, dv))` as jets with vanishing
/// constant terms, returning `(du, dv)` as jets in `(x, y)`.
pub fn invert_map(x: &Jet, y: &Jet) -> Result<(Jet, Jet)> {
    let order = x.order().min(y.order());
    let [a, b] = x.gradient();
    let [c, d] = y.gradient();
    let det = a * d - b * c;
    if det.abs() < 1e-14 * (a.abs() + b.abs()) * (c.abs() + d.abs()) || det == 0.0 {
        return Err(Error::DegenerateJet { u: 0.0, v: 0.0, det });
    }
    let lin = |j: &Jet| {
        let g = j.gradient();
        Jet::var_u(0.0, order) * g[0] + Jet::var_v(0.0, order) * g[1]
    };
    let nx = *x - lin(x);
    let ny = *y - lin(y);
    let xs = Jet::var_u(0.0, order);
    let ys = Jet::var_v(0.0, order);
    let solve = |rx: Jet, ry: Jet| ((rx * d - ry * b) * (1.0 / det), (ry * a - rx * c) * (1.0 / det));
    let (mut p, mut q) = solve(xs, ys);
    for _ in 1..order {
        let rx = xs - nx.compose(&p, &q);
        let ry = ys - ny.compose(&p, &q);
        (p, q) = solve(rx, ry);
    }
    Ok((p, q))
}

/// Height of the surface over its tangent plane at `p`, as a jet in the
/// frame coordinates `(x, y)` along `(e1, e2)`, with `z` along `n`.
pub fn graph_jet(patch: &SurfacePatch, p: ChartPoint, frame: &TangentFrame, order: usize) -> Result<Jet> {
    let a = patch.expand(p, order);
    let rel = |w: Vec3| {
        let mut j = a[0] * w.x + a[1] * w.y + a[2] * w.z;
        let c0 = j.value();
        j = j - c0;
        j
    };
    let x = rel(frame.e1);
    let y = rel(frame.e2);
    let z = rel(frame.n);
    let (du, dv) = invert_map(&x, &y)?;
    Ok(z.compose(&du, &dv))
}

/// A positive frame with `e1` along the push-forward of `w`.
pub fn frame_along(patch: &SurfacePatch, p: ChartPoint, w: [f64; 2]) -> Result<TangentFrame> {
    let n = patch.normal(p).ok_or(Error::DegenerateJet { u: p[0], v: p[1], det: 0.0 })?;
    let e1 =
        patch.push_forward(p, w).normalized().ok_or_else(|| Error::InvalidParameters("zero tangent vector".into()))?;
    Ok(TangentFrame { e1, e2: n.cross(e1), n })
}
