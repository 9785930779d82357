//! Double-exponential (tanh-sinh) quadrature for integrands with endpoint
//! singularities.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub levels: usize,
    pub evaluations: usize,
}

const MAX_LEVEL: usize = 12;

/// Integrates `f` over `[a, b]`. The integrand receives the abscissa and its
/// distances to both endpoints, computed without cancellation, so that
/// factors like `sqrt(x - a)` can be formed accurately near the ends.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    let half = 0.5 * (b - a);
    let mut evaluations = 0usize;
    // one abscissa pair at parameter t, mirrored about the midpoint
    let mut pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let w = half * FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        // distance from the nearer endpoint: (b - a) / (1 + e^{2|u|})
        let near = (b - a) / (1.0 + (2.0 * u.abs()).exp());
        if near == 0.0 {
            return 0.0;
        }
        let far = (b - a) - near;
        let left = f(a + near, near, far);
        let right = if t == 0.0 { 0.0 } else { f(b - near, far, near) };
        evaluations += if t == 0.0 { 1 } else { 2 };
        w * (left + right)
    };
    // abscissae reach the endpoints to within the smallest normal numbers
    let t_max = 6.2;
    let mut h = 0.5;
    let mut sum = pair(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut prev = h * sum;
    if !prev.is_finite() {
        return Err(Error::Quadrature("non-finite integrand".into()));
    }
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let cur = h * sum;
        if !cur.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        let error = (cur - prev).abs();
        if level >= 3 && error <= tol * cur.abs().max(1.0) {
            return Ok(Quadrature { value: cur, error, levels: level, evaluations });
        }
        prev = cur;
        if level == MAX_LEVEL {
            return Err(Error::Quadrature(format!("no convergence: estimate {cur}, change {error}")));
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_endpoint_singularities() {
        let q = tanh_sinh(|x, _, _| x * x, 0.0, 3.0, 1e-14).unwrap();
        assert!((q.value - 9.0).abs() < 1e-13);
        // int_0^1 x^{-1/2} = 2
        let q = tanh_sinh(|_, l, _| 1.0 / l.sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12, "{q:?}");
        // int_{-1}^{1} (1 - x^2)^{-1/2} = pi
        let q = tanh_sinh(|_, l, r| 1.0 / (l * r).sqrt(), -1.0, 1.0, 1e-13).unwrap();
        assert!((q.value - std::f64::consts::PI).abs() < 1e-12, "{q:?}");
        assert!(q.error < 1e-10);
    }

    #[test]
    fn log_singularity() {
        // int_0^1 ln x = -1
        let q = tanh_sinh(|_, l, _| l.ln(), 0.0, 1.0, 1e-13).unwrap();
        assert!((q.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(tanh_sinh(|x, _, _| x, 1.0, 1.0, 1e-10).is_err());
    }
}
