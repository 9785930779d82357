//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor polynomial of a smooth function of two
//! variables about a base point, truncated at total degree `order <= 4`:
//!
//! ```text
//! f(u0 + du, v0 + dv) = sum_{i+j <= order} c[i,j] du^i dv^j
//! ```
//!
//! Arithmetic on jets is exact up to the truncation order, so evaluating a
//! closed-form parametrization on jet inputs yields its partial derivatives
//! to machine precision (forward-mode differentiation of every order at
//! once). Built-in surfaces are written once against this type.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest supported total degree.
pub const MAX_ORDER: usize = 4;
const LEN: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
const fn degree_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
    order: usize,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet").field("order", &self.order).field("coeffs", &&self.c[..degree_len(self.order)]).finish()
    }
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; LEN];
        c[0] = value;
        Self { c, order }
    }

    /// The coordinate function `u0 + du`.
    pub fn var_u(u0: f64, order: usize) -> Self {
        let mut j = Self::constant(u0, order);
        if order >= 1 {
            j.c[idx(1, 0)] = 1.0;
        }
        j
    }

    /// The coordinate function `v0 + dv`.
    pub fn var_v(v0: f64, order: usize) -> Self {
        let mut j = Self::constant(v0, order);
        if order >= 1 {
            j.c[idx(0, 1)] = 1.0;
        }
        j
    }

    /// Builds a jet from Taylor coefficients `c[i][j]` (degree i in du, j in dv).
    pub fn from_coeffs(order: usize, coeff: impl Fn(usize, usize) -> f64) -> Self {
        let mut j = Self::constant(0.0, order);
        for d in 0..=order {
            for b in 0..=d {
                j.c[idx(d - b, b)] = coeff(d - b, b);
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `du^i dv^j`; zero beyond the truncation order.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    /// Partial derivative `d^{i+j} f / du^i dv^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    /// Gradient `(f_u, f_v)` at the base point.
    pub fn gradient(&self) -> [f64; 2] {
        [self.coeff(1, 0), self.coeff(0, 1)]
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = Self::constant(0.0, order);
        let n = degree_len(order);
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    /// Evaluates the truncated polynomial at an offset from the base point.
    pub fn eval(&self, du: f64, dv: f64) -> f64 {
        let mut s = 0.0;
        for d in 0..=self.order {
            for b in 0..=d {
                s += self.c[idx(d - b, b)] * du.powi((d - b) as i32) * dv.powi(b as i32);
            }
        }
        s
    }

    /// `d/du`, lowering the order by one.
    pub fn d_u(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        Self::from_coeffs(order, |i, j| (i + 1) as f64 * self.c[idx(i + 1, j)])
    }

    /// `d/dv`, lowering the order by one.
    pub fn d_v(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        Self::from_coeffs(order, |i, j| (j + 1) as f64 * self.c[idx(i, j + 1)])
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for x in out.c[..degree_len(self.order)].iter_mut() {
            *x *= k;
        }
        out
    }

    fn zip(&self, rhs: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = Self::constant(0.0, order);
        for k in 0..degree_len(order) {
            out.c[k] = f(self.c[k], rhs.c[k]);
        }
        out
    }

    fn product(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = Self::constant(0.0, order);
        for d1 in 0..=order {
            for b1 in 0..=d1 {
                let x = self.c[idx(d1 - b1, b1)];
                if x == 0.0 {
                    continue;
                }
                for d2 in 0..=(order - d1) {
                    for b2 in 0..=d2 {
                        out.c[idx(d1 - b1 + d2 - b2, b1 + b2)] += x * rhs.c[idx(d2 - b2, b2)];
                    }
                }
            }
        }
        out
    }

    /// Applies a univariate function given its scaled derivatives
    /// `taylor[k] = f^(k)(a0) / k!` at the constant term `a0`.
    fn compose_univariate(&self, taylor: &[f64]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        // Horner in the nilpotent part.
        let mut out = Self::constant(taylor[self.order], self.order);
        for k in (0..self.order).rev() {
            out = out.product(&delta);
            out.c[0] += taylor[k];
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, x) in t.iter_mut().enumerate() {
            *x = (-1.0f64).powi(k as i32) / a0.powi(k as i32 + 1);
        }
        self.compose_univariate(&t)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powf(&self, r: f64) -> Self {
        let a0 = self.c[0];
        let mut t = [0.0; MAX_ORDER + 1];
        // generalized binomial coefficients times a0^(r-k)
        let mut binom = 1.0;
        for (k, x) in t.iter_mut().enumerate() {
            *x = binom * a0.powf(r - k as f64);
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        self.compose_univariate(&t)
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, x) in t.iter_mut().enumerate() {
            *x = e / factorial(k);
        }
        self.compose_univariate(&t)
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut t = [0.0; MAX_ORDER + 1];
        t[0] = a0.ln();
        for (k, x) in t.iter_mut().enumerate().skip(1) {
            *x = (-1.0f64).powi(k as i32 + 1) / (k as f64 * a0.powi(k as i32));
        }
        self.compose_univariate(&t)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [s, c, -s, -c];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, x) in t.iter_mut().enumerate() {
            *x = cycle[k % 4] / factorial(k);
        }
        self.compose_univariate(&t)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [c, -s, -c, s];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, x) in t.iter_mut().enumerate() {
            *x = cycle[k % 4] / factorial(k);
        }
        self.compose_univariate(&t)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0, self.order);
        for _ in 0..n {
            out = out.product(self);
        }
        out
    }

    /// Substitutes `du = s(x, y)`, `dv = t(x, y)` where `s` and `t` have
    /// vanishing constant terms. The result is a jet in `(x, y)` about 0.
    pub fn compose(&self, s: &Jet, t: &Jet) -> Self {
        debug_assert!(s.c[0] == 0.0 && t.c[0] == 0.0);
        let order = self.order.min(s.order).min(t.order);
        let mut spow = vec![Self::constant(1.0, order)];
        let mut tpow = vec![Self::constant(1.0, order)];
        for k in 1..=order {
            spow.push(spow[k - 1].product(s));
            tpow.push(tpow[k - 1].product(t));
        }
        let mut out = Self::constant(0.0, order);
        for d in 0..=order {
            for b in 0..=d {
                let ci = self.c[idx(d - b, b)];
                if ci != 0.0 {
                    out = out + spow[d - b].product(&tpow[b]).scale(ci);
                }
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.product(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

/// A vector of three jets, e.g. the Taylor expansion of an embedding.
pub type Jet3 = [Jet; 3];

pub fn dot3(a: &Jet3, b: &Jet3) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &Jet3, b: &Jet3) -> Jet3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
