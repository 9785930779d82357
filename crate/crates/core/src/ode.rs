//! Dormand-Prince 5(4) integrator with PI step control and dense output.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h0: 1e-3, h_min: 1e-14, h_max: 0.1, max_steps: 1_000_000 }
    }
}

/// An accepted step, with the stage derivatives needed for dense output.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    k: [[f64; N]; 7],
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
/// Dense-output coefficients (Shampine).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

impl<const N: usize> Step<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Fourth-order continuous extension on `[t0, t1]`.
    pub fn dense(&self, t: f64) -> [f64; N] {
        let h = self.h();
        let th = if h != 0.0 { (t - self.t0) / h } else { 0.0 };
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for i in 0..N {
            let dy = self.y1[i] - self.y0[i];
            let bspl = h * self.k[0][i] - dy;
            let r3 = dy - h * self.k[6][i] - bspl;
            let mut r4 = 0.0;
            for s in 0..7 {
                r4 += D[s] * self.k[s][i];
            }
            r4 *= h;
            out[i] = self.y0[i] + th * (dy + th1 * (bspl + th * (r3 + th1 * r4)));
        }
        out
    }

    /// Derivative at the step end.
    pub fn f1(&self) -> [f64; N] {
        self.k[6]
    }

    pub fn f0(&self) -> [f64; N] {
        self.k[0]
    }
}

/// What the integrator should do after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control<const N: usize> {
    Continue,
    Stop,
    /// Restart from a modified state (the step is kept, the state replaced).
    Reset(f64, [f64; N]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeStatus {
    Finished,
    Stopped,
    StepUnderflow,
    MaxSteps,
    /// The right-hand side refused to evaluate.
    RhsFailed,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOutcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub status: OdeStatus,
    pub steps: usize,
}

fn err_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end` (either direction).
/// `f` returning `None` is treated as leaving the domain of the field:
/// the step is shrunk, and the run ends with `RhsFailed` if the step
/// underflows.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: S,
) -> OdeOutcome<N>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
    S: FnMut(&Step<N>) -> Control<N>,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut steps = 0;
    let Some(mut k0) = f(t, &y) else {
        return OdeOutcome { t, y, status: OdeStatus::RhsFailed, steps };
    };
    let mut h = opts.h0.abs().min(opts.h_max).max(opts.h_min) * dir;
    let mut err_prev = 1e-4f64;
    let mut rhs_failed = false;
    loop {
        if (t_end - t) * dir <= 0.0 {
            return OdeOutcome { t, y, status: OdeStatus::Finished, steps };
        }
        if steps >= opts.max_steps {
            return OdeOutcome { t, y, status: OdeStatus::MaxSteps, steps };
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < opts.h_min {
            let status = if rhs_failed { OdeStatus::RhsFailed } else { OdeStatus::StepUnderflow };
            return OdeOutcome { t, y, status, steps };
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        let mut ok = true;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                ys[i] += h * acc;
            }
            match f(t + C[s] * h, &ys) {
                Some(v) if v.iter().all(|x| x.is_finite()) => k[s] = v,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            rhs_failed = true;
            h *= 0.25;
            continue;
        }
        let mut y1 = y;
        for i in 0..N {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += A[6][j] * k[j][i];
            }
            y1[i] += h * acc;
        }
        let mut errv = [0.0; N];
        for i in 0..N {
            let mut acc = 0.0;
            for j in 0..7 {
                acc += E[j] * k[j][i];
            }
            errv[i] = h * acc;
        }
        let err = err_norm(&errv, &y, &y1, opts);
        if !err.is_finite() || err > 1.0 {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= fac;
            continue;
        }
        rhs_failed = false;
        steps += 1;
        let step = Step { t0: t, t1: t + h, y0: y, y1, k };
        // PI controller
        let e = err.max(1e-10);
        let fac = (0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
        err_prev = e;
        t += h;
        y = y1;
        k0 = k[6];
        h = (h * fac).abs().min(opts.h_max) * dir;
        match on_step(&step) {
            Control::Continue => {}
            Control::Stop => return OdeOutcome { t, y, status: OdeStatus::Stopped, steps },
            Control::Reset(tn, yn) => {
                t = tn;
                y = yn;
                match f(t, &y) {
                    Some(v) => k0 = v,
                    None => return OdeOutcome { t, y, status: OdeStatus::RhsFailed, steps },
                }
            }
        }
    }
}

/// Locates a sign change of `g` inside an accepted step by bisection on
/// the dense output. Returns `(t, y)` at the root.
pub fn locate_event<const N: usize>(
    step: &Step<N>,
    mut g: impl FnMut(f64, &[f64; N]) -> f64,
    tol: f64,
) -> Option<(f64, [f64; N])> {
    let (mut a, mut b) = (step.t0, step.t1);
    let mut ga = g(a, &step.y0);
    let gb = g(b, &step.y1);
    if !(ga * gb <= 0.0) {
        return None;
    }
    if ga == 0.0 {
        return Some((a, step.y0));
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(m, &step.dense(m));
        if gm == 0.0 {
            return Some((m, step.dense(m)));
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    let t = 0.5 * (a + b);
    Some((t, step.dense(t)))
}
