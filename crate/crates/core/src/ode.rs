//! Dormand-Prince 5(4) integrator for small complex systems with dense output.

use std::ops::ControlFlow;

use num_complex::Complex64;

/// Number of complex components in the integrated state.
pub const DIM: usize = 2;

pub type State = [Complex64; DIM];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step magnitude.
    pub h_min: f64,
    /// Largest admissible step magnitude.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_min: 1e-13,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub t1: f64,
    cont: [State; 5],
}

impl DenseSegment {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn start(&self) -> State {
        self.cont[0]
    }

    pub fn end(&self) -> State {
        let mut y = self.cont[0];
        for (yi, di) in y.iter_mut().zip(self.cont[1].iter()) {
            *yi += di;
        }
        y
    }

    /// Interpolated state at `t`, 4th-order accurate within the step.
    pub fn eval(&self, t: f64) -> State {
        let h = self.h();
        let s = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let s1 = 1.0 - s;
        let mut out = [Complex64::new(0.0, 0.0); DIM];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i] + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
        out
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        t >= lo && t <= hi
    }
}

/// Why integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeStop {
    /// Reached the requested final time.
    Finished,
    /// The step callback asked to stop.
    Interrupted,
    /// Step size fell below `h_min` at time `t`.
    StepUnderflow {
        t: f64,
    },
    /// Right-hand side returned a non-finite value at time `t`.
    NonFinite {
        t: f64,
    },
    MaxSteps {
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub stop: OdeStop,
    pub t: f64,
    pub y: State,
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (coef, k) in terms {
            acc += *coef * k[i];
        }
        *o += h * acc;
    }
    out
}

fn is_finite(y: &State) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn error_norm(err: &State, y: &State, y_new: &State, opts: &OdeOptions) -> f64 {
    let mut sum = 0.0;
    for i in 0..DIM {
        let sk = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
        sum += (err[i].norm() / sk).powi(2);
    }
    (sum / DIM as f64).sqrt()
}

fn initial_step<F>(rhs: &F, t0: f64, y0: &State, f0: &State, dir: f64, opts: &OdeOptions) -> f64
where
    F: Fn(f64, &State) -> State,
{
    let scale = |y: &State, i: usize| opts.atol + opts.rtol * y[i].norm();
    let (mut d0, mut d1) = (0.0f64, 0.0f64);
    for i in 0..DIM {
        d0 += (y0[i].norm() / scale(y0, i)).powi(2);
        d1 += (f0[i].norm() / scale(y0, i)).powi(2);
    }
    let (d0, d1) = ((d0 / DIM as f64).sqrt(), (d1 / DIM as f64).sqrt());
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(opts.h_max);
    let y1 = axpy(y0, &[(1.0, f0)], dir * h0);
    let f1 = rhs(t0 + dir * h0, &y1);
    let mut d2 = 0.0f64;
    for i in 0..DIM {
        d2 += ((f1[i] - f0[i]).norm() / scale(y0, i)).powi(2);
    }
    let d2 = (d2 / DIM as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.h_max)
}

/// Integrate `y' = rhs(t, y)` from `(t0, y0)` to `t_end` (either direction).
///
/// `on_step` sees every accepted step and may stop the integration by
/// returning `ControlFlow::Break(())`.
pub fn integrate<F, S>(
    rhs: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: S,
) -> OdeOutcome
where
    F: Fn(f64, &State) -> State,
    S: FnMut(&DenseSegment) -> ControlFlow<()>,
{
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;

    let mut t = t0;
    let mut y = y0;
    let outcome = |stop, t, y, accepted, rejected| OdeOutcome {
        stop,
        t,
        y,
        accepted,
        rejected,
    };
    if t_end == t0 {
        return outcome(OdeStop::Finished, t, y, 0, 0);
    }
    let dir = (t_end - t0).signum();
    let mut k1 = rhs(t, &y);
    if !is_finite(&k1) {
        return outcome(OdeStop::NonFinite { t }, t, y, 0, 0);
    }
    let mut h = initial_step(&rhs, t0, &y, &k1, dir, opts).max(opts.h_min);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let (mut accepted, mut rejected) = (0usize, 0usize);

    loop {
        if accepted + rejected >= opts.max_steps {
            return outcome(OdeStop::MaxSteps { t }, t, y, accepted, rejected);
        }
        let remaining = (t_end - t) * dir;
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let hs = dir * h;

        let k2 = rhs(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
        let k3 = rhs(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
        let k4 = rhs(
            t + C4 * hs,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
        );
        let k5 = rhs(
            t + C5 * hs,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
        );
        let k6 = rhs(
            t + hs,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                hs,
            ),
        );
        let y_new = axpy(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            hs,
        );
        let k7 = rhs(t + hs, &y_new);

        let stages_finite = [&k2, &k3, &k4, &k5, &k6, &k7, &y_new]
            .iter()
            .all(|k| is_finite(k));
        let err_norm = if stages_finite {
            let mut err = [Complex64::new(0.0, 0.0); DIM];
            for (i, e) in err.iter_mut().enumerate() {
                *e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            error_norm(&err, &y, &y_new, opts)
        } else {
            f64::INFINITY
        };

        if err_norm <= 1.0 {
            let mut cont = [[Complex64::new(0.0, 0.0); DIM]; 5];
            for i in 0..DIM {
                let ydiff = y_new[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - hs * k7[i] - bspl;
                cont[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t_new = if last { t_end } else { t + hs };
            let segment = DenseSegment {
                t0: t,
                t1: t_new,
                cont,
            };
            accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;

            if on_step(&segment).is_break() {
                return outcome(OdeStop::Interrupted, t, y, accepted, rejected);
            }
            if last {
                return outcome(OdeStop::Finished, t, y, accepted, rejected);
            }

            let fac11 = err_norm.powf(EXPO1);
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = err_norm.max(1e-4);
            let mut h_new = (h / fac).min(opts.h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            rejected += 1;
            last_rejected = true;
            let shrink = if err_norm.is_finite() {
                (err_norm.powf(EXPO1) / SAFE).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            h /= shrink;
            if h < opts.h_min {
                if !stages_finite {
                    return outcome(OdeStop::NonFinite { t }, t, y, accepted, rejected);
                }
                return outcome(OdeStop::StepUnderflow { t }, t, y, accepted, rejected);
            }
        }
    }
}
