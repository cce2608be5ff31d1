//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size real systems.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

pub(crate) const DEFAULT_TOL: Tolerance = Tolerance {
    rel: 1e-9,
    abs: 1e-12,
};

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

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 50_000_000;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Result of one trial step.
pub(crate) struct Trial<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the end point (first-same-as-last).
    pub dy: [f64; N],
    /// Weighted RMS error estimate; the step is acceptable when <= 1.
    pub err: f64,
}

/// One Dormand–Prince step of size `h` from `(t, y)` with `k1 = f(t, y)`.
pub(crate) fn trial_step<F, const N: usize>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: Tolerance,
) -> Trial<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(t + h, &y5);

    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
        sum += (e / scale).powi(2);
    }
    Trial {
        y: y5,
        dy: k7,
        err: (sum / N as f64).sqrt(),
    }
}

/// Adaptive integrator state. Time only moves forward.
pub(crate) struct Dopri5<F, const N: usize> {
    f: F,
    tol: Tolerance,
    t: f64,
    y: [f64; N],
    dy: [f64; N],
    h: f64,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    /// `h0` is only a first guess; the controller adapts it.
    pub fn new(f: F, t: f64, y: [f64; N], h0: f64, tol: Tolerance) -> Self {
        let dy = f(t, &y);
        Dopri5 {
            f,
            tol,
            t,
            y,
            dy,
            h: h0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn dy(&self) -> &[f64; N] {
        &self.dy
    }

    pub fn rhs(&self) -> &F {
        &self.f
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    /// Replace the state at the current time (used for quantum-jump resets).
    pub fn reset_state(&mut self, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
        self.dy = (self.f)(t, &y);
    }

    /// Take one accepted step that does not pass `t_limit`. Returns the step
    /// size that was taken.
    pub fn step(&mut self, t_limit: f64) -> Result<f64> {
        let span = t_limit - self.t;
        if span <= 0.0 {
            return Ok(0.0);
        }
        let h_min = 1e-14 * self.t.abs().max(span);
        loop {
            let mut h = self.h.min(span);
            let last = h >= span;
            if last {
                h = span;
            }
            let trial = trial_step(&self.f, self.t, &self.y, &self.dy, h, self.tol);
            if !trial.err.is_finite() || trial.y.iter().any(|v| !v.is_finite()) {
                self.h = 0.25 * h;
            } else if trial.err <= 1.0 {
                let grow = if trial.err == 0.0 {
                    5.0
                } else {
                    (0.9 * trial.err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // Keep the free-running step size when the limit clipped it.
                if !last || h == self.h {
                    self.h = h * grow;
                }
                self.t = if last { t_limit } else { self.t + h };
                self.y = trial.y;
                self.dy = trial.dy;
                return Ok(h);
            } else {
                self.h = h * (0.9 * trial.err.powf(-0.2)).clamp(0.2, 1.0);
            }
            if self.h < h_min {
                return Err(Error::NumericFailure(format!(
                    "step size underflow at t = {}",
                    self.t
                )));
            }
        }
    }

    /// Integrate exactly to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let mut n = 0;
        while self.t < t_end {
            self.step(t_end)?;
            n += 1;
            if n > MAX_STEPS {
                return Err(Error::NumericFailure("too many integration steps".into()));
            }
        }
        Ok(())
    }
}
