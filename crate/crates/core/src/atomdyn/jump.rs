//! Quantum-jump (waiting-time) sampling of fluorescence photon emission times.
//!
//! Between jumps the amplitudes `(c_g, c_e)` evolve under the non-Hermitian
//! Hamiltonian
//!
//! ```text
//! dc_g/dt = i(Ω(t)/2) c_e
//! dc_e/dt = i(Ω(t)/2) c_g + (iΔ − β) c_e
//! ```
//!
//! so the survival probability `P = |c_g|² + |c_e|²` obeys
//! `dP/dt = −2β|c_e|²`. A photon is emitted when `P` first drops below a
//! fresh uniform draw; the atom is then reset to the ground state.

use rand::distr::Open01;
use rand::Rng;

use super::AtomParams;
use crate::error::require_positive;
use crate::ode::{trial_step, Dopri5, Tolerance, DEFAULT_TOL};
use crate::{Error, Result};

/// Dimensionless drive envelope, `Ω(t) = omega · amplitude(t)`, with values in
/// `[0, 1]`.
pub trait Envelope: Sync {
    fn amplitude(&self, t: f64) -> f64;

    /// Constant envelopes allow the no-jump evolution to be computed once and
    /// reused after every reset.
    fn is_constant(&self) -> bool {
        false
    }
}

impl<F: Fn(f64) -> f64 + Sync> Envelope for F {
    fn amplitude(&self, t: f64) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDrive(pub f64);

impl Envelope for ConstantDrive {
    fn amplitude(&self, _t: f64) -> f64 {
        self.0
    }

    fn is_constant(&self) -> bool {
        true
    }
}

/// Field amplitude of a Gaussian waist crossing, `exp(−4(t − center)²/t0²)`.
/// Its square is the intensity envelope `exp(−8(t − center)²/t0²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub center: f64,
    pub t0: f64,
}

impl Envelope for GaussianPulse {
    fn amplitude(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.t0;
        (-4.0 * x * x).exp()
    }
}

// State layout: [Re c_g, Im c_g, Re c_e, Im c_e].
const GROUND: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

// Relative slack allowed on the survival probability increasing between steps.
const MONOTONE_SLACK: f64 = 1e-9;

// Table construction stops once the survival probability is this small; rarer
// draws continue with direct integration.
const SURVIVAL_FLOOR: f64 = 1e-9;

#[inline]
fn survival(y: &[f64; 4]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

#[inline]
fn excited(y: &[f64; 4]) -> f64 {
    y[2] * y[2] + y[3] * y[3]
}

#[inline]
fn amplitude_rates(y: &[f64; 4], omega: f64, p: &AtomParams) -> [f64; 4] {
    let half = 0.5 * omega;
    let [a, b, c, d] = *y;
    [
        -half * d,
        half * c,
        -half * b - p.delta * d - p.beta * c,
        half * a + p.delta * c - p.beta * d,
    ]
}

fn draw_target<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

fn check_monotone(before: f64, after: f64, t: f64) -> Result<()> {
    if after > before * (1.0 + MONOTONE_SLACK) + 1e-15 {
        Err(Error::NumericFailure(format!(
            "survival probability increased from {before} to {after} at t = {t}"
        )))
    } else {
        Ok(())
    }
}

/// Locate `s ∈ (0, h]` where the survival after a single step of size `s`
/// from `(t, y, dy)` equals `target`, to within `resolution`.
#[allow(clippy::too_many_arguments)]
fn bisect_crossing<F>(
    rhs: &F,
    t: f64,
    y: &[f64; 4],
    dy: &[f64; 4],
    h: f64,
    target: f64,
    resolution: f64,
    tol: Tolerance,
) -> f64
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    let mut lo = 0.0;
    let mut hi = h;
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if survival(&trial_step(rhs, t, y, dy, mid, tol).y) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Integrate forward from the integrator's current state until the survival
/// drops to `target` or `limit` is reached. On a crossing the integrator is
/// left just before the crossing step and the crossing time is returned.
fn integrate_to_crossing<F>(
    ode: &mut Dopri5<F, 4>,
    target: f64,
    limit: f64,
    resolution: f64,
) -> Result<Option<f64>>
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    while ode.t() < limit {
        let t_prev = ode.t();
        let y_prev = *ode.y();
        let dy_prev = *ode.dy();
        let before = survival(&y_prev);
        let h = ode.step(limit)?;
        let after = survival(ode.y());
        check_monotone(before, after, ode.t())?;
        if after <= target {
            let tol = ode.tol();
            let s = bisect_crossing(
                ode.rhs(),
                t_prev,
                &y_prev,
                &dy_prev,
                h,
                target,
                resolution,
                tol,
            );
            return Ok(Some(t_prev + s));
        }
    }
    Ok(None)
}

/// Sample photon emission times in `[0, duration)` for an atom that starts in
/// the ground state at `t = 0` and is driven with `Ω(t) = omega·envelope(t)`.
pub fn sample_emission_times<E, R>(
    p: &AtomParams,
    envelope: &E,
    duration: f64,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    E: Envelope + ?Sized,
    R: Rng + ?Sized,
{
    p.validate()?;
    require_positive("duration", duration)?;
    if p.omega == 0.0 {
        return Ok(Vec::new());
    }
    if envelope.is_constant() {
        return JumpSampler::new(p, envelope.amplitude(0.0), duration)?.sample(duration, rng);
    }

    let rhs = |t: f64, y: &[f64; 4]| amplitude_rates(y, p.omega * envelope.amplitude(t), p);
    let mut ode = Dopri5::new(rhs, 0.0, GROUND, p.step_hint(), DEFAULT_TOL);
    let resolution = 1e-12 * duration;
    let mut times = Vec::new();
    loop {
        let target = draw_target(rng);
        match integrate_to_crossing(&mut ode, target, duration, resolution)? {
            Some(t) if t < duration => {
                times.push(t);
                ode.reset_state(t, GROUND);
            }
            _ => break,
        }
    }
    Ok(times)
}

struct TableStep {
    t: f64,
    y: [f64; 4],
    dy: [f64; 4],
    h: f64,
    survival_end: f64,
}

/// Emission-time sampler for a constant drive.
///
/// After every jump the atom restarts from the ground state, so the no-jump
/// evolution is the same function of the time since the last reset. It is
/// integrated once and the accepted steps are kept; each waiting time is then
/// found by a binary search over the steps and bisection inside one step.
pub struct JumpSampler {
    params: AtomParams,
    omega: f64,
    steps: Vec<TableStep>,
    end_t: f64,
    end_y: [f64; 4],
}

impl JumpSampler {
    /// Precompute the no-jump evolution for drive `level·omega` up to
    /// `horizon` (or until the survival probability becomes negligible).
    pub fn new(p: &AtomParams, level: f64, horizon: f64) -> Result<Self> {
        p.validate()?;
        require_positive("horizon", horizon)?;
        let omega = p.omega * level;
        let rhs = |_t: f64, y: &[f64; 4]| amplitude_rates(y, omega, p);
        let mut ode = Dopri5::new(rhs, 0.0, GROUND, p.step_hint(), DEFAULT_TOL);
        let mut steps = Vec::new();
        let mut last = 1.0;
        while ode.t() < horizon && last > SURVIVAL_FLOOR {
            let t = ode.t();
            let y = *ode.y();
            let dy = *ode.dy();
            let h = ode.step(horizon)?;
            let s = survival(ode.y());
            check_monotone(last, s, ode.t())?;
            steps.push(TableStep {
                t,
                y,
                dy,
                h,
                survival_end: s,
            });
            last = s;
        }
        Ok(JumpSampler {
            params: *p,
            omega,
            steps,
            end_t: ode.t(),
            end_y: *ode.y(),
        })
    }

    fn rhs(&self) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
        move |_t, y| amplitude_rates(y, self.omega, &self.params)
    }

    /// Waiting time from a reset until the survival equals `target`, if it
    /// is shorter than `limit`.
    fn waiting_time(&self, target: f64, limit: f64, resolution: f64) -> Result<Option<f64>> {
        let rhs = self.rhs();
        let end_survival = self.steps.last().map_or(1.0, |s| s.survival_end);
        let s = if end_survival <= target {
            let i = self.steps.partition_point(|s| s.survival_end > target);
            let st = &self.steps[i];
            st.t + bisect_crossing(
                &rhs,
                st.t,
                &st.y,
                &st.dy,
                st.h,
                target,
                resolution,
                DEFAULT_TOL,
            )
        } else if self.end_t >= limit {
            return Ok(None);
        } else {
            let mut ode = Dopri5::new(
                rhs,
                self.end_t,
                self.end_y,
                self.params.step_hint(),
                DEFAULT_TOL,
            );
            match integrate_to_crossing(&mut ode, target, limit, resolution)? {
                Some(s) => s,
                None => return Ok(None),
            }
        };
        Ok((s < limit).then_some(s))
    }

    /// Emission times in `[0, duration)`, starting from the ground state.
    pub fn sample<R: Rng + ?Sized>(&self, duration: f64, rng: &mut R) -> Result<Vec<f64>> {
        require_positive("duration", duration)?;
        let mut times = Vec::new();
        if self.omega == 0.0 {
            return Ok(times);
        }
        let resolution = 1e-12 * duration;
        let mut t = 0.0;
        loop {
            let target = draw_target(rng);
            match self.waiting_time(target, duration - t, resolution)? {
                Some(s) => {
                    t += s;
                    if t >= duration {
                        break;
                    }
                    times.push(t);
                }
                None => break,
            }
        }
        Ok(times)
    }
}

/// Survival probability and excited population along the no-jump evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoJumpPoint {
    pub survival: f64,
    pub excited: f64,
}

/// No-jump evolution from the ground state at `grid[0]`, sampled on `grid`.
pub fn no_jump_trajectory<E: Envelope + ?Sized>(
    p: &AtomParams,
    envelope: &E,
    grid: &[f64],
) -> Result<Vec<NoJumpPoint>> {
    p.validate()?;
    let Some(&t_start) = grid.first() else {
        return Ok(Vec::new());
    };
    super::check_ascending(grid)?;
    let rhs = |t: f64, y: &[f64; 4]| amplitude_rates(y, p.omega * envelope.amplitude(t), p);
    let mut ode = Dopri5::new(rhs, t_start, GROUND, p.step_hint(), DEFAULT_TOL);
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        ode.advance_to(t)?;
        out.push(NoJumpPoint {
            survival: survival(ode.y()),
            excited: excited(ode.y()),
        });
    }
    Ok(out)
}
