//! Two-level atom internal dynamics.
//!
//! Conventions: `u = ρ_eg + ρ_ge`, `v = i(ρ_ge − ρ_eg)`, `w = ρ_ee − ρ_gg`.
//! The transverse (dipole) decay rate is `β` and the population decay rate is
//! fixed at `γ = 2β`, i.e. the broadening is purely radiative:
//!
//! ```text
//! du/dt = −β u + Δ v
//! dv/dt = −Δ u − β v − Ω w
//! dw/dt =  Ω v − 2β (w + 1)
//! ```

mod jump;

pub use jump::{
    no_jump_trajectory, sample_emission_times, ConstantDrive, Envelope, GaussianPulse, JumpSampler,
    NoJumpPoint,
};

use crate::error::{require_finite, require_nonnegative, require_positive};
use crate::ode::{Dopri5, DEFAULT_TOL};
use crate::{Error, Result};

/// Drive and decay parameters of a two-level atom. Rates in 1/s (or any
/// consistent unit of inverse time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    /// Transverse decay rate β.
    pub beta: f64,
    /// Rabi frequency Ω.
    pub omega: f64,
    /// Laser detuning Δ.
    pub delta: f64,
}

impl AtomParams {
    pub fn new(beta: f64, omega: f64, delta: f64) -> Result<Self> {
        let p = AtomParams { beta, omega, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn resonant(beta: f64, omega: f64) -> Result<Self> {
        Self::new(beta, omega, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("beta", self.beta)?;
        require_nonnegative("omega", self.omega)?;
        require_finite("delta", self.delta)
    }

    /// Ω′ = sqrt(Ω² + Δ²).
    pub fn generalized_rabi(&self) -> f64 {
        self.omega.hypot(self.delta)
    }

    /// Spontaneous emission rate γ = 2β.
    pub fn emission_rate_constant(&self) -> f64 {
        2.0 * self.beta
    }

    /// Photon emission rate in steady state, `2β ρ_ee^ss`.
    pub fn steady_emission_rate(&self) -> f64 {
        self.emission_rate_constant() * steady_state(self).excited_population()
    }

    fn step_hint(&self) -> f64 {
        0.05 / (self.beta + self.omega + self.delta.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState {
        u: 0.0,
        v: 0.0,
        w: -1.0,
    };

    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.w)
    }

    /// Squared length of the Bloch vector; 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.u * self.u + self.v * self.v + self.w * self.w
    }

    fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    fn from_slice(y: &[f64]) -> Self {
        BlochState {
            u: y[0],
            v: y[1],
            w: y[2],
        }
    }
}

/// Time derivative of the Bloch vector. The returned value holds
/// `(du/dt, dv/dt, dw/dt)`.
pub fn bloch_derivative(s: &BlochState, p: &AtomParams) -> BlochState {
    bloch_rates(s.u, s.v, s.w, p.omega, p)
}

#[inline]
fn bloch_rates(u: f64, v: f64, w: f64, omega: f64, p: &AtomParams) -> BlochState {
    BlochState {
        u: -p.beta * u + p.delta * v,
        v: -p.delta * u - p.beta * v - omega * w,
        w: omega * v - 2.0 * p.beta * (w + 1.0),
    }
}

/// Closed-form fixed point of [`bloch_derivative`].
pub fn steady_state(p: &AtomParams) -> BlochState {
    let damp = p.beta * p.beta + p.delta * p.delta;
    let w = -2.0 * damp / (p.omega * p.omega + 2.0 * damp);
    let v = -p.omega * p.beta * w / damp;
    let u = p.delta * v / p.beta;
    BlochState { u, v, w }
}

/// Integrate the Bloch equations with drive `Ω(t) = omega·envelope(t)`,
/// starting from `start` at `grid[0]`, and return the state at every grid
/// point. `grid` must be ascending.
pub fn bloch_trajectory<E: Envelope + ?Sized>(
    p: &AtomParams,
    envelope: &E,
    start: BlochState,
    grid: &[f64],
) -> Result<Vec<BlochState>> {
    p.validate()?;
    let Some(&t_start) = grid.first() else {
        return Ok(Vec::new());
    };
    check_ascending(grid)?;
    let rhs = |t: f64, y: &[f64; 3]| {
        bloch_rates(y[0], y[1], y[2], p.omega * envelope.amplitude(t), p).to_array()
    };
    let mut ode = Dopri5::new(rhs, t_start, start.to_array(), p.step_hint(), DEFAULT_TOL);
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        ode.advance_to(t)?;
        out.push(BlochState::from_slice(ode.y()));
    }
    Ok(out)
}

/// Mean number of photons emitted in `[0, duration]` by an atom that starts in
/// the ground state and is driven with `Ω(t) = omega·envelope(t)`.
pub fn expected_emissions<E: Envelope + ?Sized>(
    p: &AtomParams,
    envelope: &E,
    duration: f64,
) -> Result<f64> {
    p.validate()?;
    require_nonnegative("duration", duration)?;
    let rhs = |t: f64, y: &[f64; 4]| {
        let d = bloch_rates(y[0], y[1], y[2], p.omega * envelope.amplitude(t), p);
        [d.u, d.v, d.w, p.beta * (1.0 + y[2])]
    };
    let mut ode = Dopri5::new(rhs, 0.0, [0.0, 0.0, -1.0, 0.0], p.step_hint(), DEFAULT_TOL);
    ode.advance_to(duration)?;
    Ok(ode.y()[3])
}

/// Single-atom intensity correlation sampled on a lag grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomCorrelation {
    pub tau_grid: Vec<f64>,
    pub g2: Vec<f64>,
}

/// `g_A²(τ) = ρ_ee(τ) / ρ_ee^ss` for an atom re-prepared in the ground state
/// at τ = 0 (quantum regression for resonance fluorescence).
pub fn g2_atom(p: &AtomParams, tau_grid: &[f64]) -> Result<AtomCorrelation> {
    p.validate()?;
    match tau_grid.first() {
        Some(0.0) => {}
        _ => {
            return Err(Error::invalid(
                "tau_grid",
                "must be non-empty and start at 0",
            ))
        }
    }
    let rho_ss = steady_state(p).excited_population();
    if rho_ss <= 0.0 {
        return Err(Error::Undefined(
            "g_A² needs a nonzero steady-state intensity (omega = 0)".into(),
        ));
    }
    let states = bloch_trajectory(p, &ConstantDrive(1.0), BlochState::GROUND, tau_grid)?;
    Ok(AtomCorrelation {
        tau_grid: tau_grid.to_vec(),
        g2: states
            .iter()
            .map(|s| s.excited_population() / rho_ss)
            .collect(),
    })
}

/// Resonant strong-driving closed form
/// `1 − e^{−3βτ/2} [cos μτ + (3β/2μ) sin μτ]` with `μ = sqrt(Ω² − β²/4)`.
pub fn g2_atom_closed_form(p: &AtomParams, tau: f64) -> Result<f64> {
    p.validate()?;
    if p.delta != 0.0 {
        return Err(Error::invalid("delta", "closed form requires delta = 0"));
    }
    if p.omega <= 0.5 * p.beta {
        return Err(Error::invalid(
            "omega",
            "closed form requires omega > beta/2 (underdamped regime)",
        ));
    }
    let mu = (p.omega * p.omega - 0.25 * p.beta * p.beta).sqrt();
    let tau = tau.abs();
    let damp = (-1.5 * p.beta * tau).exp();
    Ok(1.0 - damp * ((mu * tau).cos() + 1.5 * p.beta / mu * (mu * tau).sin()))
}

pub(crate) fn check_ascending(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("tau_grid", "values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("tau_grid", "must be ascending"));
    }
    Ok(())
}
