//! Atomic-beam statistics: arrival processes, atom-number statistics and the
//! transit-envelope overlap entering the multi-atom correlation.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{require_nonnegative, require_positive};
use crate::quad;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalModel {
    /// Homogeneous Poisson arrivals.
    Poisson,
    /// Renewal process: after each arrival nothing arrives for `delta`, then
    /// the next arrival follows an exponential gap.
    DeadTime { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeShape {
    /// Uniform drive during `[t_k, t_k + t0]`.
    TopHat,
    /// Gaussian waist crossing, intensity `exp(−8t²/t0²)` about mid-transit.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    /// Mean atom number in the interaction volume.
    pub nbar: f64,
    /// Transit time.
    pub t0: f64,
    pub arrival_model: ArrivalModel,
    pub envelope: EnvelopeShape,
}

impl BeamParams {
    pub fn new(
        nbar: f64,
        t0: f64,
        arrival_model: ArrivalModel,
        envelope: EnvelopeShape,
    ) -> Result<Self> {
        let b = BeamParams {
            nbar,
            t0,
            arrival_model,
            envelope,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn poisson(nbar: f64, t0: f64) -> Result<Self> {
        Self::new(nbar, t0, ArrivalModel::Poisson, EnvelopeShape::TopHat)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("nbar", self.nbar)?;
        require_positive("t0", self.t0)?;
        if let ArrivalModel::DeadTime { delta } = self.arrival_model {
            require_nonnegative("dead_time", delta)?;
            if self.rate() * delta >= 1.0 {
                return Err(Error::invalid(
                    "dead_time",
                    format!(
                        "infeasible: arrival rate nbar/t0 = {} must be below 1/dead_time = {}",
                        self.rate(),
                        1.0 / delta
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Effective arrival rate `R = nbar/t0`.
    pub fn rate(&self) -> f64 {
        self.nbar / self.t0
    }

    /// Rate of the exponential part of the renewal gap, `ρ = R/(1 − Rδ)`, so
    /// that `R = ρ/(1 + ρδ)`. Equals `R` for Poisson arrivals.
    pub fn base_rate(&self) -> f64 {
        match self.arrival_model {
            ArrivalModel::Poisson => self.rate(),
            ArrivalModel::DeadTime { delta } => self.rate() / (1.0 - self.rate() * delta),
        }
    }

    /// Atom-number Mandel Q when it is known exactly: 0 for Poisson arrivals
    /// and `−nbar` once the dead time keeps at most one atom in the mode.
    pub fn analytic_q_a(&self) -> Option<f64> {
        match self.arrival_model {
            ArrivalModel::Poisson => Some(0.0),
            ArrivalModel::DeadTime { delta: 0.0 } => Some(0.0),
            ArrivalModel::DeadTime { delta } if delta >= self.t0 => Some(-self.nbar),
            ArrivalModel::DeadTime { .. } => None,
        }
    }
}

/// Arrival times in `[0, duration)` of a stationary realization of the beam's
/// arrival process.
pub fn sample_arrivals<R: Rng + ?Sized>(
    params: &BeamParams,
    duration: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate()?;
    require_positive("duration", duration)?;
    let gap = Exp::new(params.base_rate()).map_err(|e| Error::invalid("nbar", e.to_string()))?;
    let refractory = match params.arrival_model {
        ArrivalModel::Poisson => 0.0,
        ArrivalModel::DeadTime { delta } => delta,
    };
    let mut times = Vec::with_capacity((1.2 * params.rate() * duration) as usize + 16);
    // Equilibrium forward-recurrence time: with probability Rδ the process is
    // inside a dead period, whose remainder is uniform on [0, δ).
    let mut t = gap.sample(rng);
    if refractory > 0.0 && rng.random::<f64>() < params.rate() * refractory {
        t += refractory * rng.random::<f64>();
    }
    while t < duration {
        times.push(t);
        t += refractory + gap.sample(rng);
    }
    Ok(times)
}

/// Mean, variance and Mandel Q of the atom number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberStats {
    pub mean: f64,
    pub variance: f64,
    /// `(variance − mean)/mean`.
    pub q_a: f64,
    /// Delta-method standard error of `q_a`.
    pub q_a_std_error: f64,
    pub windows: usize,
}

/// Atom-number statistics over `⌊duration/window⌋` disjoint windows.
///
/// Each atom is attributed to the window containing its entry time. For
/// `window = t0` the count of a window is therefore the number of atoms inside
/// the interaction volume at the window's closing edge, a snapshot of the
/// instantaneous atom number.
pub fn atom_number_stats(arrivals: &[f64], window: f64, duration: f64) -> Result<NumberStats> {
    require_positive("window", window)?;
    require_positive("duration", duration)?;
    if arrivals.is_empty() {
        return Err(Error::Undefined(
            "no arrivals: atom statistics undefined".into(),
        ));
    }
    if duration < 100.0 * window {
        return Err(Error::invalid(
            "duration",
            "must cover at least 100 counting windows",
        ));
    }
    let windows = (duration / window).floor() as usize;
    let counts = window_counts(arrivals, window, windows);
    let (mean, variance, q_a, q_a_std_error) = count_moments(&counts, windows);
    Ok(NumberStats {
        mean,
        variance,
        q_a,
        q_a_std_error,
        windows,
    })
}

/// Histogram of per-window counts: `hist[n]` is the number of windows holding
/// `n` events. Events outside the first `windows` windows are ignored.
pub(crate) fn window_counts(times: &[f64], window: f64, windows: usize) -> Vec<u64> {
    let mut hist = vec![0u64; 1];
    let mut occupied = 0u64;
    let mut current: Option<usize> = None;
    let mut n = 0usize;
    let flush = |n: usize, hist: &mut Vec<u64>| {
        if hist.len() <= n {
            hist.resize(n + 1, 0);
        }
        hist[n] += 1;
    };
    for &t in times {
        if t < 0.0 {
            continue;
        }
        let k = (t / window).floor() as usize;
        if k >= windows {
            break;
        }
        if current != Some(k) {
            if current.is_some() {
                flush(n, &mut hist);
                occupied += 1;
            }
            current = Some(k);
            n = 0;
        }
        n += 1;
    }
    if current.is_some() {
        flush(n, &mut hist);
        occupied += 1;
    }
    hist[0] += windows as u64 - occupied;
    hist
}

/// Mean, unbiased variance, Q and the delta-method standard error of Q from a
/// count histogram.
pub(crate) fn count_moments(hist: &[u64], windows: usize) -> (f64, f64, f64, f64) {
    let m = windows as f64;
    let mean = hist
        .iter()
        .enumerate()
        .map(|(n, &c)| n as f64 * c as f64)
        .sum::<f64>()
        / m;
    let ss: f64 = hist
        .iter()
        .enumerate()
        .map(|(n, &c)| c as f64 * (n as f64 - mean).powi(2))
        .sum();
    let variance = if windows > 1 { ss / (m - 1.0) } else { 0.0 };
    let q = (variance - mean) / mean;
    // Influence function of q = v/μ − 1 for one window with count n.
    let psi2: f64 = hist
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            let d = n as f64 - mean;
            let psi = (d * d - variance) / mean - variance * d / (mean * mean);
            c as f64 * psi * psi
        })
        .sum();
    let se = (psi2 / m).sqrt() / m.sqrt();
    (mean, variance, q, se)
}

/// Transit overlap function `F(τ)` on a lag grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeOverlap {
    pub tau_grid: Vec<f64>,
    pub f: Vec<f64>,
}

/// Single-transit intensity envelope `h(t)` relative to the entry time.
pub fn intensity_envelope(shape: EnvelopeShape, t0: f64, t: f64) -> f64 {
    match shape {
        EnvelopeShape::TopHat => {
            if (0.0..=t0).contains(&t) {
                1.0
            } else {
                0.0
            }
        }
        EnvelopeShape::Gaussian => {
            let x = (t - 0.5 * t0) / t0;
            (-8.0 * x * x).exp()
        }
    }
}

/// `F(τ) = t0 ∫h(s)h(s+τ)ds / (∫h(s)ds)²`.
pub fn overlap_at(params: &BeamParams, tau: f64) -> f64 {
    let t0 = params.t0;
    match params.envelope {
        EnvelopeShape::TopHat => (1.0 - tau.abs() / t0).max(0.0),
        EnvelopeShape::Gaussian => {
            let h = |s: f64| intensity_envelope(EnvelopeShape::Gaussian, t0, s);
            let mid = 0.5 * t0;
            let area = quad::integrate(h, mid - 2.5 * t0, mid + 2.5 * t0, 1e-12 * t0, 8);
            // The integrand is centered where s + τ/2 is mid-transit.
            let c = mid - 0.5 * tau;
            let cross = quad::integrate(
                |s| h(s) * h(s + tau),
                c - 2.0 * t0,
                c + 2.0 * t0,
                1e-11 * t0,
                8,
            );
            t0 * cross / (area * area)
        }
    }
}

pub fn envelope_overlap(params: &BeamParams, tau_grid: &[f64]) -> Result<EnvelopeOverlap> {
    params.validate()?;
    crate::atomdyn::check_ascending(tau_grid)?;
    Ok(EnvelopeOverlap {
        tau_grid: tau_grid.to_vec(),
        f: tau_grid.iter().map(|&t| overlap_at(params, t)).collect(),
    })
}
