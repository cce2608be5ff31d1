//! Analytic composition of the multi-atom intensity correlation.
//!
//! For atoms crossing the mode independently, the cross-correlation seen by
//! two detectors is
//!
//! ```text
//! g²(τ) = 1 + [Q_A + g_A²(τ)] F(τ) / N̄
//! ```
//!
//! where `g_A²` is the single-atom correlation, `F` the transit overlap and
//! `Q_A` the Mandel Q of the atom number. At τ = 0, `g_A²(0) = 0` and the
//! zero-lag value `1 + Q_A F(0)/N̄` drops below 1 only for sub-Poissonian atom
//! statistics.

use std::fmt;

use crate::atomdyn::{g2_atom, AtomParams};
use crate::beam::{overlap_at, ArrivalModel, BeamParams, EnvelopeShape};
use crate::error::{require_finite, require_nonnegative, require_positive};
use crate::{Error, Result};

/// `g²` sampled on a lag grid with per-point statistical uncertainty
/// (identically zero for analytic curves).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub tau_grid: Vec<f64>,
    pub g2: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl CorrelationCurve {
    pub fn analytic(tau_grid: Vec<f64>, g2: Vec<f64>) -> Self {
        let sigma = vec![0.0; g2.len()];
        CorrelationCurve {
            tau_grid,
            g2,
            sigma,
        }
    }

    pub fn len(&self) -> usize {
        self.g2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g2.is_empty()
    }
}

/// Background light as a rate ratio `b = B/S` relative to the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundModel {
    pub b: f64,
}

impl BackgroundModel {
    pub fn new(b: f64) -> Result<Self> {
        require_nonnegative("ratio", b)?;
        Ok(BackgroundModel { b })
    }

    pub const NONE: BackgroundModel = BackgroundModel { b: 0.0 };
}

fn lag_grid_with_origin(tau_grid: &[f64]) -> Result<(Vec<f64>, usize)> {
    crate::atomdyn::check_ascending(tau_grid)?;
    if tau_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("tau_grid", "lags must be >= 0"));
    }
    if tau_grid.first() == Some(&0.0) {
        Ok((tau_grid.to_vec(), 0))
    } else {
        let mut g = Vec::with_capacity(tau_grid.len() + 1);
        g.push(0.0);
        g.extend_from_slice(tau_grid);
        Ok((g, 1))
    }
}

/// Multi-atom beam correlation `1 + [q_a + g_A²(τ)] F(τ)/N̄`.
///
/// For Poisson arrivals `q_a` must be 0. For other arrival models the
/// number-fluctuation term is carried with the same overlap `F(τ)` as the
/// same-atom term, which is exact at τ = 0 and an approximation elsewhere.
pub fn g2_beam(
    atom: &AtomParams,
    beam: &BeamParams,
    q_a: f64,
    tau_grid: &[f64],
) -> Result<CorrelationCurve> {
    beam.validate()?;
    require_finite("q_a", q_a)?;
    if beam.arrival_model == ArrivalModel::Poisson && q_a != 0.0 {
        return Err(Error::invalid("q_a", "must be 0 for Poisson arrivals"));
    }
    let (grid, skip) = lag_grid_with_origin(tau_grid)?;
    let atom_corr = g2_atom(atom, &grid)?;
    let g2 = grid
        .iter()
        .zip(&atom_corr.g2)
        .skip(skip)
        .map(|(&tau, &ga)| 1.0 + (q_a + ga) * overlap_at(beam, tau) / beam.nbar)
        .collect();
    Ok(CorrelationCurve::analytic(tau_grid.to_vec(), g2))
}

/// [`g2_beam`] averaged over histogram bins `[kΔ, (k+1)Δ)`, `k < n_bins`, by the
/// midpoint rule with `samples_per_bin` nodes. The returned grid holds bin
/// centers, matching the correlator's convention.
pub fn g2_beam_binned(
    atom: &AtomParams,
    beam: &BeamParams,
    q_a: f64,
    bin_width: f64,
    n_bins: usize,
    samples_per_bin: usize,
) -> Result<CorrelationCurve> {
    require_positive("bin_width", bin_width)?;
    let m = samples_per_bin.max(1);
    let fine: Vec<f64> = (0..n_bins * m)
        .map(|i| (i as f64 + 0.5) * bin_width / m as f64)
        .collect();
    let curve = g2_beam(atom, beam, q_a, &fine)?;
    let g2 = curve
        .g2
        .chunks(m)
        .map(|c| c.iter().sum::<f64>() / m as f64)
        .collect();
    let centers = (0..n_bins).map(|k| (k as f64 + 0.5) * bin_width).collect();
    Ok(CorrelationCurve::analytic(centers, g2))
}

/// Observed correlation with added background: `1 + (g²_src − 1)/(1 + b)²`.
pub fn g2_with_background(src: &CorrelationCurve, bg: &BackgroundModel) -> CorrelationCurve {
    let scale = 1.0 / ((1.0 + bg.b) * (1.0 + bg.b));
    CorrelationCurve {
        tau_grid: src.tau_grid.clone(),
        g2: src.g2.iter().map(|g| 1.0 + (g - 1.0) * scale).collect(),
        sigma: src.sigma.iter().map(|s| s * scale).collect(),
    }
}

/// Mandel Q of photon counts in windows of length `window`:
/// `Q(T) = (2·rate/T) ∫₀^T (T − τ)(g²(τ) − 1) dτ`, trapezoidal on the curve's
/// grid (linearly interpolated at `T`).
pub fn mandel_q_from_g2(curve: &CorrelationCurve, rate: f64, window: f64) -> Result<f64> {
    require_nonnegative("rate", rate)?;
    require_positive("window", window)?;
    let grid = &curve.tau_grid;
    match (grid.first(), grid.last()) {
        (Some(&first), Some(&last)) if first <= 0.0 && last >= window => {}
        _ => {
            return Err(Error::OutOfRange(format!(
                "curve grid must cover [0, {window}]"
            )))
        }
    }
    let integrand = |i: usize| (window - grid[i]) * (curve.g2[i] - 1.0);
    let mut acc = 0.0;
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        if b <= 0.0 || a >= window {
            continue;
        }
        let lerp = |x: f64| {
            let s = if b > a { (x - a) / (b - a) } else { 0.0 };
            let g = curve.g2[i] + s * (curve.g2[i + 1] - curve.g2[i]);
            (window - x) * (g - 1.0)
        };
        let lo = a.max(0.0);
        let hi = b.min(window);
        let f_lo = if lo == a { integrand(i) } else { lerp(lo) };
        let f_hi = if hi == b { integrand(i + 1) } else { lerp(hi) };
        acc += 0.5 * (hi - lo) * (f_lo + f_hi);
    }
    Ok(2.0 * rate / window * acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonStatistics {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

impl fmt::Display for PhotonStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhotonStatistics::SubPoissonian => "sub-Poissonian",
            PhotonStatistics::Poissonian => "Poissonian",
            PhotonStatistics::SuperPoissonian => "super-Poissonian",
        })
    }
}

/// Three-sigma classification of a Mandel Q estimate.
pub fn classify(q: f64, sigma: f64) -> PhotonStatistics {
    if q < -3.0 * sigma {
        PhotonStatistics::SubPoissonian
    } else if q > 3.0 * sigma {
        PhotonStatistics::SuperPoissonian
    } else {
        PhotonStatistics::Poissonian
    }
}

/// Parameters of the reference beam figure in units of the transit time:
/// mean atom number 0.1, Ω′t0 = 25, βt0 = 0.1, resonant drive and a
/// background-to-signal ratio of 0.5 for the lower trace.
pub mod figure1 {
    pub const NBAR: f64 = 0.1;
    pub const OMEGA_T0: f64 = 25.0;
    pub const BETA_T0: f64 = 0.1;
    pub const BACKGROUND_RATIO: f64 = 0.5;
}

/// Atom and beam parameters of the reference figure for a transit time `t0`.
pub fn figure1_params(t0: f64) -> Result<(AtomParams, BeamParams)> {
    require_positive("t0", t0)?;
    let atom = AtomParams::resonant(figure1::BETA_T0 / t0, figure1::OMEGA_T0 / t0)?;
    let beam = BeamParams::new(
        figure1::NBAR,
        t0,
        ArrivalModel::Poisson,
        EnvelopeShape::TopHat,
    )?;
    Ok((atom, beam))
}

/// Upper (no background) and lower (b = 0.5) traces of the reference figure,
/// on a grid of `τ/t0` values.
pub fn figure1_curves(tau_over_t0: &[f64]) -> Result<(CorrelationCurve, CorrelationCurve)> {
    let (atom, beam) = figure1_params(1.0)?;
    let upper = g2_beam(&atom, &beam, 0.0, tau_over_t0)?;
    let lower = g2_with_background(&upper, &BackgroundModel::new(figure1::BACKGROUND_RATIO)?);
    Ok((upper, lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomdyn::g2_atom_closed_form;
    use proptest::prelude::*;

    fn fig1() -> (AtomParams, BeamParams) {
        figure1_params(1.0).unwrap()
    }

    #[test]
    fn poisson_zero_lag_is_one() {
        let (atom, beam) = fig1();
        let c = g2_beam(&atom, &beam, 0.0, &[0.0, 1.2, 2.5]).unwrap();
        assert_eq!(c.g2[0], 1.0);
        assert_eq!(c.g2[1], 1.0);
        assert_eq!(c.g2[2], 1.0);
    }

    #[test]
    fn figure_point_by_hand() {
        let (atom, beam) = fig1();
        let c = g2_beam(&atom, &beam, 0.0, &[0.2]).unwrap();
        let expect = 1.0 + g2_atom_closed_form(&atom, 0.2).unwrap() * 0.8 / 0.1;
        assert!((c.g2[0] - expect).abs() < 1e-5);
        assert!((c.g2[0] - 6.8).abs() < 0.1);
    }

    #[test]
    fn poisson_requires_zero_q() {
        let (atom, beam) = fig1();
        assert!(g2_beam(&atom, &beam, -0.1, &[0.0]).is_err());
    }

    #[test]
    fn zero_lag_tracks_atom_number_q() {
        let (atom, _) = fig1();
        let beam = BeamParams::new(
            0.1,
            1.0,
            ArrivalModel::DeadTime { delta: 2.0 },
            EnvelopeShape::TopHat,
        )
        .unwrap();
        for q in [-0.1, -0.05, 0.0, 0.3] {
            let c = g2_beam(&atom, &beam, q, &[0.0]).unwrap();
            assert!((c.g2[0] - (1.0 + q / 0.1)).abs() < 1e-12);
            assert_eq!(c.g2[0] < 1.0, q < 0.0);
        }
    }

    #[test]
    fn binned_matches_pointwise_for_fine_bins() {
        let (atom, beam) = fig1();
        let binned = g2_beam_binned(&atom, &beam, 0.0, 0.001, 50, 8).unwrap();
        let point = g2_beam(&atom, &beam, 0.0, &binned.tau_grid).unwrap();
        for (a, b) in binned.g2.iter().zip(&point.g2) {
            assert!((a - b).abs() < 1e-3 * b);
        }
    }

    #[test]
    fn background_examples() {
        let src = CorrelationCurve::analytic(vec![0.0, 1.0], vec![11.0, 1.0]);
        assert_eq!(g2_with_background(&src, &BackgroundModel::NONE), src);
        let obs = g2_with_background(&src, &BackgroundModel::new(0.5).unwrap());
        assert!((obs.g2[0] - (1.0 + 10.0 / 2.25)).abs() < 1e-12);
        assert!((obs.g2[0] - 5.444).abs() < 1e-3);
        assert_eq!(obs.g2[1], 1.0);
        assert!(BackgroundModel::new(-0.1).is_err());
    }

    #[test]
    fn mandel_q_examples() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.02).collect();
        let flat = CorrelationCurve::analytic(grid.clone(), vec![1.0; grid.len()]);
        assert_eq!(mandel_q_from_g2(&flat, 3.0, 1.0).unwrap(), 0.0);
        let c = 0.7;
        let lifted = CorrelationCurve::analytic(grid.clone(), vec![1.0 + c; grid.len()]);
        for window in [1.0, 0.555, 2.0] {
            let q = mandel_q_from_g2(&lifted, 3.0, window).unwrap();
            assert!((q - 3.0 * c * window).abs() < 1e-12, "{q}");
        }
        assert!(matches!(
            mandel_q_from_g2(&lifted, 3.0, 2.5),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn figure_is_super_poissonian() {
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.0005).collect();
        let (upper, _) = figure1_curves(&grid).unwrap();
        let q = mandel_q_from_g2(&upper, 0.01, 1.0).unwrap();
        assert!(q > 0.0);
        assert_eq!(classify(q, 0.0), PhotonStatistics::SuperPoissonian);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.0, 0.01), PhotonStatistics::Poissonian);
        assert_eq!(classify(0.5, 0.01), PhotonStatistics::SuperPoissonian);
        assert_eq!(classify(-0.1, 0.01), PhotonStatistics::SubPoissonian);
        assert_eq!(PhotonStatistics::Poissonian.to_string(), "Poissonian");
    }

    #[test]
    fn figure_curves_properties() {
        let grid: Vec<f64> = (0..=800).map(|i| i as f64 / 200.0).collect();
        let (upper, lower) = figure1_curves(&grid).unwrap();
        assert!((upper.g2[0] - 1.0).abs() < 1e-9);
        assert!((lower.g2[0] - 1.0).abs() < 1e-9);
        for i in 0..grid.len() {
            assert!(upper.g2[i] >= 1.0 - 1e-12 && lower.g2[i] >= 1.0 - 1e-12);
            assert!(((lower.g2[i] - 1.0) * 2.25 - (upper.g2[i] - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn ringing_period() {
        let step = 1e-4;
        let grid: Vec<f64> = (0..=5000).map(|i| i as f64 * step).collect();
        let (upper, _) = figure1_curves(&grid).unwrap();
        let peaks: Vec<f64> = (1..grid.len() - 1)
            .filter(|&i| upper.g2[i] > upper.g2[i - 1] && upper.g2[i] >= upper.g2[i + 1])
            .map(|i| grid[i])
            .collect();
        assert!(peaks.len() >= 2);
        let period = 2.0 * std::f64::consts::PI / figure1::OMEGA_T0;
        for w in peaks.windows(2) {
            assert!(((w[1] - w[0]) - period).abs() < 0.05 * period);
        }
    }

    proptest! {
        #[test]
        fn poisson_beam_never_below_one(beta in 0.01f64..3.0, omega in 0.1f64..40.0, nbar in 0.01f64..5.0, gaussian in any::<bool>()) {
            let atom = AtomParams::resonant(beta, omega).unwrap();
            let shape = if gaussian { EnvelopeShape::Gaussian } else { EnvelopeShape::TopHat };
            let beam = BeamParams::new(nbar, 1.0, ArrivalModel::Poisson, shape).unwrap();
            let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.05).collect();
            let c = g2_beam(&atom, &beam, 0.0, &grid).unwrap();
            for g in c.g2 {
                prop_assert!(g >= 1.0 - 1e-12);
            }
        }

        #[test]
        fn background_contracts_toward_one(g in 0.0f64..50.0, b in 0.0f64..10.0) {
            let src = CorrelationCurve::analytic(vec![0.0], vec![g]);
            let obs = g2_with_background(&src, &BackgroundModel::new(b).unwrap());
            let d_src = (g - 1.0).abs();
            let d_obs = (obs.g2[0] - 1.0).abs();
            prop_assert!(d_obs <= d_src + 1e-15);
            if b > 0.0 && d_src > 1e-6 {
                prop_assert!(d_obs < d_src);
            }
        }
    }
}
