//! Photon-timestamp analysis: the two-detector cross-correlation estimator,
//! counting statistics and rates.

use rayon::prelude::*;

use crate::beam::{count_moments, window_counts};
use crate::composite::CorrelationCurve;
use crate::error::{require_finite, require_positive};
use crate::{Error, Result};

/// Start events per parallel work item. Chunking only changes the schedule;
/// histograms are integer sums and identical to a serial pass.
const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub bin_width: f64,
    pub max_lag: f64,
}

impl HistogramSpec {
    pub fn new(bin_width: f64, max_lag: f64) -> Result<Self> {
        require_positive("bin_width", bin_width)?;
        require_finite("max_lag", max_lag)?;
        if max_lag < bin_width {
            return Err(Error::invalid("max_lag", "must be >= bin_width"));
        }
        Ok(HistogramSpec { bin_width, max_lag })
    }

    /// Number of bins covering `[0, max_lag)`. A `max_lag` within rounding of a
    /// whole number of bins is not padded with an extra bin.
    pub fn n_bins(&self) -> usize {
        let x = self.max_lag / self.bin_width;
        let r = x.round();
        if (x - r).abs() <= 1e-9 * r.max(1.0) {
            r as usize
        } else {
            x.ceil() as usize
        }
    }

    /// Upper edge of the last bin.
    pub fn span(&self) -> f64 {
        self.n_bins() as f64 * self.bin_width
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width
    }
}

fn check_sorted(name: &str, s: &[f64]) -> Result<()> {
    if s.iter().any(|t| !t.is_finite()) || s.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid(
            name,
            "timestamps must be finite and ascending",
        ));
    }
    Ok(())
}

fn accumulate(a: &[f64], b: &[f64], bin: f64, n: usize, lag_lo: f64, offset: isize) -> Vec<u64> {
    let span = n as f64 * bin;
    let hi = lag_lo + span;
    let mut hist = vec![0u64; n];
    let Some(&first) = a.first() else {
        return hist;
    };
    let mut lo = b.partition_point(|&t| t - first < lag_lo);
    for &ta in a {
        while lo < b.len() && b[lo] - ta < lag_lo {
            lo += 1;
        }
        for &tb in &b[lo..] {
            let d = tb - ta;
            if d >= hi {
                break;
            }
            let k = (d / bin).floor() as isize + offset;
            if (0..n as isize).contains(&k) {
                hist[k as usize] += 1;
            }
        }
    }
    hist
}

fn chunked(a: &[f64], b: &[f64], bin: f64, n: usize, lag_lo: f64, offset: isize) -> Vec<u64> {
    a.par_chunks(CHUNK)
        .map(|chunk| accumulate(chunk, b, bin, n, lag_lo, offset))
        .reduce(
            || vec![0u64; n],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
                x
            },
        )
}

/// Counts of pairs with `b_j − a_i ∈ [kΔ, (k+1)Δ)` for `k < n_bins`.
///
/// Two-pointer sweep: the first candidate in `b` only moves forward, so the
/// cost is linear in the number of events times the mean window occupancy.
pub fn pair_histogram(a: &[f64], b: &[f64], spec: &HistogramSpec) -> Vec<u64> {
    chunked(a, b, spec.bin_width, spec.n_bins(), 0.0, 0)
}

/// Pair counts over signed lags `[−span, span)`; bin `k` covers
/// `[(k − n)Δ, (k − n + 1)Δ)` with `n = n_bins`.
pub fn signed_pair_histogram(a: &[f64], b: &[f64], spec: &HistogramSpec) -> Vec<u64> {
    let n = spec.n_bins();
    chunked(a, b, spec.bin_width, 2 * n, -spec.span(), n as isize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub dof: usize,
}

impl ChiSquare {
    pub fn reduced(&self) -> f64 {
        self.chi2 / self.dof as f64
    }
}

/// Estimated cross-correlation together with the raw pair counts and the
/// expected count per unit `g²` in each bin.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    pub curve: CorrelationCurve,
    pub counts: Vec<u64>,
    pub norm: Vec<f64>,
}

impl CrossCorrelation {
    /// Pearson χ² of the pair counts against a model `g²` per bin, using the
    /// model's expected counts as variances. Bins with zero expectation are
    /// skipped.
    pub fn pearson_chi_square(&self, model: &[f64]) -> Result<ChiSquare> {
        if model.len() != self.counts.len() {
            return Err(Error::invalid(
                "model",
                "length must match the number of bins",
            ));
        }
        let mut chi2 = 0.0;
        let mut dof = 0;
        for ((&c, &n), &g) in self.counts.iter().zip(&self.norm).zip(model) {
            let expect = g * n;
            if expect > 0.0 {
                chi2 += (c as f64 - expect).powi(2) / expect;
                dof += 1;
            }
        }
        if dof == 0 {
            return Err(Error::Undefined("no bins with nonzero expectation".into()));
        }
        Ok(ChiSquare { chi2, dof })
    }

    /// Standard deviation of bin `k` if the true value were `g`, from Poisson
    /// counting with the expected count `g·norm`.
    pub fn model_sigma(&self, k: usize, g: f64) -> f64 {
        (g * self.norm[k]).sqrt() / self.norm[k]
    }
}

/// Binned `ĝ²(τ)` of detector streams `a` (start) and `b` (stop):
/// `ĝ²_k = C_k / (r_a r_b Δ (duration − τ_k))` with `τ_k` the bin center and
/// `σ_k = √C_k` over the same denominator.
pub fn cross_correlation(
    a: &[f64],
    b: &[f64],
    spec: &HistogramSpec,
    duration: f64,
) -> Result<CrossCorrelation> {
    require_positive("duration", duration)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::Undefined(
            "cross-correlation of an empty stream".into(),
        ));
    }
    check_sorted("a", a)?;
    check_sorted("b", b)?;
    if spec.span() >= duration {
        return Err(Error::OutOfRange(format!(
            "lag bins reach {} s but the record is only {} s long",
            spec.span(),
            duration
        )));
    }
    let counts = pair_histogram(a, b, spec);
    let ra = rate(a, duration);
    let rb = rate(b, duration);
    let n = counts.len();
    let tau: Vec<f64> = (0..n).map(|k| spec.bin_center(k)).collect();
    let norm: Vec<f64> = tau
        .iter()
        .map(|&t| ra * rb * spec.bin_width * (duration - t))
        .collect();
    let g2 = counts
        .iter()
        .zip(&norm)
        .map(|(&c, &d)| c as f64 / d)
        .collect();
    let sigma = counts
        .iter()
        .zip(&norm)
        .map(|(&c, &d)| (c as f64).sqrt() / d)
        .collect();
    Ok(CrossCorrelation {
        curve: CorrelationCurve {
            tau_grid: tau,
            g2,
            sigma,
        },
        counts,
        norm,
    })
}

/// Photon-count statistics in disjoint windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingStats {
    pub window: f64,
    pub mean: f64,
    pub variance: f64,
    /// Mandel Q, `(variance − mean)/mean`.
    pub q: f64,
    /// Asymptotic uncertainty `√(2/m)(1 + q)` for `m` windows.
    pub sigma_q: f64,
    pub windows: usize,
}

pub fn counting_stats(times: &[f64], window: f64, duration: f64) -> Result<CountingStats> {
    require_positive("window", window)?;
    require_positive("duration", duration)?;
    if times.is_empty() {
        return Err(Error::Undefined(
            "counting statistics of an empty stream".into(),
        ));
    }
    check_sorted("times", times)?;
    if duration < 100.0 * window {
        return Err(Error::invalid(
            "window",
            format!("duration {duration} must cover at least 100 windows of {window}"),
        ));
    }
    let windows = (duration / window).floor() as usize;
    let hist = window_counts(times, window, windows);
    let (mean, variance, q, _) = count_moments(&hist, windows);
    if mean == 0.0 {
        return Err(Error::Undefined(
            "no events inside the counting windows".into(),
        ));
    }
    Ok(CountingStats {
        window,
        mean,
        variance,
        q,
        sigma_q: (2.0 / windows as f64).sqrt() * (1.0 + q),
        windows,
    })
}

/// Events per unit time.
pub fn rate(times: &[f64], duration: f64) -> f64 {
    times.len() as f64 / duration
}
