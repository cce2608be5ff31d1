//! Acceptance criteria. Each test prints one PASS/FAIL line per check; run
//! with `-- --nocapture` to see them.

use std::f64::consts::{FRAC_PI_2, PI};

use g2beam::atomdyn::{
    g2_atom, g2_atom_closed_form, sample_emission_times, AtomParams, ConstantDrive,
};
use g2beam::beam::{atom_number_stats, ArrivalModel, BeamParams, EnvelopeShape};
use g2beam::cavityphase::{excursion_stats, transit_time, KinematicParams, ModeGeometry};
use g2beam::composite::{
    figure1, figure1_curves, figure1_params, g2_beam, g2_beam_binned, mandel_q_from_g2,
    BackgroundModel,
};
use g2beam::correlator::{counting_stats, cross_correlation, pair_histogram, rate, HistogramSpec};
use g2beam::montecarlo::{
    hbt_split, run_experiment, simulate_source_record, substream, DetectorParams, ExperimentConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and run sizes.
const EXACT: f64 = 1e-12;
const ZERO_LAG: f64 = 1e-9;
const RINGING_REL: f64 = 0.05;
const ODE_VS_CLOSED: f64 = 1e-6;
const MAX_REDUCED_CHI2: f64 = 2.0;
const SIGMAS: f64 = 3.0;
const ANTIBUNCHED_FIRST_BIN: f64 = 0.1;
const ZERO_LAG_MATCH: f64 = 0.2;
const Q_FORMULA_REL: f64 = 0.10;
const QUARTER_WAVE_FRACTION: f64 = 0.317_310_507_862_914_1; // 2(1 − Φ(1))
const MC_DURATION_T0: f64 = 1e5;
const SEED: u64 = 20_020_601;

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report {
            failures: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(name.to_string());
        }
    }

    fn finish(self) {
        assert!(self.failures.is_empty(), "failed: {:?}", self.failures);
    }
}

fn fig1_config(duration_t0: f64, seed: u64) -> ExperimentConfig {
    let (atom, beam) = figure1_params(1.0).unwrap();
    ExperimentConfig {
        atom,
        beam,
        background: BackgroundModel::NONE,
        detectors: [DetectorParams::IDEAL; 2],
        duration: duration_t0,
        seed,
    }
}

#[test]
fn criterion_1_figure_properties() {
    let mut r = Report::new();
    let grid: Vec<f64> = (0..=30_000).map(|i| i as f64 / 10_000.0).collect();
    let (upper, lower) = figure1_curves(&grid).unwrap();

    let min = upper
        .g2
        .iter()
        .chain(&lower.g2)
        .copied()
        .fold(f64::INFINITY, f64::min);
    r.check(
        "1(a) g2 >= 1 on [0, 3 t0]",
        min >= 1.0 - EXACT,
        format!("min g2 = {min:.15}"),
    );

    let z = (upper.g2[0] - 1.0).abs().max((lower.g2[0] - 1.0).abs());
    r.check(
        "1(b) g2(0) = 1",
        z <= ZERO_LAG,
        format!("|g2(0) - 1| = {z:e}"),
    );

    let beyond = grid
        .iter()
        .zip(&upper.g2)
        .filter(|(t, _)| **t > 1.0)
        .all(|(_, g)| *g == 1.0);
    r.check(
        "1(c) g2 = 1 exactly for tau > t0",
        beyond,
        "all points beyond transit".into(),
    );

    // Local maxima of g2 − 1 on (0, 0.5 t0), refined by a parabola through
    // the three samples around each discrete maximum.
    let step = 1e-5;
    let fine: Vec<f64> = (0..=50_000).map(|i| i as f64 * step).collect();
    let (c, _) = figure1_curves(&fine).unwrap();
    let peaks: Vec<f64> = (1..fine.len() - 1)
        .filter(|&i| c.g2[i] > c.g2[i - 1] && c.g2[i] >= c.g2[i + 1])
        .map(|i| {
            let (a, b, d) = (c.g2[i - 1], c.g2[i], c.g2[i + 1]);
            fine[i] + 0.5 * step * (a - d) / (a - 2.0 * b + d)
        })
        .collect();
    let period = 2.0 * PI / figure1::OMEGA_T0;
    let worst = peaks
        .windows(2)
        .map(|w| ((w[1] - w[0]) - period).abs() / period)
        .fold(0.0, f64::max);
    r.check(
        "1(d) ringing spacing 2π/Ω′",
        peaks.len() >= 2 && worst < RINGING_REL,
        format!(
            "{} maxima, worst relative spacing error {worst:.4}",
            peaks.len()
        ),
    );

    let same_form = grid
        .iter()
        .enumerate()
        .map(|(i, _)| ((lower.g2[i] - 1.0) * 2.25 - (upper.g2[i] - 1.0)).abs())
        .fold(0.0, f64::max);
    r.check(
        "1(e) background trace keeps the same form",
        same_form <= EXACT,
        format!("max |(g2_0.5 - 1)·2.25 - (g2_0 - 1)| = {same_form:e}"),
    );
    r.finish();
}

#[test]
fn criterion_2_monte_carlo_matches_analytic() {
    let mut r = Report::new();
    let cfg = fig1_config(MC_DURATION_T0, SEED);
    let (stream, summary) = run_experiment(&cfg).unwrap();
    let spec = HistogramSpec::new(0.01, 2.0).unwrap();
    let cc = cross_correlation(
        &stream.detector_times(0),
        &stream.detector_times(1),
        &spec,
        stream.duration,
    )
    .unwrap();
    let model =
        g2_beam_binned(&cfg.atom, &cfg.beam, 0.0, spec.bin_width, spec.n_bins(), 8).unwrap();
    let chi = cc.pearson_chi_square(&model.g2).unwrap();
    r.check(
        "2 reduced chi-square vs analytic curve",
        chi.reduced() < MAX_REDUCED_CHI2,
        format!(
            "chi2/dof = {:.3} over {} bins ({} detections, {} pairs)",
            chi.reduced(),
            chi.dof,
            summary.detected[0] + summary.detected[1],
            cc.counts.iter().sum::<u64>()
        ),
    );
    let sigma0 = cc.model_sigma(0, model.g2[0]).max(cc.curve.sigma[0]);
    let dev = (cc.curve.g2[0] - 1.0).abs();
    r.check(
        "2 zero-lag bin consistent with 1",
        dev <= SIGMAS * sigma0,
        format!("g2(0 bin) = {:.3} ± {:.3}", cc.curve.g2[0], sigma0),
    );
    r.finish();
}

#[test]
fn criterion_3_single_atom_engine() {
    let mut r = Report::new();
    let grid: Vec<f64> = (0..=10_000).map(|i| i as f64 * 1e-3).collect();
    for ratio in [5.0, 25.0, 125.0] {
        let p = AtomParams::resonant(1.0, ratio).unwrap();
        let ode = g2_atom(&p, &grid).unwrap();
        let worst = grid
            .iter()
            .zip(&ode.g2)
            .map(|(&t, &g)| (g - g2_atom_closed_form(&p, t).unwrap()).abs())
            .fold(0.0, f64::max);
        r.check(
            &format!("3 ODE vs closed form, Ω/β = {ratio}"),
            worst < ODE_VS_CLOSED,
            format!("max error {worst:e}"),
        );
    }

    // One atom driven continuously; its photons go through the beamsplitter.
    let p = AtomParams::resonant(1.0, 5.0).unwrap();
    let duration = 2e5;
    let mut rng = substream(SEED, 100);
    let times = sample_emission_times(&p, &ConstantDrive(1.0), duration, &mut rng).unwrap();
    let s = hbt_split(
        &times,
        &DetectorParams::IDEAL,
        &DetectorParams::IDEAL,
        duration,
        &mut substream(SEED, 101),
    )
    .unwrap();
    let spec = HistogramSpec::new(0.02, 5.0).unwrap();
    let cc =
        cross_correlation(&s.detector_times(0), &s.detector_times(1), &spec, duration).unwrap();
    // Bin averages of the closed form by the midpoint rule.
    let sub = 16;
    let model: Vec<f64> = (0..spec.n_bins())
        .map(|k| {
            (0..sub)
                .map(|j| {
                    let t = (k as f64 + (j as f64 + 0.5) / sub as f64) * spec.bin_width;
                    g2_atom_closed_form(&p, t).unwrap()
                })
                .sum::<f64>()
                / sub as f64
        })
        .collect();
    let chi = cc.pearson_chi_square(&model).unwrap();
    r.check(
        "3 jump stream reproduces g_A² (reduced chi-square)",
        chi.reduced() < MAX_REDUCED_CHI2,
        format!(
            "chi2/dof = {:.3} over {} bins, {} photons",
            chi.reduced(),
            chi.dof,
            times.len()
        ),
    );
    r.check(
        "3 first bin antibunched",
        cc.curve.g2[0] < ANTIBUNCHED_FIRST_BIN,
        format!(
            "g2(first bin) = {:.4} ± {:.4}",
            cc.curve.g2[0], cc.curve.sigma[0]
        ),
    );
    r.finish();
}

#[test]
fn criterion_4_sub_poissonian_correspondence() {
    let mut r = Report::new();
    let (atom, _) = figure1_params(1.0).unwrap();
    let beam = BeamParams::new(
        figure1::NBAR,
        1.0,
        ArrivalModel::DeadTime { delta: 2.0 },
        EnvelopeShape::TopHat,
    )
    .unwrap();
    // Dead time keeps at most one atom in the mode, so photons from different
    // atoms are at least t0 apart and the zero-lag bin is fed only by the
    // antibunched single-atom term. Long enough that the Poisson level of
    // the first 0.01 t0 bin holds tens of pairs.
    let duration = 2e8;
    let source = simulate_source_record(&atom, &beam, duration, SEED).unwrap();
    let number = atom_number_stats(&source.arrivals, 1.0, duration).unwrap();
    r.check(
        "4 atom-number Q_A = -0.1",
        (number.q_a + figure1::NBAR).abs() <= SIGMAS * number.q_a_std_error,
        format!(
            "Q_A = {:.5} ± {:.5}, mean {:.5}",
            number.q_a, number.q_a_std_error, number.mean
        ),
    );

    let stream = hbt_split(
        &source.emissions,
        &DetectorParams::IDEAL,
        &DetectorParams::IDEAL,
        duration,
        &mut substream(SEED, 200),
    )
    .unwrap();
    let spec = HistogramSpec::new(0.01, 0.1).unwrap();
    let cc = cross_correlation(
        &stream.detector_times(0),
        &stream.detector_times(1),
        &spec,
        duration,
    )
    .unwrap();
    let g0 = cc.curve.g2[0];
    // Uncertainty under the Poisson hypothesis g2 = 1.
    let sigma_null = cc.model_sigma(0, 1.0);
    r.check(
        "4 photon g2(0 bin) < 1",
        1.0 - g0 > SIGMAS * sigma_null,
        format!(
            "g2(0 bin) = {g0:.4}, Poisson-level sigma {sigma_null:.4}, {} pairs",
            cc.counts[0]
        ),
    );
    let predicted = 1.0 + number.q_a / number.mean;
    r.check(
        "4 g2(0) consistent with 1 + Q_A/N̄",
        (g0 - predicted).abs() <= ZERO_LAG_MATCH,
        format!("measured {g0:.4} vs predicted {predicted:.4}"),
    );
    r.finish();
}

#[test]
fn criterion_5_super_poissonian_counting() {
    let mut r = Report::new();
    let cfg = fig1_config(2.5e7, SEED + 5);
    let (stream, _) = run_experiment(&cfg).unwrap();
    let times = stream.times();
    let stats = counting_stats(&times, 1.0, stream.duration).unwrap();
    r.check(
        "5 Q > 0 at 3 sigma",
        stats.q > SIGMAS * stats.sigma_q,
        format!("Q = {:.5} ± {:.5}", stats.q, stats.sigma_q),
    );
    let grid: Vec<f64> = (0..=10_000).map(|i| i as f64 / 10_000.0).collect();
    let curve = g2_beam(&cfg.atom, &cfg.beam, 0.0, &grid).unwrap();
    let q_int = mandel_q_from_g2(&curve, rate(&times, stream.duration), 1.0).unwrap();
    let rel = (stats.q - q_int).abs() / q_int;
    r.check(
        "5 counting Q agrees with the g2 integral",
        rel < Q_FORMULA_REL,
        format!(
            "counting {:.5} vs integral {q_int:.5} (rel {rel:.4})",
            stats.q
        ),
    );
    r.finish();
}

#[test]
fn criterion_6_phase_randomization() {
    let mut r = Report::new();
    let geom = ModeGeometry::new(780e-9, 35e-6, 1.0).unwrap();
    let window = 35e-6;
    // σ_vx·window = λ/4 so that std(Δφ) = π/2.
    let kin = KinematicParams::new(2.0, geom.lambda / 4.0 / window).unwrap();
    let s = excursion_stats(&geom, &kin, window, 100_000, &mut substream(SEED, 300)).unwrap();
    r.check(
        "6 std(Δφ) = π/2",
        (s.std - FRAC_PI_2).abs() <= SIGMAS * s.std_se,
        format!("std = {:.5} ± {:.5}", s.std, s.std_se),
    );
    r.check(
        "6 fraction |Δφ| >= π/2",
        (s.fraction_quarter_wave - QUARTER_WAVE_FRACTION).abs() <= SIGMAS * s.fraction_se,
        format!(
            "fraction = {:.5} ± {:.5}",
            s.fraction_quarter_wave, s.fraction_se
        ),
    );
    let t0 = transit_time(&geom, &kin);
    r.check(
        "6 transit time 35 us",
        t0 == 35e-6,
        format!("t0 = {t0:e} s"),
    );
    r.finish();
}

fn random_stream(rng: &mut ChaCha8Rng, n: usize, duration: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * duration).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn thin(times: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    times
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < 0.5)
        .collect()
}

#[test]
fn criterion_7_correlator_exactness() {
    let mut r = Report::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for _ in 0..100 {
        let na = rng.random_range(1..=1000);
        let nb = rng.random_range(1..=1000);
        let dur = rng.random_range(10.0..1000.0);
        let a = random_stream(&mut rng, na, dur);
        let b = random_stream(&mut rng, nb, dur);
        let bin = rng.random_range(0.01..1.0);
        let spec = HistogramSpec::new(bin, bin * rng.random_range(1..50) as f64).unwrap();
        let n = spec.n_bins();
        let mut brute = vec![0u64; n];
        for &x in &a {
            for &y in &b {
                let d = y - x;
                if d >= 0.0 {
                    let k = (d / bin).floor() as usize;
                    if k < n {
                        brute[k] += 1;
                    }
                }
            }
        }
        if pair_histogram(&a, &b, &spec) != brute {
            mismatches += 1;
        }
    }
    r.check(
        "7 sliding window equals brute force",
        mismatches == 0,
        format!("{mismatches} of 100 streams differ"),
    );

    // Poisson flatness: fraction of (trial, bin) estimates within 3σ of 1.
    let spec = HistogramSpec::new(0.1, 2.0).unwrap();
    let (mut inside, mut total) = (0usize, 0usize);
    for trial in 0..100u64 {
        let mut g = substream(SEED, 1000 + trial);
        let dur = 1e4;
        let a = random_stream(&mut g, 10_000, dur);
        let b = random_stream(&mut g, 10_000, dur);
        let cc = cross_correlation(&a, &b, &spec, dur).unwrap();
        for k in 0..cc.counts.len() {
            total += 1;
            if (cc.curve.g2[k] - 1.0).abs() < SIGMAS * cc.curve.sigma[k] {
                inside += 1;
            }
        }
    }
    let frac = inside as f64 / total as f64;
    r.check(
        "7 Poisson input is flat",
        frac >= 0.99,
        format!("{inside}/{total} bins within 3 sigma ({:.4})", frac),
    );

    // Thinning invariance on a bunched stream.
    let cfg = fig1_config(1e7, SEED + 7);
    let (stream, _) = run_experiment(&cfg).unwrap();
    let (a, b) = (stream.detector_times(0), stream.detector_times(1));
    let spec = HistogramSpec::new(0.05, 2.0).unwrap();
    let full = cross_correlation(&a, &b, &spec, stream.duration).unwrap();
    let mut g = substream(SEED + 7, 1 << 40);
    let (ta, tb) = (thin(&a, &mut g), thin(&b, &mut g));
    let half = cross_correlation(&ta, &tb, &spec, stream.duration).unwrap();
    let bad = (0..full.counts.len())
        .filter(|&k| {
            let sigma = half
                .model_sigma(k, full.curve.g2[k])
                .max(half.curve.sigma[k]);
            (half.curve.g2[k] - full.curve.g2[k]).abs() >= SIGMAS * sigma
        })
        .count();
    r.check(
        "7 thinning invariance",
        bad == 0,
        format!("{bad} of {} bins moved by >= 3 sigma", full.counts.len()),
    );
    r.finish();
}
