//! Subcommand implementations. Each returns the text for stdout; files are
//! written through [`write_file`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use g2beam::atomdyn::g2_atom;
use g2beam::beam::{atom_number_stats, envelope_overlap, sample_arrivals};
use g2beam::cavityphase::{sample_excursions, summarize, transit_time};
use g2beam::composite::{classify, figure1_curves, g2_beam, g2_with_background};
use g2beam::correlator::{counting_stats, cross_correlation};
use g2beam::montecarlo::{run_experiment, streams, substream, PhotonEvent};

use crate::config::RunConfig;
use crate::formats::{parse_timestamps, write_timestamps, CurveFile};
use crate::{CliError, Result};

// Arrival-process length, in transit times, for estimating Q_A when it has
// no closed form.
const Q_A_ESTIMATE_T0: f64 = 1e6;

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::parse(&read_file(p)?),
        None => Ok(RunConfig::default()),
    }
}

/// Atom-number Mandel Q: exact where known, otherwise estimated from a
/// simulated arrival sequence.
pub fn atom_q(cfg: &RunConfig) -> Result<f64> {
    if let Some(q) = cfg.beam.analytic_q_a() {
        return Ok(q);
    }
    let duration = Q_A_ESTIMATE_T0 * cfg.beam.t0;
    let arrivals = sample_arrivals(
        &cfg.beam,
        duration,
        &mut substream(cfg.seed, streams::ARRIVALS),
    )?;
    Ok(atom_number_stats(&arrivals, cfg.beam.t0, duration)?.q_a)
}

pub fn analytic(cfg: &RunConfig) -> Result<CurveFile> {
    let n = cfg.histogram.n_bins();
    let tau: Vec<f64> = (0..=n)
        .map(|k| k as f64 * cfg.histogram.bin_width)
        .collect();
    let atom = g2_atom(&cfg.atom, &tau)?;
    let overlap = envelope_overlap(&cfg.beam, &tau)?;
    let beam = g2_beam(&cfg.atom, &cfg.beam, atom_q(cfg)?, &tau)?;
    let bg = g2_with_background(&beam, &cfg.background);
    CurveFile::new(
        &["tau_over_t0", "g2_atom", "F", "g2_beam", "g2_beam_bg"],
        vec![
            tau.iter().map(|t| t / cfg.beam.t0).collect(),
            atom.g2,
            overlap.f,
            beam.g2,
            bg.g2,
        ],
    )
}

pub fn figure1() -> Result<CurveFile> {
    let tau: Vec<f64> = (0..=600).map(|i| i as f64 / 200.0).collect();
    let (upper, lower) = figure1_curves(&tau)?;
    CurveFile::new(
        &["tau_over_t0", "g2_nobg", "g2_bg05"],
        vec![tau, upper.g2, lower.g2],
    )
}

/// Run the experiment, write the timestamp file and return `key=value`
/// summary lines.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<String> {
    let (stream, s) = run_experiment(&cfg.experiment())?;
    write_file(out, &write_timestamps(&stream.events))?;
    let mut o = String::new();
    let _ = writeln!(o, "atoms={}", s.atoms);
    let _ = writeln!(o, "source_photons={}", s.source_photons);
    let _ = writeln!(o, "background_photons={}", s.background_photons);
    let _ = writeln!(o, "detected1={}", s.detected[0]);
    let _ = writeln!(o, "detected2={}", s.detected[1]);
    let _ = writeln!(o, "duration_s={}", s.duration);
    let _ = writeln!(o, "expected_source_rate={}", s.expected_source_rate);
    let _ = writeln!(o, "detected_rate1={}", s.detected_rate[0]);
    let _ = writeln!(o, "detected_rate2={}", s.detected_rate[1]);
    let _ = writeln!(o, "seed={}", s.metadata.seed);
    let _ = writeln!(o, "config_sha256={}", s.metadata.config_digest);
    Ok(o)
}

pub fn load_events(path: &Path) -> Result<Vec<PhotonEvent>> {
    parse_timestamps(&read_file(path)?, path)
}

/// Observation length: the configured run duration when a config sets it,
/// otherwise the last timestamp.
fn observation(cfg: &RunConfig, events: &[PhotonEvent]) -> Result<f64> {
    if cfg.is_explicit("sim.duration") {
        if let Some(e) = events.iter().rev().find(|e| e.time >= cfg.duration) {
            return Err(CliError::Config(format!(
                "timestamp {} lies beyond `sim.duration` = {}",
                e.time, cfg.duration
            )));
        }
        return Ok(cfg.duration);
    }
    match events.last() {
        Some(e) if e.time > 0.0 => Ok(e.time),
        _ => Err(g2beam::Error::Undefined("timestamp file spans no time".into()).into()),
    }
}

pub fn correlate(cfg: &RunConfig, events: &[PhotonEvent]) -> Result<CurveFile> {
    let duration = observation(cfg, events)?;
    let pick = |d: u8| -> Vec<f64> {
        events
            .iter()
            .filter(|e| e.detector == d)
            .map(|e| e.time)
            .collect()
    };
    let cc = cross_correlation(&pick(0), &pick(1), &cfg.histogram, duration)?;
    CurveFile::new(
        &["tau_s", "g2", "sigma"],
        vec![cc.curve.tau_grid, cc.curve.g2, cc.curve.sigma],
    )
}

pub fn stats(cfg: &RunConfig, events: &[PhotonEvent]) -> Result<String> {
    let duration = observation(cfg, events)?;
    let times: Vec<f64> = events.iter().map(|e| e.time).collect();
    let s = counting_stats(&times, cfg.stats_window, duration)?;
    let mut o = String::new();
    let _ = writeln!(o, "window_s={}", s.window);
    let _ = writeln!(o, "windows={}", s.windows);
    let _ = writeln!(o, "mean={}", s.mean);
    let _ = writeln!(o, "variance={}", s.variance);
    let _ = writeln!(o, "q={}", s.q);
    let _ = writeln!(o, "sigma_q={}", s.sigma_q);
    let _ = writeln!(o, "classification={}", classify(s.q, s.sigma_q));
    Ok(o)
}

/// Per-sample phase excursions as CSV, plus summary lines.
pub fn phase(cfg: &RunConfig) -> Result<(String, String)> {
    let samples = sample_excursions(
        &cfg.geometry,
        &cfg.kinematics,
        cfg.phase_window,
        cfg.phase_samples,
        &mut substream(cfg.seed, streams::PHASE),
    )?;
    let mut csv = String::from("x0_m,vx_m_per_s,delta_phi_rad,sign_flips\n");
    for s in &samples {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            s.trajectory.r0[0], s.trajectory.v[0], s.excursion.delta_phi, s.excursion.sign_flips
        );
    }
    let phases: Vec<f64> = samples.iter().map(|s| s.excursion.delta_phi).collect();
    let st = summarize(&phases)?;
    let mut o = String::new();
    let _ = writeln!(o, "samples={}", st.samples);
    let _ = writeln!(
        o,
        "transit_time_s={}",
        transit_time(&cfg.geometry, &cfg.kinematics)
    );
    let _ = writeln!(o, "mean_rad={}", st.mean);
    let _ = writeln!(o, "std_rad={}", st.std);
    let _ = writeln!(o, "std_se_rad={}", st.std_se);
    let _ = writeln!(o, "fraction_quarter_wave={}", st.fraction_quarter_wave);
    let _ = writeln!(o, "fraction_se={}", st.fraction_se);
    Ok((csv, o))
}
