//! End-to-end stochastic experiment: per-atom quantum-jump photon streams from
//! a random beam, added background light, and a beamsplitter feeding two
//! detectors (Hanbury Brown–Twiss arrangement).
//!
//! Every random decision draws from its own ChaCha substream keyed by
//! `(seed, stream id)`. Atom `k` uses stream [`streams::ATOM_BASE`]` + k`, so the
//! output does not depend on how transits are scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::atomdyn::{
    expected_emissions, sample_emission_times, AtomParams, ConstantDrive, GaussianPulse,
    JumpSampler,
};
use crate::beam::{sample_arrivals, ArrivalModel, BeamParams, EnvelopeShape};
use crate::composite::BackgroundModel;
use crate::error::{require_nonnegative, require_positive};
use crate::{Error, Result};

/// Substream identifiers.
pub mod streams {
    pub const ARRIVALS: u64 = 0;
    pub const BACKGROUND: u64 = 1;
    pub const ROUTING: u64 = 2;
    pub const PHASE: u64 = 3;
    pub const ATOM_BASE: u64 = 16;
}

/// Generator for substream `id` of `seed`.
pub fn substream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const ATOMS_PER_TASK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Quantum efficiency η.
    pub efficiency: f64,
    /// Dark count rate [1/s].
    pub dark_rate: f64,
    /// Non-paralyzable dead time [s].
    pub dead_time: f64,
}

impl DetectorParams {
    pub const IDEAL: DetectorParams = DetectorParams {
        efficiency: 1.0,
        dark_rate: 0.0,
        dead_time: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        require_nonnegative("efficiency", self.efficiency)?;
        if self.efficiency > 1.0 {
            return Err(Error::invalid("efficiency", "must be <= 1"));
        }
        require_nonnegative("dark_rate", self.dark_rate)?;
        require_nonnegative("dead_time", self.dead_time)
    }
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonEvent {
    pub time: f64,
    /// 0 for D1, 1 for D2.
    pub detector: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StreamMetadata {
    /// SHA-256 of the canonical configuration text, hex encoded.
    pub config_digest: String,
    pub seed: u64,
}

/// Time-ordered detection records of both detectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhotonStream {
    pub events: Vec<PhotonEvent>,
    pub duration: f64,
    pub metadata: StreamMetadata,
}

impl PhotonStream {
    pub fn detector_times(&self, detector: u8) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.detector == detector)
            .map(|e| e.time)
            .collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.events.iter().enumerate() {
            if !(e.time >= 0.0 && e.time < self.duration) {
                return Err(Error::OutOfRange(format!(
                    "event {i} at {} outside [0, {})",
                    e.time, self.duration
                )));
            }
            if e.detector > 1 {
                return Err(Error::invalid(
                    "detector",
                    format!("label {} at event {i}", e.detector),
                ));
            }
        }
        if self.events.windows(2).any(|w| w[1].time < w[0].time) {
            return Err(Error::invalid("events", "times must be nondecreasing"));
        }
        Ok(())
    }
}

/// Emission window of one transit relative to the atom's entry time, and the
/// drive amplitude inside it.
fn transit_window(beam: &BeamParams) -> (f64, f64) {
    match beam.envelope {
        EnvelopeShape::TopHat => (0.0, beam.t0),
        // ±1.5 t0 about mid-transit: the field amplitude there is e^{-9}.
        EnvelopeShape::Gaussian => (-beam.t0, 2.0 * beam.t0),
    }
}

fn transit_pulse(beam: &BeamParams) -> GaussianPulse {
    let (lo, _) = transit_window(beam);
    GaussianPulse {
        center: 0.5 * beam.t0 - lo,
        t0: beam.t0,
    }
}

/// Mean photons emitted per atom transit.
pub fn expected_emissions_per_transit(atom: &AtomParams, beam: &BeamParams) -> Result<f64> {
    let (lo, hi) = transit_window(beam);
    match beam.envelope {
        EnvelopeShape::TopHat => expected_emissions(atom, &ConstantDrive(1.0), hi - lo),
        EnvelopeShape::Gaussian => expected_emissions(atom, &transit_pulse(beam), hi - lo),
    }
}

/// Predicted mean emission rate of the source,
/// `N̄/t0 · (photons per transit)`.
pub fn expected_source_rate(atom: &AtomParams, beam: &BeamParams) -> Result<f64> {
    Ok(beam.rate() * expected_emissions_per_transit(atom, beam)?)
}

/// Source emissions together with the atom entry times that produced them.
/// Entry times start before zero for atoms already inside the mode at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRecord {
    pub emissions: Vec<f64>,
    pub arrivals: Vec<f64>,
}

/// Sorted photon emission times in `[0, duration)` from the whole beam.
///
/// Arrivals start early enough that atoms already inside the mode at `t = 0`
/// are included, so the stream is stationary from the first instant.
pub fn simulate_source(
    atom: &AtomParams,
    beam: &BeamParams,
    duration: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(simulate_source_record(atom, beam, duration, seed)?.emissions)
}

pub fn simulate_source_record(
    atom: &AtomParams,
    beam: &BeamParams,
    duration: f64,
    seed: u64,
) -> Result<SourceRecord> {
    atom.validate()?;
    beam.validate()?;
    require_positive("duration", duration)?;
    if duration < 100.0 * beam.t0 {
        return Err(Error::invalid(
            "duration",
            "must be at least 100 transit times",
        ));
    }
    let (lo, hi) = transit_window(beam);
    let span = hi - lo;
    let mut rng = substream(seed, streams::ARRIVALS);
    let arrivals: Vec<f64> = sample_arrivals(beam, duration + span, &mut rng)?
        .into_iter()
        .map(|t| t - hi)
        .collect();
    if atom.omega == 0.0 {
        return Ok(SourceRecord {
            emissions: Vec::new(),
            arrivals,
        });
    }

    let sampler = match beam.envelope {
        EnvelopeShape::TopHat => Some(JumpSampler::new(atom, 1.0, span)?),
        EnvelopeShape::Gaussian => None,
    };
    let pulse = transit_pulse(beam);

    let chunks: Vec<Vec<f64>> = arrivals
        .par_chunks(ATOMS_PER_TASK)
        .enumerate()
        .map(|(c, chunk)| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            for (i, &arrival) in chunk.iter().enumerate() {
                let index = (c * ATOMS_PER_TASK + i) as u64;
                let mut rng = substream(seed, streams::ATOM_BASE + index);
                let start = arrival + lo;
                let local = match &sampler {
                    Some(s) => s.sample(span, &mut rng)?,
                    None => sample_emission_times(atom, &pulse, span, &mut rng)?,
                };
                out.extend(
                    local
                        .into_iter()
                        .map(|t| start + t)
                        .filter(|&t| (0.0..duration).contains(&t)),
                );
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut emissions: Vec<f64> = chunks.into_iter().flatten().collect();
    emissions.sort_unstable_by(f64::total_cmp);
    Ok(SourceRecord {
        emissions,
        arrivals,
    })
}

fn poisson_times<R: Rng + ?Sized>(rate: f64, duration: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let gap = Exp::new(rate).expect("positive finite rate");
    let mut t = gap.sample(rng);
    while t < duration {
        out.push(t);
        t += gap.sample(rng);
    }
    out
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Merge an independent Poisson background of rate `b·signal_rate`.
pub fn add_background<R: Rng + ?Sized>(
    times: &[f64],
    b: f64,
    signal_rate: f64,
    duration: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    require_nonnegative("ratio", b)?;
    require_nonnegative("signal_rate", signal_rate)?;
    require_positive("duration", duration)?;
    if b == 0.0 {
        return Ok(times.to_vec());
    }
    Ok(merge_sorted(
        times,
        &poisson_times(b * signal_rate, duration, rng),
    ))
}

fn apply_dead_time(times: &mut Vec<f64>, dead_time: f64) {
    if dead_time <= 0.0 {
        return;
    }
    let mut last = f64::NEG_INFINITY;
    times.retain(|&t| {
        if t - last >= dead_time {
            last = t;
            true
        } else {
            false
        }
    });
}

/// Route each photon to D1 or D2 with probability 1/2, keep it with the
/// detector's efficiency, add dark counts, then apply each detector's dead
/// time.
pub fn hbt_split<R: Rng + ?Sized>(
    times: &[f64],
    d1: &DetectorParams,
    d2: &DetectorParams,
    duration: f64,
    rng: &mut R,
) -> Result<PhotonStream> {
    d1.validate().map_err(|e| e.in_section("detector1"))?;
    d2.validate().map_err(|e| e.in_section("detector2"))?;
    require_positive("duration", duration)?;
    let dets = [d1, d2];
    let mut per: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for &t in times {
        // Both draws are always taken so that changing an efficiency thins
        // the same realization.
        let which = usize::from(rng.random::<f64>() >= 0.5);
        let keep = rng.random::<f64>() < dets[which].efficiency;
        if keep {
            per[which].push(t);
        }
    }
    for (k, det) in dets.iter().enumerate() {
        let dark = poisson_times(det.dark_rate, duration, rng);
        per[k] = merge_sorted(&per[k], &dark);
        apply_dead_time(&mut per[k], det.dead_time);
    }
    let mut events: Vec<PhotonEvent> = per[0]
        .iter()
        .map(|&time| PhotonEvent { time, detector: 0 })
        .chain(per[1].iter().map(|&time| PhotonEvent { time, detector: 1 }))
        .collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.detector.cmp(&b.detector)));
    Ok(PhotonStream {
        events,
        duration,
        metadata: StreamMetadata::default(),
    })
}

/// Everything needed to run one simulated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub atom: AtomParams,
    pub beam: BeamParams,
    pub background: BackgroundModel,
    pub detectors: [DetectorParams; 2],
    pub duration: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.atom.validate().map_err(|e| e.in_section("atom"))?;
        self.beam.validate().map_err(|e| e.in_section("beam"))?;
        require_nonnegative("ratio", self.background.b).map_err(|e| e.in_section("background"))?;
        self.detectors[0]
            .validate()
            .map_err(|e| e.in_section("detector1"))?;
        self.detectors[1]
            .validate()
            .map_err(|e| e.in_section("detector2"))?;
        require_positive("duration", self.duration).map_err(|e| e.in_section("sim"))?;
        if self.duration < 100.0 * self.beam.t0 {
            return Err(Error::invalid(
                "sim.duration",
                format!("must be at least 100·beam.t0 = {}", 100.0 * self.beam.t0),
            ));
        }
        Ok(())
    }

    /// Canonical `key = value` text; its hash identifies the run.
    pub fn canonical_text(&self) -> String {
        let (model, dead) = match self.beam.arrival_model {
            ArrivalModel::Poisson => ("poisson", 0.0),
            ArrivalModel::DeadTime { delta } => ("deadtime", delta),
        };
        let envelope = match self.beam.envelope {
            EnvelopeShape::TopHat => "tophat",
            EnvelopeShape::Gaussian => "gaussian",
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("atom.beta", self.atom.beta.to_string());
        put("atom.omega", self.atom.omega.to_string());
        put("atom.delta", self.atom.delta.to_string());
        put("beam.nbar", self.beam.nbar.to_string());
        put("beam.t0", self.beam.t0.to_string());
        put("beam.arrival_model", model.to_string());
        put("beam.dead_time", dead.to_string());
        put("beam.envelope", envelope.to_string());
        put("background.ratio", self.background.b.to_string());
        for (i, d) in self.detectors.iter().enumerate() {
            put(
                &format!("detector{}.efficiency", i + 1),
                d.efficiency.to_string(),
            );
            put(
                &format!("detector{}.dark_rate", i + 1),
                d.dark_rate.to_string(),
            );
            put(
                &format!("detector{}.dead_time", i + 1),
                d.dead_time.to_string(),
            );
        }
        put("sim.duration", self.duration.to_string());
        put("sim.seed", self.seed.to_string());
        s
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

/// Bookkeeping of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub atoms: usize,
    pub source_photons: usize,
    pub background_photons: usize,
    pub detected: [usize; 2],
    pub duration: f64,
    pub expected_source_rate: f64,
    /// `detected[k] / duration`.
    pub detected_rate: [f64; 2],
    pub metadata: StreamMetadata,
}

/// Run the full pipeline. The output is a deterministic function of the
/// configuration and seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(PhotonStream, ExperimentSummary)> {
    cfg.validate()?;
    let source = simulate_source_record(&cfg.atom, &cfg.beam, cfg.duration, cfg.seed)?;
    let signal_rate = expected_source_rate(&cfg.atom, &cfg.beam)?;
    let merged = add_background(
        &source.emissions,
        cfg.background.b,
        signal_rate,
        cfg.duration,
        &mut substream(cfg.seed, streams::BACKGROUND),
    )?;
    let mut stream = hbt_split(
        &merged,
        &cfg.detectors[0],
        &cfg.detectors[1],
        cfg.duration,
        &mut substream(cfg.seed, streams::ROUTING),
    )?;
    stream.metadata = StreamMetadata {
        config_digest: cfg.digest(),
        seed: cfg.seed,
    };
    let detected = [
        stream.events.iter().filter(|e| e.detector == 0).count(),
        stream.events.iter().filter(|e| e.detector == 1).count(),
    ];
    let summary = ExperimentSummary {
        atoms: source.arrivals.len(),
        source_photons: source.emissions.len(),
        background_photons: merged.len() - source.emissions.len(),
        detected,
        duration: cfg.duration,
        expected_source_rate: signal_rate,
        detected_rate: [
            detected[0] as f64 / cfg.duration,
            detected[1] as f64 / cfg.duration,
        ],
        metadata: stream.metadata.clone(),
    };
    Ok((stream, summary))
}
