//! Flat `key = value` run configuration.
//!
//! ```text
//! # dead-time beam, 35 us transit
//! atom.beta = 2857.142857142857
//! beam.arrival_model = deadtime
//! beam.dead_time = 7e-5
//! ```
//!
//! Every key has a default; a file only lists what it changes.

use std::collections::BTreeMap;

use g2beam::atomdyn::AtomParams;
use g2beam::beam::{ArrivalModel, BeamParams, EnvelopeShape};
use g2beam::cavityphase::{KinematicParams, ModeGeometry};
use g2beam::composite::BackgroundModel;
use g2beam::correlator::HistogramSpec;
use g2beam::montecarlo::{DetectorParams, ExperimentConfig};

use crate::{CliError, Result};

const T0: f64 = 35e-6;
const LAMBDA: f64 = 780e-9;

fn defaults() -> Vec<(&'static str, String)> {
    let f = |x: f64| x.to_string();
    vec![
        ("atom.beta", f(0.1 / T0)),
        ("atom.omega", f(25.0 / T0)),
        ("atom.delta", f(0.0)),
        ("beam.nbar", f(0.1)),
        ("beam.t0", f(T0)),
        ("beam.arrival_model", "poisson".into()),
        ("beam.dead_time", f(0.0)),
        ("beam.envelope", "tophat".into()),
        ("background.ratio", f(0.0)),
        ("detector1.efficiency", f(1.0)),
        ("detector1.dark_rate", f(0.0)),
        ("detector1.dead_time", f(0.0)),
        ("detector2.efficiency", f(1.0)),
        ("detector2.dark_rate", f(0.0)),
        ("detector2.dead_time", f(0.0)),
        ("sim.duration", f(1e5 * T0)),
        ("sim.seed", "1".into()),
        ("corr.bin_width", f(0.01 * T0)),
        ("corr.max_lag", f(2.0 * T0)),
        ("stats.window", f(T0)),
        ("geometry.lambda", f(LAMBDA)),
        ("geometry.w0", f(35e-6)),
        ("geometry.vz", f(2.0)),
        ("geometry.sigma_vx", f(LAMBDA / (4.0 * T0))),
        ("phase.window", f(T0)),
        ("phase.samples", "10000".into()),
    ]
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub atom: AtomParams,
    pub beam: BeamParams,
    pub background: BackgroundModel,
    pub detectors: [DetectorParams; 2],
    pub duration: f64,
    pub seed: u64,
    pub histogram: HistogramSpec,
    pub stats_window: f64,
    pub geometry: ModeGeometry,
    pub kinematics: KinematicParams,
    pub phase_window: f64,
    pub phase_samples: usize,
    /// Keys set explicitly by the parsed text.
    pub explicit: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::parse("").expect("defaults are valid")
    }
}

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: {reason}"))
}

struct Values(BTreeMap<&'static str, String>);

impl Values {
    fn raw(&self, key: &str) -> &str {
        &self.0[key]
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self
            .raw(key)
            .parse()
            .map_err(|_| bad(key, format!("`{}` is not a number", self.raw(key))))?;
        if !v.is_finite() {
            return Err(bad(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if v <= 0.0 {
            return Err(bad(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn u64(&self, key: &str) -> Result<u64> {
        self.raw(key).parse().map_err(|_| {
            bad(
                key,
                format!("`{}` is not a non-negative integer", self.raw(key)),
            )
        })
    }
}

fn scoped(section: &str) -> impl Fn(g2beam::Error) -> CliError + '_ {
    move |e| match e.in_section(section) {
        g2beam::Error::InvalidParameter { key, reason } => bad(&key, reason),
        other => CliError::Model(other),
    }
}

impl RunConfig {
    /// Parse config text over the defaults. Unknown or repeated keys and
    /// out-of-domain values are rejected with the key named.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<&'static str, String> = defaults().into_iter().collect();
        let mut explicit = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let Some((&k, _)) = values.get_key_value(key) else {
                return Err(CliError::Config(format!(
                    "line {}: unknown key `{key}`",
                    n + 1
                )));
            };
            if explicit.iter().any(|e| e == key) {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    n + 1
                )));
            }
            explicit.push(key.to_string());
            values.insert(k, value.to_string());
        }
        Self::build(&Values(values), explicit)
    }

    fn build(v: &Values, explicit: Vec<String>) -> Result<Self> {
        let atom = AtomParams::new(
            v.f64("atom.beta")?,
            v.f64("atom.omega")?,
            v.f64("atom.delta")?,
        )
        .map_err(scoped("atom"))?;

        let dead_time = v.f64("beam.dead_time")?;
        let arrival_model = match v.raw("beam.arrival_model") {
            "poisson" if dead_time == 0.0 => ArrivalModel::Poisson,
            "poisson" => return Err(bad("beam.dead_time", "must be 0 for poisson arrivals")),
            "deadtime" => ArrivalModel::DeadTime { delta: dead_time },
            other => {
                return Err(bad(
                    "beam.arrival_model",
                    format!("`{other}` is not poisson|deadtime"),
                ))
            }
        };
        let envelope = match v.raw("beam.envelope") {
            "tophat" => EnvelopeShape::TopHat,
            "gaussian" => EnvelopeShape::Gaussian,
            other => {
                return Err(bad(
                    "beam.envelope",
                    format!("`{other}` is not tophat|gaussian"),
                ))
            }
        };
        let beam = BeamParams::new(
            v.f64("beam.nbar")?,
            v.f64("beam.t0")?,
            arrival_model,
            envelope,
        )
        .map_err(scoped("beam"))?;

        let background =
            BackgroundModel::new(v.f64("background.ratio")?).map_err(scoped("background"))?;

        let mut detectors = [DetectorParams::IDEAL; 2];
        for (i, d) in detectors.iter_mut().enumerate() {
            let s = format!("detector{}", i + 1);
            *d = DetectorParams {
                efficiency: v.f64(&format!("{s}.efficiency"))?,
                dark_rate: v.f64(&format!("{s}.dark_rate"))?,
                dead_time: v.f64(&format!("{s}.dead_time"))?,
            };
            d.validate().map_err(scoped(&s))?;
        }

        let duration = v.f64("sim.duration")?;
        let seed = v.u64("sim.seed")?;
        let experiment = ExperimentConfig {
            atom,
            beam,
            background,
            detectors,
            duration,
            seed,
        };
        experiment.validate().map_err(scoped_experiment)?;

        let histogram = HistogramSpec::new(v.f64("corr.bin_width")?, v.f64("corr.max_lag")?)
            .map_err(scoped("corr"))?;
        let stats_window = v.positive("stats.window")?;

        let geometry = ModeGeometry::new(v.f64("geometry.lambda")?, v.f64("geometry.w0")?, 1.0)
            .map_err(scoped("geometry"))?;
        let kinematics = KinematicParams::new(v.f64("geometry.vz")?, v.f64("geometry.sigma_vx")?)
            .map_err(scoped("geometry"))?;
        let phase_window = v.positive("phase.window")?;
        let phase_samples = v.u64("phase.samples")?;
        if phase_samples < 2 {
            return Err(bad("phase.samples", "need at least 2 samples"));
        }

        Ok(RunConfig {
            atom,
            beam,
            background,
            detectors,
            duration,
            seed,
            histogram,
            stats_window,
            geometry,
            kinematics,
            phase_window,
            phase_samples: phase_samples as usize,
            explicit,
        })
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            atom: self.atom,
            beam: self.beam,
            background: self.background,
            detectors: self.detectors,
            duration: self.duration,
            seed: self.seed,
        }
    }
}

// Experiment validation already reports fully scoped keys.
fn scoped_experiment(e: g2beam::Error) -> CliError {
    match e {
        g2beam::Error::InvalidParameter { key, reason } => bad(&key, reason),
        other => CliError::Model(other),
    }
}
