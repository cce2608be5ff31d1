//! Photon statistics of resonance fluorescence from a stochastic beam of
//! two-level atoms.
//!
//! The crate is split along the physics:
//!
//! * [`atomdyn`]: single-atom optical Bloch dynamics, the single-atom
//!   intensity correlation `g_A²(τ)` and quantum-jump emission sampling.
//! * [`beam`]: atom arrival processes, atom-number statistics and transit
//!   envelope overlaps.
//! * [`composite`]: the analytic multi-atom `g²(τ)`, background dilution,
//!   Mandel Q from a correlation curve and sub/super-Poissonian classification.
//! * [`montecarlo`]: the end-to-end stochastic experiment (source, background,
//!   beamsplitter and detectors).
//! * [`correlator`]: timestamp analysis, i.e. the cross-correlation estimator
//!   and counting statistics.
//! * [`cavityphase`]: standing-wave mode geometry and the phase excursions of
//!   the emitted field caused by atomic motion.

pub mod atomdyn;
pub mod beam;
pub mod cavityphase;
pub mod composite;
pub mod correlator;
mod error;
pub mod montecarlo;
mod ode;
mod quad;

pub use error::{Error, Result};
