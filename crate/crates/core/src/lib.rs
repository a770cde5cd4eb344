//! Secret-key rate model for phase-coding BB84 QKD built on an unbalanced
//! Mach-Zehnder interferometer whose long-arm phase modulator is lossy.
//!
//! The crate compares three security treatments of the same hardware:
//!
//! * a naive treatment that hands the long-arm attenuation to the eavesdropper,
//! * a virtual-source treatment that rewrites the lossy source as a standard
//!   BB84 source followed by a basis-independent unitary,
//! * active compensation with a matching attenuator in both short arms,
//!
//! plus the ideal (lossless modulator) reference. [`source_model`] holds the
//! photon-number statistics, [`channel`] the fiber/detector model,
//! [`keyrate`] the per-scenario bounds and GLLP rate, [`analysis`] the
//! distance sweeps and optimizers, and [`cli`] the configuration and
//! CSV surface used by the `umzi-qkd` binary.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod keyrate;
pub mod source_model;

pub use analysis::{max_distance, optimize_mu, sweep, MuOptimum, ScenarioSeries, SweepConfig, SweepResult};
pub use channel::{ChannelParams, LinkBudget};
pub use error::ModelError;
pub use keyrate::{secure_key_rate, Scenario, ScenarioRates};
pub use source_model::{InterferometerParams, PhotonNumberDistribution, UnbalancedQubit};
