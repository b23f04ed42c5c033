//! Collective Rayleigh scattering of one or two driven emitters in a
//! single-mode optical cavity.
//!
//! The crate is split along the physics pipeline:
//!
//! * [`params`] holds the physical parameter set, unit conversion at the
//!   config boundary and derived quantities (cooperativity, mode volume,
//!   drive amplitudes).
//! * [`classical`] is the closed-form round-trip model of driven dipoles
//!   radiating into the cavity mode.
//! * [`quantum`] is the two-atom Tavis-Cummings master equation in the Dicke
//!   basis and its steady state.
//! * [`trace`] synthesizes binned photon-count traces from a telegraph
//!   process between the constructive and destructive atom patterns.
//! * [`hmm`] recovers state posteriors and jump rates from such traces with a
//!   two-state Poisson hidden Markov model.
//!
//! All internal frequencies are angular (rad/s) and all lengths are in
//! metres. Ordinary frequencies in MHz only appear in [`params::RawConfig`].

pub mod classical;
pub mod csv;
pub mod error;
pub mod hmm;
pub mod params;
pub mod quantum;
pub mod trace;

pub use classical::{CollectiveCouplings, FieldResult};
pub use error::{Error, Result};
pub use hmm::{HmmModel, HmmResult};
pub use params::{AtomConfig, RawConfig, SystemParams};
pub use quantum::{HilbertSpace, SteadyState};
pub use trace::{PhotonTrace, TelegraphModel};
