//! Channel-estimation laboratory for block-pilot OFDM.
//!
//! The centerpiece is an LMMSE estimator that picks its own frequency-correlation
//! parameters: every candidate correlation in a parameter set is scored by how well
//! MMSE interpolation built from it reproduces the LS estimates themselves (the
//! sampled noise MSE), and the best-scoring candidate drives the final filter.
//!
//! Modules, bottom-up:
//!
//! - [`ofdm`] and [`channel`]: subcarrier grid, tapped-delay WSSUS channels, STO/CFO
//!   impairments and pilot observations.
//! - [`correlation`]: PDP to correlation transforms, robust/STO-aware/estimated
//!   candidates and parameter sets.
//! - [`linalg`] and [`estimators`]: Hermitian solves, LS, LMMSE, MMSE interpolation
//!   and mismatched-correlation MSE.
//! - [`selector`]: the full and split evaluation indexes, parameter comparison and
//!   the enhanced LMMSE pipeline.
//! - [`theory`]: false-comparison probability, fuzzy bound, average-gain bound.
//! - [`experiment`]: seeded Monte Carlo campaigns, CSV reports and traces.

pub mod channel;
pub mod correlation;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod linalg;
pub mod ofdm;
pub mod rng;
pub mod selector;
pub mod theory;

pub use num_complex::Complex64;

pub use channel::{ChannelModel, ChannelRealization, PilotObservation};
pub use correlation::{CorrelationVector, ParameterSet, PowerDelayProfile, StoDistribution};
pub use error::{Error, Result};
pub use ofdm::OfdmConfig;
pub use selector::{IndexMethod, SelectionReport};

/// Shorthand used throughout the crate.
pub type C64 = Complex64;
