//! Estimation of Bell-diagonal entangled states from the statistics of
//! recurrence-type entanglement distillation.
//!
//! The crate models the three distillation protocols on Bell vectors
//! ([`bellvec`], [`protocols`]), simulates seeded experiments with stochastic
//! storage delays ([`experiment`]), inverts the observed success rates into
//! state estimates with Hoeffding failure bounds ([`estimator`]) and carries
//! a dense density-matrix reference model for cross-checks ([`oracle`]).

pub mod bellvec;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod oracle;
pub mod protocols;

pub use bellvec::{Basis, BellVector, JointBellVector, NoiseModel, Party, PartyNoise};
pub use error::{Error, Result};
pub use estimator::EstimateReport;
pub use experiment::{ExperimentConfig, ExperimentLog, Parameterization, SuccessCurve};
pub use protocols::Protocol;
