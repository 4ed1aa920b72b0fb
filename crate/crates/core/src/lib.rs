//! Stochastic SIQS epidemic model with stochastic transmission and Lévy jumps.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameter containers, validation and the finite jump measure.
//! - [`deterministic`]: the noise-free ODE system, R0 and its equilibria.
//! - [`thresholds`]: closed-form stochastic thresholds, margins and bounds.
//! - [`sde`]: Euler–Maruyama path simulation with compensated compound Poisson
//!   jumps and replayable noise, plus the dominating auxiliary process.
//! - [`stats`]: time averages, extinction exponents, histograms, moment checks.
//! - [`mc`]: reproducible parallel ensembles.
//! - [`io`]: CSV/JSON writers shared by the CLI and tests.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deterministic;
pub mod error;
pub mod io;
pub mod mc;
pub mod model;
pub mod presets;
pub mod sde;
pub mod stats;
pub mod thresholds;

pub use error::{Error, Result};
pub use model::{
    JumpAtom, LevyMeasure, ModelParams, NoiseParams, PathOutput, State, TimeGrid,
    ValidationReport,
};
pub use sde::NoiseRecord;
pub use thresholds::ThresholdReport;
