//! Model-agnostic risk calibration toolkit.
//!
//! Given a matrix of bounded losses evaluated on a calibration set over a
//! grid of tuning parameters, this crate certifies the subset of parameters
//! whose risk is controlled at a user-chosen level `(alpha, delta)` via
//! finite-sample multiple hypothesis testing, and selects a deployable
//! parameter from that subset.
//!
//! The pipeline is: load a [`loss::LossTensor`] and [`grid::ParameterGrid`],
//! convert empirical risks into per-hypothesis p-values ([`pvalues`]), run a
//! family-wise-error-rate controlling procedure ([`fwer`]) to obtain the
//! certified set, and pick an element of it ([`select`]). A uniform
//! concentration baseline lives in [`uniform`], and Monte Carlo validation
//! harnesses in [`sim`].

pub mod error;
pub mod fwer;
pub mod grid;
pub mod loss;
pub mod math;
pub mod pvalues;
pub mod report;
pub mod select;
pub mod sim;
pub mod uniform;

pub use error::{Error, Result};

/// Tool version embedded in reports for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
