//! Finite-difference spectra of confined charged three-body systems and the
//! quasi-collision analysis built on them.

pub mod analysis;
pub mod config;
pub mod control;
pub mod eigensolve;
pub mod error;
pub mod grid;
pub mod operators;
pub mod output;
pub mod pipeline;
pub mod potentials;
pub mod quasistatic;
pub mod spectrum;
pub mod sweeps;
pub mod units;

pub use error::{Error, Result};
