//! Experiment harness for `relaxsim-core`: file formats, configuration,
//! seeded batch runs and the statistics behind the scaling experiments.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod stats;

pub use error::{HarnessError, Result};
