//! File formats, configuration, parallel execution and the command line for
//! `windflex-core`.
//!
//! * [`ingest`]: validated daily CSV series (capacity factors, temperature,
//!   load) on a 365-day calendar.
//! * [`params`]: JSON parameter files and the shipped defaults.
//! * [`config`]: flat TOML project configuration with unit-suffixed keys.
//! * [`fixtures`]: deterministic synthetic input data and its ground truth.
//! * [`output`]: CSV writers for surfaces, dominance maps, sensitivity
//!   tables, traces and plot data.
//! * [`parallel`], [`checkpoint`]: thread-pool sweeps that can be resumed.
//! * [`cli`]: the `windflex` command.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod fixtures;
pub mod ingest;
pub mod output;
pub mod parallel;
pub mod params;

pub use error::{IoError, Result};
