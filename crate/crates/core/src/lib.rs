//! Stochastic weather-year synthesis and reactive flexibility dispatch for a
//! two-node wind power system.
//!
//! The crate is `no_std` and needs only `alloc`. It covers:
//!
//! * [`weather`]: seasonal Ornstein–Uhlenbeck capacity-factor model driven by
//!   compound-Poisson exponential jumps (estimation and simulation).
//! * [`demand`]: deseasonalised AR(3) temperatures and the weekday/degree-day
//!   load regression.
//! * [`dispatch`]: the four flexibility scenarios (no-flex, trans, stor,
//!   full-flex) with per-step quadratic mismatch losses.
//! * [`sweep`]: Monte Carlo loss surfaces over capacity grids, optima,
//!   dominance maps and sensitivity runs.
//!
//! File formats, the command line and the thread pool live in the `windflex`
//! crate.
#![no_std]
// node and lag loops index several parallel arrays at once; `!(x > 0.0)`
// deliberately rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calendar;
pub mod demand;
pub mod dispatch;
mod error;
pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod stats;
pub mod sweep;
pub mod weather;

pub use error::{Error, Result};
pub use matrix::Matrix;
