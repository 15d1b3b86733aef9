use alloc::boxed::Box;
use alloc::string::String;

use crate::weather::OuParams;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("non-finite value at step {step}, column {column}")]
    NonFinite { step: usize, column: usize },

    #[error("fitted seasonality is not positive at day {day} (s = {value})")]
    NonPositiveSeasonality { day: u16, value: f64 },

    #[error("capacity factor {value} at step {step}, region {region} is outside [0, 1)")]
    DomainError {
        step: usize,
        region: usize,
        value: f64,
    },

    #[error("AR(1) slope {slope} for region {region} is outside (0, 1)")]
    NonStationary { region: usize, slope: f64 },

    #[error("jump moment system has no nonnegative solution (least-squares fallback residual {residual:e})")]
    MomentMatchFailure {
        fallback: Box<OuParams>,
        residual: f64,
    },

    #[error("temperature fit for region {region} is not stationary: {reason}")]
    NonStationaryFit { region: usize, reason: &'static str },

    #[error("load regression for region {region} is rank deficient: {reason}")]
    RankDeficient { region: usize, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("penalty aggregation needs a 365-step trace, got {got}")]
    WrongHorizon { got: usize },

    #[error("loss surface is empty")]
    EmptySurface,

    #[error("surfaces are defined on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
