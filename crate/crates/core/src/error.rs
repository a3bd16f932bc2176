use crate::model::PairKind;
use thiserror::Error;

/// Validation and estimation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma must lie in [0, 1], got {0}")]
    GammaOutOfRange(f64),

    #[error("xi weight table for pair {pair} contains a negative weight {weight}")]
    NegativeXiWeight { pair: PairKind, weight: f64 },

    #[error("xi weight table for pair {pair} sums to {sum}, expected 1 within 1e-12")]
    XiWeightsNotNormalized { pair: PairKind, sum: f64 },

    #[error("chunk size must be at least 1")]
    InvalidChunkSize,

    #[error("sweep grid needs at least 2 points, got {0}")]
    TooFewSteps(usize),

    #[error("sweep needs at least one gamma value")]
    NoGammas,

    #[error("sweep bounds must be finite with theta_min <= theta_max")]
    InvalidSweepBounds,

    #[error("no events recorded for settings pair {pair}")]
    InsufficientData { pair: PairKind },
}
