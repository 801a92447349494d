use thiserror::Error;

/// Errors produced by dataset validation, grid construction, and scans.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dataset length mismatch: {points} points vs {measured} measured values")]
    LengthMismatch { points: usize, measured: usize },

    #[error("measured value {value} at index {index} is not valid for the {model} model")]
    ModelMismatch {
        model: &'static str,
        index: usize,
        value: f64,
    },

    #[error("point ({x}, {y}) at index {index} lies outside the domain")]
    PointOutsideDomain { index: usize, x: f64, y: f64 },

    #[error("grid would contain {requested} centers, exceeding the cap of {cap}")]
    GridTooLarge { requested: u64, cap: u64 },

    #[error("rates place a per-point rate exactly on {0}; likelihood is undefined there")]
    RateAtBoundary(&'static str),

    #[error("{op} requires the {expected} model, got {actual}")]
    WrongModel {
        op: &'static str,
        expected: &'static str,
        actual: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
