use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window lo={lo:?} hi={hi:?}: sides must be finite and strictly positive")]
    InvalidWindow { lo: [f64; 2], hi: [f64; 2] },
    #[error("point ({x}, {y}) lies outside the window")]
    OutsideWindow { x: f64, y: f64 },
    #[error("boundary point ({x}, {y}) lies inside the window")]
    BoundaryInsideWindow { x: f64, y: f64 },
    #[error("point ({x}, {y}) is already present")]
    DuplicatePoint { x: f64, y: f64 },
    #[error("point coordinates must be finite")]
    NonFinitePoint,
    #[error("index {index} out of range for configuration of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("rejection sampler refused: {0}")]
    RejectionInefficient(String),
    #[error("series truncation bound {bound:.3e} exceeds tolerance {tolerance:.3e}; increase n_max")]
    TruncationTooLarge { bound: f64, tolerance: f64 },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("importance weights degenerate (effective sample size {ess:.1}); choose a reference closer to the estimate")]
    LowEffectiveSampleSize { ess: f64 },
    #[error("initial configuration has infinite energy")]
    InfiniteInitialEnergy,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config has {} violation(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<crate::io::config::Violation>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
