use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("pixel ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Coefficients rejected by the stability guard before any iteration ran.
    #[error("unstable coefficients: k3*k2 = {product} must be < {bound} (update eigenvalues are 1 - k3*k2*lambda with lambda in [0, 8])")]
    StabilityBound { product: f64, bound: f64 },

    /// The iteration blew up while running.
    #[error("simulation diverged at iteration {iteration} (avg |dz| = {avg_abs_dz:e}); k3*k2 = {product} exceeds the stable range < 0.25")]
    Unstable {
        iteration: usize,
        avg_abs_dz: f64,
        product: f64,
    },

    #[error("non-finite value produced during update at pixel ({x}, {y})")]
    NumericOverflow { x: usize, y: usize },

    #[error("PGM parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("encode error: {0}")]
    Encode(String),

    #[error("invalid merge target {target}: must be in 1..={region_count}")]
    InvalidTarget { target: usize, region_count: usize },

    #[error("invalid test pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid cluster count k = {k}: image has {distinct} distinct grey levels")]
    InvalidClusterCount { k: usize, distinct: usize },
}
