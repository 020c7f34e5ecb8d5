use thiserror::Error;

/// Errors raised by the operator algebra and the expansion engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max |X - X^dag| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("frequency bases differ: {left:?} vs {right:?}")]
    BasisMismatch { left: Vec<f64>, right: Vec<f64> },

    #[error("invalid frequency basis: {0}")]
    InvalidBasis(String),

    #[error("frequency key has {got} components, basis has {expected}")]
    FrequencyArity { expected: usize, got: usize },

    #[error("mean value {norm:.3e} is nonzero; the primitive is not a trigonometric polynomial")]
    NonzeroMean { norm: f64 },

    #[error("secular polynomial degree {degree} exceeds the supported maximum {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("expansion order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("invalid expansion order {0}")]
    InvalidOrder(usize),

    #[error("operator chain too short: need {needed}, got {got}")]
    ChainLength { needed: usize, got: usize },

    #[error("gauge operator at order {order} is not block diagonal (off-diagonal norm {residual:.3e})")]
    GaugeNotBlockDiagonal { order: usize, residual: f64 },

    #[error("eigenvalue gap {divisor:.3e} is below the conditioning threshold {threshold:.3e}")]
    IllConditioned { divisor: f64, threshold: f64 },

    #[error("constant at order {order} differs from the mean value by {mismatch:.3e}")]
    ConstantMismatch { order: usize, mismatch: f64 },

    #[error("model is off resonance (delta = {delta}, nu = {nu})")]
    OffResonance { delta: f64, nu: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("error values must be positive (index {index} is {value})")]
    NonPositiveError { index: usize, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
