use thiserror::Error;

/// Errors raised by the spectral, model, analysis and integration layers.
#[derive(Debug, Error)]
pub enum FilmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sample count {got} does not match grid size {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("imaginary residue {residue:e} exceeds {threshold:e}: field is not Hermitian")]
    HermitianResidue { residue: f64, threshold: f64 },

    #[error("wiener exponent must be nonnegative, got {0}")]
    NegativeExponent(f64),

    #[error("derivative order {0} exceeds the supported maximum of 4")]
    DerivativeOrder(usize),

    #[error("mode {0:?} is not resolved by the grid")]
    UnresolvedMode(Vec<i64>),

    #[error("1 + v = {margin:e} is within the pole guard {guard:e}")]
    Pole { margin: f64, guard: f64 },

    #[error("spectral energy fraction {fraction:e} in the top third of modes exceeds {limit:e}")]
    Underresolved { fraction: f64, limit: f64 },

    #[error("A0 norm {0} is not below 1; the wetting series diverges")]
    SeriesDivergence(f64),

    #[error("oracle support too large: {0}")]
    SupportTooLarge(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("non-finite coefficients after step (blow-up)")]
    BlowUp,

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FilmError>;
