use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence must be non-empty")]
    EmptySequence,

    #[error("origin {origin} out of range for length {len}")]
    OriginOutOfRange { origin: usize, len: usize },

    #[error("non-finite sample encountered")]
    NonFiniteSample,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{policy} extension needs pad <= len - 1 (pad {pad}, len {len})")]
    InsufficientData {
        policy: &'static str,
        pad: usize,
        len: usize,
    },

    #[error("filter must have odd length, got {0}")]
    EvenLength(usize),

    #[error("filter is not symmetric: c({k}) = {right} but c(-{k}) = {left}")]
    AsymmetricFilter { k: usize, left: f64, right: f64 },

    #[error("filter has no nonzero coefficients")]
    ZeroFilter,

    #[error("polynomial is not palindromic")]
    NotPalindromic,

    #[error("root finding did not converge on {coeffs:?}: residual {residual:.3e}")]
    RootFinding { coeffs: Vec<f64>, residual: f64 },

    #[error("reconvolution residual {0:.3e} exceeds the decomposition tolerance")]
    ResidualTooLarge(f64),

    #[error("complex factor at index {0} has no conjugate partner")]
    UnpairedComplexFactor(usize),

    #[error("filter is not invertible; non-invertible factor parameters: {0:?}")]
    NotInvertible(Vec<f64>),

    #[error("no bounded pseudo-inverse for |p| >= 2 (p = {0}); use the kernel path")]
    UseKernelPath(f64),

    #[error("kernel of an invertible factor is trivial (p = {0})")]
    TrivialKernel(f64),

    #[error("kernel basis is degenerate on this window")]
    DegenerateKernelBasis,

    #[error("signal too short: {0}")]
    SignalTooShort(String),

    #[error("kernel is not separable: relative residual {residual:.3e}")]
    NotSeparable { residual: f64 },

    #[error("negative input: {0}")]
    NegativeInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
