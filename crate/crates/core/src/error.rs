use thiserror::Error;

/// Errors produced by the geometric pipeline and its I/O surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sphere dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),

    #[error("invalid axis index {index} (valid range {min}..={max})")]
    InvalidAxis { index: usize, min: usize, max: usize },

    #[error("non-finite coordinate in input")]
    NonFinite,

    #[error("point is not on the unit sphere (| |x|^2 - 1 | = {0:e})")]
    NotOnSphere(f64),

    #[error("point is not on the hyperboloid")]
    NotHyperbolic,

    #[error("point coincides with the chart pole")]
    AtPole,

    #[error("point lies outside the metric domain")]
    OutsideDomain,

    #[error("finite-difference stencil leaves the metric domain")]
    StencilOutsideDomain,

    #[error("k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("Schouten eigenvalue {max} violates the bound lambda < 1/2; dilate the metric first")]
    EigenvalueBound { max: f64 },

    #[error("immersion is rank deficient at this point")]
    RankDeficient,

    #[error("eigenvalue dictionary mismatch: schouten {schouten:?} vs curvature map {from_kappa:?}")]
    DictionaryMismatch {
        schouten: Vec<f64>,
        from_kappa: Vec<f64>,
    },

    #[error("pole of the eigenvalue/curvature map")]
    DictionaryPole,

    #[error("matrix is not a Lorentz isometry (residual {0:e})")]
    NotAnIsometry(f64),

    #[error("isometry does not preserve time orientation")]
    TimeOrientation,

    #[error("sample set is degenerate")]
    DegenerateSamples,

    #[error("singular point of the radial equation at s = {s}")]
    SingularOde { s: f64 },

    #[error("integrator step size underflow at s = {s}")]
    StepUnderflow { s: f64 },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
