use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("contour constraint violated: {0}")]
    ContourConstraint(String),

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("imaginary residue {imag:e} exceeds tolerance (real part {real:e})")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("no convergence after refinement: last {last}, previous {previous}")]
    NonConvergence { last: f64, previous: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
