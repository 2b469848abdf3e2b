use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("matrix is not positive definite: pivot {pivot} = {value:e}")]
    SingularMatrix { pivot: usize, value: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracketing {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("feedback polynomial of degree {degree} is not primitive: period {period}, expected {expected}")]
    NonPrimitivePolynomial {
        degree: u32,
        period: usize,
        expected: usize,
    },

    #[error("degenerate score function: |E[psi']| = {denominator:e}")]
    DegenerateScore { denominator: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
