use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{arg} = {value} outside the admissible range {range}")]
    OutOfRange {
        arg: &'static str,
        value: f64,
        range: String,
    },

    /// A Laplace argument outside the open interval on which the transform
    /// of the mean-field law is finite.
    #[error("r = {r} is outside V = ({lower}, {upper}): violates the {violated} bound")]
    LaplaceDomain {
        r: f64,
        lower: f64,
        upper: f64,
        violated: &'static str,
    },

    /// Some product denominator of the finite-n Laplace transform is not
    /// strictly positive, so the transform is infinite.
    #[error("Laplace transform infinite at n = {n}: {family} denominator at k = {k} equals {value}")]
    Infeasible {
        n: usize,
        k: usize,
        family: &'static str,
        value: f64,
    },

    #[error("the drift model does not satisfy the equilibrium assumption: {0}")]
    InvalidModel(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
