use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("dimension {n} not supported for {context}")]
    UnsupportedDimension { n: usize, context: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("points {first} and {second} coincide (separation {separation:e})")]
    DuplicatePoints {
        first: usize,
        second: usize,
        separation: f64,
    },

    #[error("observed block is singular: smallest eigenvalue {eigenvalue:e} below {threshold:e}")]
    SingularConditioning { eigenvalue: f64, threshold: f64 },

    #[error("degenerate Gaussian law: smallest eigenvalue {eigenvalue:e} below {threshold:e}")]
    Degenerate { eigenvalue: f64, threshold: f64 },

    #[error("covariance is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("no lattice frequencies in the window [{lambda}, {lambda}+1]; nearest admissible lambda is {nearest}")]
    EmptyAnnulus { lambda: f64, nearest: f64 },

    #[error(
        "tangent vector of length {length} leaves the exponential chart (injectivity radius pi)"
    )]
    OutOfChart { length: f64 },

    #[error("grid spacing {h} is coarser than the limit {limit}")]
    GridTooCoarse { h: f64, limit: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
