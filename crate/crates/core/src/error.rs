use thiserror::Error;

/// Errors raised by the divergence, centroid and clustering routines.
///
/// Numerical payloads are carried as `f64` so the error type stays
/// independent of the scalar type parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric positive-definite")]
    NotPositiveDefinite,

    #[error("a matrix is required for the squared-mahalanobis generator")]
    MissingMatrix,

    #[error("affine scale must be nonzero")]
    ZeroScale,

    #[error("{generator}: coordinate {index} = {value} lies outside the domain")]
    OutOfDomain { generator: String, index: usize, value: f64 },

    #[error("{generator}: gradient undefined at boundary coordinate {index} = {value}")]
    BoundaryGradient { generator: String, index: usize, value: f64 },

    #[error("{generator}: gradient value {value} has no preimage")]
    GradientOutOfRange { generator: String, value: f64 },

    #[error("{0}: inverse gradient is not available")]
    MissingGradInverse(String),

    #[error("{0}: second derivative / Hessian is not available")]
    MissingHessian(String),

    #[error("operation requires a scalar (1-dimensional) generator, got dimension {0}")]
    NotScalar(usize),

    #[error("operation requires a separable generator")]
    NotSeparable,

    #[error("skew parameter alpha = {0} is a Bregman limit; use the scaled family")]
    DegenerateAlpha(f64),

    #[error("parameter {name} = {value} is outside {range}")]
    ParameterRange { name: &'static str, value: f64, range: &'static str },

    #[error("the two points coincide")]
    CoincidentPoints,

    #[error("negative component {value} at index {index}")]
    NegativeComponent { index: usize, value: f64 },

    #[error("no root found in the search bracket")]
    NoRoot,

    #[error("empty input")]
    EmptyInput,

    #[error("weights must be nonnegative with positive sum")]
    InvalidWeights,

    #[error("need at least k = {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },

    #[error("{count} candidate center sets exceed the budget of {budget}")]
    CombinatorialBudget { count: u128, budget: u128 },

    #[error("iterate left the domain; last valid iterate {last_valid:?}")]
    IterateLeftDomain { last_valid: Vec<f64> },

    #[error("no convergence after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
