use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel evaluated at a singular point (distance {0:e})")]
    Singular(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("operator index out of range: {0}")]
    Domain(String),
    #[error("boundary projection did not converge for point ({0}, {1})")]
    ProjectionFailure(f64, f64),
    #[error("center set is empty")]
    EmptyCenters,
    #[error("requested density is unreachable: {0}")]
    DensityUnreachable(String),
    #[error("boundary layer depth {depth} exceeds curve reach {reach}")]
    ReachViolation { depth: f64, reach: f64 },
    #[error("curve is not star-shaped about its centroid")]
    NotStarShaped,
    #[error("augmented system is numerically singular")]
    SingularSystem,
    #[error("linear solve residual too large: {0:e}")]
    ResidualTooLarge(f64),
    #[error("one-sided limit extrapolation did not stabilize (estimate {0:e})")]
    ExtrapolationDivergence(f64),
    #[error("no stable local polynomial reproduction at ({0}, {1})")]
    NormingFailure(f64, f64),
    #[error("quadrature validation failed: {0}")]
    Quadrature(String),
    #[error("unknown target function `{0}`")]
    UnknownTarget(String),
    #[error("cannot parse curve spec `{0}`")]
    CurveSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
