use thiserror::Error;

use crate::degree::Degree;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fiber dimension mismatch: {0} vs {1}")]
    FiberDimMismatch(usize, usize),

    #[error("symbol of order {order} with depth {depth} does not reach degree {needed}")]
    InsufficientDepth {
        order: Degree,
        depth: usize,
        needed: Degree,
    },

    #[error("requested depth {requested} exceeds available input depth {available}")]
    DepthExceeded { requested: usize, available: usize },

    #[error("orders {0} and {1} do not differ by an integer")]
    IncompatibleOrders(Degree, Degree),

    #[error("order {0} is not allowed here: {1}")]
    InvalidOrder(Degree, &'static str),

    #[error("value {0} is not a multiple of 1/2")]
    NotHalfInteger(f64),

    #[error("component index {r} outside [{lo}, {hi}]")]
    ComponentOutOfRange { r: Degree, lo: Degree, hi: Degree },

    #[error("mode cutoff {cutoff} cannot hold band limit {band}")]
    CutoffTooSmall { cutoff: usize, band: usize },

    #[error("matrix shapes do not match: {0}")]
    ShapeMismatch(String),

    #[error("weight operator is ill-conditioned: {0}")]
    IllConditionedWeight(String),

    #[error("design matrix is rank deficient (condition estimate {0:.3e})")]
    RankDeficient(f64),

    #[error("fit residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    ResidualTooLarge { residual: f64, threshold: f64 },

    #[error("not enough samples: have {have}, need {need}")]
    TooFewSamples { have: usize, need: usize },

    #[error("diagonal partial sums diverge (last increments {0:.3e}, {1:.3e})")]
    Divergent(f64, f64),

    #[error("form is not antisymmetric (defect {0:.3e})")]
    NotAntisymmetric(f64),

    #[error("invalid Lie algebra: {0}")]
    InvalidLieAlgebra(String),

    #[error("wedge power k = {0} outside supported range 1..=4")]
    WedgePowerUnsupported(usize),

    #[error("expected {expected} arguments, got {got}")]
    ArgumentCount { expected: usize, got: usize },

    #[error("parameter grid too coarse: Richardson estimates disagree by {0:.3e}")]
    GridTooCoarse(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
