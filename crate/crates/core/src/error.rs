use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jets are not combinable: {0}")]
    Combinability(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("multi-index of order {order} exceeds jet degree {degree}")]
    OrderOverflow { order: usize, degree: usize },

    #[error("non-finite evaluation at {point:?}")]
    EvaluationDomain { point: Vec<f64> },

    #[error(
        "insufficient jet degree: need F degree >= {required_f} and X degree >= {required_x}, \
         got F degree {got_f} and X degree {got_x}"
    )]
    DegreeDeficit {
        required_f: usize,
        required_x: usize,
        got_f: usize,
        got_x: usize,
    },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error(
        "bodies {i} and {j} are closer than the collision tolerance (separation {separation:e})"
    )]
    Singularity { i: usize, j: usize, separation: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("integration halted at t = {t_last}: {reason}")]
    IntegrationHalted { t_last: f64, reason: String },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
