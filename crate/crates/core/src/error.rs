use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coordinate overflow")]
    Overflow,

    #[error("points {from:?} and {to:?} are not joined by a straight segment of length 3^{level}")]
    NotCanonical {
        from: Vec<i64>,
        to: Vec<i64>,
        level: u32,
    },

    #[error("linear solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("flow of {flow} on edge ({u}, {v}) which has zero conductance")]
    FlowOnZeroEdge { u: usize, v: usize, flow: f64 },

    #[error("truncated mass {mass:e} exceeds tolerance {tolerance:e}")]
    Truncation { mass: f64, tolerance: f64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("integration failed: {0}")]
    Quadrature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
