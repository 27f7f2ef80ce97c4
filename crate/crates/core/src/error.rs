use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::pipeline::Detection;

use crate::solver::SolveTrace;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad shapes, modes or parameter values.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A value that must be finite or PSD was not.
    #[error("numeric integrity violated: {0}")]
    Numeric(String),
    /// A metric whose denominator vanished.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    /// A scene recipe that cannot be realized.
    #[error("infeasible scene spec: {0}")]
    Spec(String),
    /// An iterate went non-finite. Carries the trace up to the failure.
    #[error("solver failure: {reason}")]
    SolverFailure {
        reason: String,
        trace: Box<SolveTrace>,
    },
    /// A cube of a sequence failed; detections of earlier cubes are kept.
    #[error("cube {cube} (first frame {first_frame}) failed: {source}")]
    CubeFailure {
        cube: usize,
        first_frame: usize,
        source: Box<Error>,
        partial_detections: Vec<Detection>,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
