use thiserror::Error;

use crate::rule::Rule;
use crate::space::Point;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the explanation machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched arity, out-of-domain values or otherwise malformed inputs.
    #[error("structural error: {0}")]
    Structural(String),

    /// A configuration or model document violates its schema.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("feature `{feature}` cannot be enumerated: {reason}")]
    NotEnumerable { feature: String, reason: String },

    #[error("unsupported rule shape: {0}")]
    UnsupportedShape(String),

    #[error("unsupported rule family: {0}")]
    UnsupportedFamily(String),

    /// Condition 1 of a scalable rule family fails: some point has no basic rule.
    #[error("rule family does not cover point {point}")]
    Uncovered { point: Point },

    /// Condition 2 of a scalable rule family fails for the given triple.
    #[error("no basic rule refines the intersection of two rules at {point}")]
    Condition2Violation {
        first: Box<Rule>,
        second: Box<Rule>,
        point: Point,
    },

    #[error("rule has infinite measure")]
    InfiniteMeasure,

    #[error("rule has zero measure")]
    ZeroMeasure,

    #[error("fidelity cannot be computed exactly: {0}")]
    NotExactlyComputable(String),

    /// Unbounded rules under a measure that assigns them all infinite coverage.
    #[error("incomparable infinite coverages: {0}")]
    Principle2Violation(String),

    #[error("unsupported classifier: {0}")]
    UnsupportedClassifier(String),

    /// The external classifier process failed or answered out of protocol.
    #[error("external classifier error: {message}")]
    External { message: String, payload: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
