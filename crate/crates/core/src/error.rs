//! Error type shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the statistical and data-handling operations.
#[derive(Debug, Error)]
pub enum Error {
    /// The least-squares design is numerically singular.
    #[error("rank-deficient design matrix: {detail}")]
    RankDeficient { detail: String },

    /// Vector/matrix dimensions disagree.
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    /// An argument is outside its mathematical domain.
    #[error("domain error: {detail}")]
    Domain { detail: String },

    /// Too few observations for the requested model.
    #[error("insufficient data: need {needed}, have {have} ({detail})")]
    InsufficientData {
        needed: usize,
        have: usize,
        detail: String,
    },

    /// A series is (numerically) deterministic, so the test statistic is
    /// undefined.
    #[error("degenerate series: {detail}")]
    DegenerateSeries { detail: String },

    /// Invalid simulation or harness configuration.
    #[error("invalid configuration: {detail}")]
    Config { detail: String },

    /// No integration order up to `max_order` rejected the unit-root null.
    #[error("no integration order d <= {max_order} rejects the unit-root null")]
    OrderNotFound { max_order: usize },

    /// Bootstrap series rebuilding kept overflowing (unstable restricted AR
    /// coefficients); the redraw budget is exhausted.
    #[error("bootstrap series rebuild produced non-finite values in {attempts} attempts")]
    NonFiniteBootstrapSeries { attempts: usize },

    /// Input file failed to parse.
    #[error("parse error in {path} at {location}: {detail}")]
    Parse {
        path: String,
        location: String,
        detail: String,
    },

    /// The cause/effect files do not join cleanly.
    #[error("join error: {detail}")]
    Join { detail: String },

    /// Preprocessing removed every member.
    #[error("empty panel: all members were dropped")]
    EmptyPanel,

    /// An iterative numerical routine failed to converge.
    #[error("numerical routine failed: {detail}")]
    Numerical { detail: String },

    /// A per-member test failed; the label identifies the member.
    #[error("member '{label}': {source}")]
    Member {
        label: String,
        #[source]
        source: Box<Error>,
    },

    /// File I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(detail: impl Into<String>) -> Self {
        Error::Domain {
            detail: detail.into(),
        }
    }

    pub(crate) fn config(detail: impl Into<String>) -> Self {
        Error::Config {
            detail: detail.into(),
        }
    }

    pub(crate) fn for_member(self, label: &str) -> Self {
        Error::Member {
            label: label.to_string(),
            source: Box::new(self),
        }
    }
}
