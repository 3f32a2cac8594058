use thiserror::Error;

/// Errors surfaced by the calibration toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied data or parameters failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// File access failed.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file had the wrong layout or a cell failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// Every `(gamma, n')` grid cell of the tail bound was vacuous at this `t`.
    #[error("bound vacuous at this t")]
    VacuousBound,

    /// The tail bound never drops below `delta` on the search interval.
    #[error("sample size too small for uniform certification")]
    SampleTooSmall,

    /// `x(eta; delta)` is negative for every searched `eta`.
    #[error("target level alpha unreachable at this sample size")]
    UnreachableAlpha,

    /// A selection stage emptied the candidate set.
    #[error("selection constraints unsatisfiable within the certified set")]
    SelectionUnsatisfiable,

    /// Selection was asked for on an empty certified set. This is the
    /// abstention outcome, distinguished so callers can report it as success.
    #[error("no parameter certified")]
    NoParameterCertified,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
