use thiserror::Error;

/// Errors raised by the lineshape generators, the fitter and the selection arithmetic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("susceptibility is singular at delta = {delta}")]
    Singular { delta: f64 },

    #[error("evaluation failed at grid index {index}: {source}")]
    AtGridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("poles are degenerate (|delta_plus - delta_minus| = {separation:e}); exceptional point")]
    DegeneratePoles { separation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("data has {n} points but the model needs more than {k}")]
    TooFewPoints { n: usize, k: usize },

    #[error("all data values are equal; nothing to fit")]
    DegenerateData,

    #[error("no start out of {starts} converged")]
    NoConvergence { starts: usize },

    #[error("both model fits failed: {0}")]
    AllFitsFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
