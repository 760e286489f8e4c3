use thiserror::Error;

/// Errors produced anywhere in the imaging pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivision depth. The best available
    /// estimate is kept so callers can decide whether it is usable.
    #[error("quadrature did not converge (best estimate {estimate:e})")]
    Convergence { estimate: f64 },

    /// An iterative linear-algebra routine hit its iteration cap.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Inputs are individually valid but inconsistent with each other.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The thresholded signal subspace is empty (no singular value above the threshold).
    #[error("empty signal subspace")]
    EmptySubspace,

    /// The steering weights vanish for every direction.
    #[error("degenerate steering vector: c is orthogonal to every [1, theta_l]")]
    DegenerateSteering,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An error raised while running an experiment, tagged with where it happened.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Strips any context wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Attaches a context string to an error result.
pub trait ResultExt<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::Context {
            context: ctx(),
            source: Box::new(e),
        })
    }
}
