use alloc::boxed::Box;
use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("tensor is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("tensor is singular (determinant {det:e})")]
    Singular { det: f64 },

    #[error("third invariant must be positive, got {i3:e}")]
    NonPositiveVolume { i3: f64 },

    #[error("activation input {arg:e} of {term} exceeds the overflow limit")]
    ActivationOverflow { term: &'static str, arg: f64 },

    #[error("pressure solve requires coaxial (diagonal) tensors")]
    UnsupportedProtocol,

    #[error("step {step}{}: {source}", branch.map(|b| alloc::format!(", branch {b}")).unwrap_or_default())]
    Step {
        step: usize,
        branch: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
}

impl Error {
    pub(crate) fn at_step(self, step: usize, branch: Option<usize>) -> Error {
        Error::Step {
            step,
            branch,
            source: Box::new(self),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
