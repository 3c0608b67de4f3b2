use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degree overflow: {left} + {right} exceeds ambient dimension {ambient}")]
    DegreeOverflow {
        left: usize,
        right: usize,
        ambient: usize,
    },

    #[error("interior product of a 0-form is undefined")]
    DegreeZero,

    #[error("form has support outside the base coordinates 1..{base}")]
    SupportOutsideBase { base: usize },

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("map `{name}` is undefined at {point:?}")]
    Undefined { name: String, point: Vec<f64> },

    #[error("point {point:?} is closer than {margin} to the domain boundary")]
    InsufficientMargin { point: Vec<f64>, margin: f64 },

    #[error("map spec error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller's input, as opposed to numerical or domain failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. } | Error::InvalidArgument(_) | Error::Json(_)
        )
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
