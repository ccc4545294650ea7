use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model validation failed: {0}")]
    ModelValidation(String),

    #[error("capacity exceeded: {what} requires {required}, cap is {cap}")]
    Capacity {
        what: String,
        required: u128,
        cap: u128,
    },

    #[error("degenerate grid at t={t}: {message}; try a finer grid")]
    DegenerateGrid { t: usize, message: String },

    #[error("target not reachable (residual {residual:.3e})")]
    Reachability { residual: f64 },

    #[error("unknown fixture '{0}'")]
    Catalog(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::ModelValidation(msg.into())
    }
}
