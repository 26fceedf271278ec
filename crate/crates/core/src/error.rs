use thiserror::Error;

/// Crate-wide error type.
///
/// The variants mirror the failure classes that can surface to a caller:
/// bad parameters, window/geometry violations during truncated evaluations,
/// numerical failures, and experiment-level aggregation errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("window violation: {0}")]
    Window(String),

    #[error("evaluation point within {dist:.3e} of a pole at {pole_re}+{pole_im}i")]
    PoleProximity {
        dist: f64,
        pole_re: f64,
        pole_im: f64,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("quadrature accuracy not reached: best estimate {best:.6e}, error bound {err:.3e}")]
    Accuracy { best: f64, err: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("experiment error: {0}")]
    Experiment(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn window(msg: impl Into<String>) -> Self {
        Error::Window(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
