use std::path::PathBuf;

/// Errors raised by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semi-definite (pivot {pivot:e} at index {index})")]
    NotPsd { index: usize, pivot: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("vector {index} has zero norm")]
    ZeroVector { index: usize },

    #[error("activation `{0}` is not square-integrable under the Gaussian measure")]
    NotSquareIntegrable(String),

    #[error("activation `{0}` is constant almost everywhere")]
    DegenerateActivation(String),

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("non-finite value produced")]
    NonFinite,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("run {run}, layer {layer}: {source}")]
    Layer {
        run: usize,
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_layer(self, run: usize, layer: usize) -> Self {
        Error::Layer {
            run,
            layer,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The innermost error, with any run/layer context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Layer { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
