use rustico_core::datasets::DatasetError;
use rustico_core::{ConfigError, EvalError, FilterError, RasterError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Io,
    Eval,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Io => 3,
            Kind::Eval => 4,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Config, error: error.into() }
    }

    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Io, error: error.into() }
    }

    pub fn eval(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Eval, error: error.into() }
    }

    pub fn context(mut self, msg: impl std::fmt::Display + Send + Sync + 'static) -> Self {
        self.error = self.error.context(msg);
        self
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::config(e)
    }
}

impl From<FilterError> for Failure {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::Raster(RasterError::Image(_)) => Self::io(e),
            _ => Self::config(e),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Self::eval(e)
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Manifest(_) => Self::config(e),
            _ => Self::io(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::io(e)
    }
}

impl From<RasterError> for Failure {
    fn from(e: RasterError) -> Self {
        match e {
            RasterError::Image(_) => Self::io(e),
            _ => Self::config(e),
        }
    }
}
