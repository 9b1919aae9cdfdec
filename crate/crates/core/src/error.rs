use thiserror::Error;

#[derive(Debug, Error)]
pub enum DamError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("solver error: {msg} (residual {residual:.3e})")]
    Solver { msg: String, residual: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DamError>;
