use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// Tensor shapes are incompatible for the requested operation.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    Config(String),

    /// A computation produced or received a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Misuse of the autodiff tape (e.g. backward on a consumed tape).
    #[error("tape usage: {0}")]
    Tape(String),

    /// Checkpoint file does not match the model it is loaded into.
    #[error("checkpoint schema: {0}")]
    Checkpoint(String),

    /// Concentration-rank probe failure (dead agent, bad step index, ...).
    #[error("probe: {0}")]
    Probe(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
