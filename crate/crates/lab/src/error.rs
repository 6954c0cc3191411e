use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] circlaw::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type LabResult<T> = Result<T, LabError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_LEDGER: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_USAGE,
            LabError::Core(circlaw::Error::Domain(_)) => EXIT_USAGE,
            LabError::Core(circlaw::Error::Format(_)) => EXIT_USAGE,
            _ => EXIT_RESOURCE,
        }
    }
}
