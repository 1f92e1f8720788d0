use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] vibrodiag::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use vibrodiag::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_DATA,
            CliError::Core(e) => match e {
                E::Parameter(_) => EXIT_USAGE,
                E::Numeric(_) | E::DegenerateSignal(_) => EXIT_NUMERIC,
                E::InsufficientData { .. }
                | E::Shape(_)
                | E::Format(_)
                | E::Data(_)
                | E::Load(_)
                | E::Io(_)
                | E::Csv(_)
                | E::Json(_) => EXIT_DATA,
            },
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn data(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}
