use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{0} validation row(s) with |z| >= 3")]
    Breach(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Breach(_) => 4,
        }
    }
}

impl From<levy_drawdown::Error> for CliError {
    fn from(e: levy_drawdown::Error) -> Self {
        use levy_drawdown::Error as E;
        match e {
            E::InvalidModel(_) | E::InvalidContract(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numeric(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
