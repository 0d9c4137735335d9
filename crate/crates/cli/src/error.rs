use std::fmt;

use hcr::HcrError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(m) => write!(f, "data: {m}"),
            CliError::Numeric(m) => write!(f, "numeric: {m}"),
        }
    }
}

impl From<HcrError> for CliError {
    fn from(e: HcrError) -> Self {
        let message = e.to_string();
        match e {
            HcrError::NonPositiveMass { .. }
            | HcrError::NonPositiveDensity { .. }
            | HcrError::BacktrackExhausted { .. } => CliError::Numeric(message),
            HcrError::InvalidConfig(_)
            | HcrError::InvalidBasis(_)
            | HcrError::InvalidFamily(_)
            | HcrError::InvalidRate(_)
            | HcrError::OrderOutOfRange { .. }
            | HcrError::Unsupported(_) => CliError::Usage(message),
            _ => CliError::Data(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
