use reldrift::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    NoStrongRelations,
    Drift,
    SchemaMismatch,
    InvalidSpec,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Failure => 1,
            Outcome::NoStrongRelations => 2,
            Outcome::Drift => 3,
            Outcome::SchemaMismatch => 4,
            Outcome::InvalidSpec => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub outcome: Outcome,
    pub message: String,
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError {
            outcome: Outcome::InvalidSpec,
            message: msg.into(),
        }
    }

    /// Reading or writing files, parsing CSV or profile documents.
    pub fn io(e: Error) -> Self {
        CliError {
            outcome: Outcome::Failure,
            message: e.to_string(),
        }
    }

    /// Errors from discovery or scoring; parameter errors count as invalid input.
    pub fn from_core(e: Error) -> Self {
        let outcome = match e {
            Error::InvalidParameter(_) | Error::InvalidFraction(_) => Outcome::InvalidSpec,
            _ => Outcome::Failure,
        };
        CliError {
            outcome,
            message: e.to_string(),
        }
    }

    /// Errors while validating or running a drift injection.
    pub fn spec(e: Error) -> Self {
        let outcome = match e {
            Error::FileNotFound(_) | Error::Io { .. } | Error::Csv(_) | Error::Parse { .. } => {
                Outcome::Failure
            }
            _ => Outcome::InvalidSpec,
        };
        CliError {
            outcome,
            message: e.to_string(),
        }
    }
}
