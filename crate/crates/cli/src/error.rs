use std::fmt;
use std::process::ExitCode;

use blinking::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit status 2.
    Usage(String),
    /// Filesystem failure; exit status 1.
    Io(String),
    Lib(Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        let input_error = match self {
            Self::Usage(_) => true,
            Self::Io(_) => false,
            Self::Lib(e) => matches!(
                e,
                Error::Validation(_) | Error::Domain { .. } | Error::Parse(_) | Error::UnphysicalCoupling(_)
            ),
        };
        ExitCode::from(if input_error { 2 } else { 1 })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Lib(e) => write!(f, "{e}"),
        }
    }
}
