use starplanet::Error;

pub const OK: u8 = 0;
pub const VERIFY_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const UNSUPPORTED: u8 = 3;
pub const NOT_CONVERGED: u8 = 4;
pub const INFEASIBLE: u8 = 5;

/// Exit code for a library error.
pub fn code_of(e: &Error) -> u8 {
    match e {
        Error::Unsupported(_) => UNSUPPORTED,
        Error::InfeasibleGeometry { .. } | Error::InfeasibleCap { .. } => INFEASIBLE,
        Error::Domain(_) | Error::Precondition(_) | Error::Config(_) | Error::Format(_) | Error::Io(_) => USAGE,
    }
}

/// Code and message of a command failure.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: code_of(&e), message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: USAGE, message: e.to_string() }
    }
}
