use std::fmt;

/// Why a command stopped; each kind has its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and did not hold.
    Check(String),
    /// The input describes an invalid function.
    Validation(String),
    Io(String),
    /// Unreadable input, bad usage, or nothing to do.
    Input(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Io(_) => 3,
            Failure::Input(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
        }
    }
}
