use std::fmt;

/// Failure classes of the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config; exit 2.
    Usage(String),
    /// Evaluation or I/O failure; exit 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<atfe::Error> for CliError {
    fn from(e: atfe::Error) -> Self {
        use atfe::Error as E;
        match e {
            E::Config(m) | E::Usage(m) => CliError::Usage(m),
            E::Domain(m) => CliError::Runtime(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
