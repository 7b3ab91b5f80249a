use std::fmt;
use std::process::ExitCode;

/// CLI failure modes, mapped onto exit codes: configuration problems exit
/// with 3, solver-level failures with 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(memkern::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Io(_) => ExitCode::from(3),
            CliError::Solver(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Solver(memkern::Error::MeasurementVanishesAtZero { value }) => write!(
                f,
                "solver error: degenerate data: (u0, phi) = g(0) = {value:e}; \
                 identification requires a nonzero initial measurement"
            ),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(e) => write!(f, "config error: {e}"),
        }
    }
}

impl From<memkern::Error> for CliError {
    fn from(e: memkern::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
