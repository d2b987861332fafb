use qrng_core::timetag::MonitorReport;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_TEST_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MONITOR_ALARM: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flag values or combinations.
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    /// Input file that exists but cannot be parsed.
    BadInput { path: PathBuf, message: String },
    Alarm(MonitorReport),
    /// Randomness tests failed or a replay did not reproduce.
    Failed(String),
}

impl CliError {
    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn bad_input(path: &Path, e: impl fmt::Display) -> Self {
        CliError::BadInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::BadInput { .. } => EXIT_IO,
            CliError::Alarm(_) => EXIT_MONITOR_ALARM,
            CliError::Failed(_) => EXIT_TEST_FAILURE,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::BadInput { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Alarm(r) => write!(
                f,
                "purity monitor ALARM: {} cross-arm coincidences in one interval (threshold {})",
                r.cross_arm_count, r.threshold
            ),
            CliError::Failed(m) => f.write_str(m),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
