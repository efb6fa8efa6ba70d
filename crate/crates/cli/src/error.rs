use std::path::PathBuf;

use sqdopt_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },

    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("output directory {} is locked by another run (remove {} if stale)", dir.display(), lock.display())]
    Locked { dir: PathBuf, lock: PathBuf },

    #[error("fixture {fixture} has conflicting hashes across results: {first} in {}, {second} in {}", first_path.display(), second_path.display())]
    FixtureMismatch { fixture: String, first: String, first_path: PathBuf, second: String, second_path: PathBuf },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Csv(_) => 3,
            CliError::Core(CoreError::File { .. } | CoreError::Io(_)) => 3,
            CliError::Config(_) | CliError::Toml { .. } | CliError::FixtureMismatch { .. } => 4,
            CliError::Core(CoreError::InvalidArgument(_) | CoreError::InvalidActiveSpace(_)) => 4,
            CliError::Json { .. } => 5,
            CliError::Core(CoreError::Parse { .. } | CoreError::InvalidHamiltonian(_)) => 5,
            CliError::Core(CoreError::Capacity(_)) => 6,
            CliError::Core(
                CoreError::NotConverged { .. }
                | CoreError::NonFiniteCost { .. }
                | CoreError::Degenerate(_)
                | CoreError::NonHermitian(_)
                | CoreError::Recovery(_)
                | CoreError::DimensionMismatch { .. },
            ) => 7,
            CliError::Locked { .. } => 8,
        }
    }
}
