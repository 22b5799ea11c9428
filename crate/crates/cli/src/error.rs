use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] besicovitch::Error),
}

impl CliError {
    /// Process exit code: everything that is not an invariant failure is a
    /// usage error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
