use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] freestretch_core::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("a free-form map needs --inverse; generator expressions (W2[...], perm[...], inner[...], *) do not")]
    MissingInverse,
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] io::Error),
    #[error("cannot write {0}: {1}")]
    Output(String, #[source] io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("self-test failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// 2 for bad input, 3 for an exhausted budget, 4 for a stuck descent.
    pub fn exit_code(&self) -> u8 {
        use freestretch_core::Error as E;
        match self {
            CliError::Core(E::ResourceLimit(..)) => 3,
            CliError::Core(E::DescentStuck { .. }) => 4,
            CliError::Output(..) | CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}
