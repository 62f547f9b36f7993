//! CLI-side errors: file formats, usage, and wrapped core errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("pgm parse error at byte {offset}: {message}")]
    PgmParse { offset: usize, message: String },

    #[error("kernel file error: {0}")]
    KernelFile(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] tgv_core::TgvError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn pgm(offset: usize, message: impl Into<String>) -> Self {
        CliError::PgmParse {
            offset,
            message: message.into(),
        }
    }
}
