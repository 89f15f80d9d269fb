use std::io;

/// Errors raised while reading, writing or running a command.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    /// The document does not have the expected shape. `pointer` is a JSON
    /// pointer to the offending value.
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    /// The document is well formed but describes an invalid object.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] rumkit_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl FileError {
    pub(crate) fn schema(pointer: &str, message: impl Into<String>) -> Self {
        let pointer = if pointer.is_empty() { "/".to_string() } else { pointer.to_string() };
        FileError::Schema {
            pointer,
            message: message.into(),
        }
    }

    /// Process exit code: 2 for bad input, 3 for "no such mode" style
    /// results, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            FileError::Io(_) => 4,
            FileError::Core(e) if e.is_result_class() => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = FileError> = std::result::Result<T, E>;
