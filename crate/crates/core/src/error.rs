//! Crate-wide error type.

/// Errors produced by pattern compilation, machine construction, inference,
/// and data handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Pattern text failed to parse. `position` is a 0-based character
    /// offset into the original pattern string.
    #[error("pattern syntax error at position {position}: {message}")]
    PatternSyntax { position: usize, message: String },

    /// A literal or class member is not part of the declared alphabet.
    #[error("symbol '{symbol}' at position {position} is not in the alphabet")]
    SymbolNotInAlphabet { symbol: char, position: usize },

    /// Alphabet declaration was empty, had duplicates, or used a reserved
    /// character.
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    /// A label sequence contained a symbol outside the alphabet.
    #[error("symbol '{0}' is not in the alphabet")]
    UnknownSymbol(char),

    /// The product automaton exceeded the configured state cap.
    #[error("product automaton exceeds the state cap of {cap} states")]
    ProductCapExceeded { cap: usize },

    /// An example's input and label sequences have different lengths.
    #[error("length mismatch: input has {x_len} symbols but labels have {y_len}")]
    LengthMismatch { x_len: usize, y_len: usize },

    /// The training objective became non-finite.
    #[error("training diverged: objective became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },

    /// Model and dataset disagree about the label alphabet.
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    /// Malformed dataset, pattern file, or model file content.
    #[error("invalid data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
