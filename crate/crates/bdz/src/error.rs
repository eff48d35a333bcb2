use thiserror::Error;

/// Errors produced by graph construction, level-string handling, and the codec.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a caller-side contract (not a dyadic string, bad probability, ...).
    #[error("domain: {0}")]
    Domain(String),

    /// Empty input where at least one bit is required.
    #[error("empty input")]
    EmptyInput,

    /// A vertex id that does not exist in the graph.
    #[error("no vertex with id {0}")]
    InvalidVertex(u32),

    /// Level strings that do not describe a well-formed graph.
    #[error("malformed level strings: {0}")]
    Structural(String),

    /// A codeword that cannot be decoded.
    #[error("corrupt input: {0}")]
    Corrupt(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }

    /// True for errors that signal an undecodable stream rather than caller misuse.
    pub fn is_corrupt(&self) -> bool {
        matches!(self, Error::Corrupt(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
