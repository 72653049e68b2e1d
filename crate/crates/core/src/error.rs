use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid subtype: {0}")]
    InvalidSubtype(String),

    #[error("unknown subtype name `{0}`")]
    UnknownSubtype(String),

    #[error("state delta requires at least one of the previous/current states")]
    NoStates,

    #[error("cannot classify event on line {line}: {reason}")]
    Classification { line: u64, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("offset {offset} ms outside active duration {duration} ms")]
    OffsetOutOfRange { offset: i64, duration: i64 },

    #[error("timestamp {0} is not inside any active segment")]
    NotInTimeline(i64),

    #[error("{0} is only defined for the agent-organizer condition")]
    WrongCondition(&'static str),

    #[error("permutation window with {pairs} concurrent pairs exceeds cap {cap}")]
    PermutationCap { pairs: usize, cap: usize },

    #[error("invalid contingency table: {0}")]
    InvalidTable(String),

    #[error("expected count is zero at row `{row}`, column `{col}`")]
    ZeroExpected { row: String, col: String },

    #[error("degenerate test: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
