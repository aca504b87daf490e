use crate::corpus::Representation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown label {found:?} (expected {a:?} or {b:?})")]
    UnknownLabel {
        line: usize,
        found: String,
        a: String,
        b: String,
    },
    #[error("line {line}: token {token:?} in stream {stream} contains whitespace or is empty")]
    BadToken {
        line: usize,
        token: String,
        stream: &'static str,
    },
    #[error("duplicate verse index {index}")]
    DuplicateIndex { index: usize },
    #[error("verse indices not contiguous from 0: expected {expected}, found {found}")]
    NonContiguousIndex { expected: usize, found: usize },
    #[error("corpus has {n} verse(s); at least 2 required")]
    TooFewVerses { n: usize },
    #[error("stream {rep} is empty in verse {verse} and cannot be selected")]
    StreamUnavailable { rep: Representation, verse: usize },
    #[error("labels contain a single class; both classes are required")]
    SingleClass,
    #[error("label sequences differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("subsample infeasible: {reason}")]
    SubsampleInfeasible { reason: String },
    #[error("no subsample satisfied the class minimum within {cap} attempts")]
    SubsampleRejectionCap { cap: usize },
    #[error("block rank {rank} out of range: label has {count} block(s)")]
    BlockRankOutOfRange { rank: usize, count: usize },
    #[error("all documents produced zero n-grams")]
    EmptyDocuments,
    #[error("clustering needs at least 2 rows, found {n}")]
    TooFewRows { n: usize },
    #[error("all rows are identical; two distinct rows are required")]
    NoDistinctRows,
    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: u8 },
    #[error("corpus of {n} verses is too short for cyclic shifts of step {step}")]
    CorpusTooShort { n: usize, step: usize },
    #[error("separating axis has zero norm")]
    DegenerateAxis,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
