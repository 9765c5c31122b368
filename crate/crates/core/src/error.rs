use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("referential integrity violated at `{id}`: {reason}")]
    ReferentialIntegrity { id: String, reason: String },

    #[error("score table references unknown frame `{sequence}/{frame}`")]
    UnknownFrame { sequence: String, frame: String },

    #[error("duplicate score for frame `{sequence}/{frame}`, track `{track}`")]
    DuplicateEntry {
        sequence: String,
        frame: String,
        track: String,
    },

    #[error("MAD score {value} for frame `{sequence}/{frame}` is outside [0, 1]")]
    ScoreOutOfRange {
        sequence: String,
        frame: String,
        value: f64,
    },

    #[error("empty score sequence")]
    EmptySequence,

    #[error("length mismatch: {left} scores vs {right} weights")]
    LengthMismatch { left: usize, right: usize },

    #[error("all quality weights are zero")]
    AllZeroWeights,

    #[error("negative or non-finite quality weight {0}")]
    InvalidWeight(f64),

    #[error("vote threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),

    #[error("attempt `{attempt}` lacks track `{track}`")]
    MissingTrack { attempt: String, track: String },

    #[error("attempt `{0}` has no ground-truth label")]
    MissingLabel(String),

    #[error("face box {0} exceeds image bounds {1}x{2}")]
    BoxOutOfBounds(String, u32, u32),

    #[error("face box {0} is too small")]
    DegenerateBox(String),

    #[error("unsupported image {}: {reason}", path.display())]
    Image { path: PathBuf, reason: String },

    #[error("invalid normalization statistic {0}")]
    InvalidStatistic(f64),

    #[error("non-finite score {0}")]
    NonFiniteScore(f64),

    #[error("empty score set: {0}")]
    EmptySet(&'static str),

    #[error("DET curve has no APCER/BPCER crossing")]
    DegenerateCurve,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("layout mismatch: model expects `{expected}`, got `{actual}`")]
    LayoutMismatch { expected: String, actual: String },

    #[error("SMO did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("degenerate training input: {0}")]
    DegenerateInput(String),

    #[error("too few attempts to stratify: {0}")]
    TooFewAttempts(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frame `{sequence}/{frame}`: {source}")]
    Frame {
        sequence: String,
        frame: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }
}
