use std::io;

use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed url {url:?}: {reason}")]
    MalformedUrl { url: String, reason: String },

    #[error("url {0:?} has an IP-literal host; no registered domain exists")]
    IpHost(String),

    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },

    #[error("no input line could be parsed ({rejected} rejected)")]
    NoValidLines { rejected: usize },

    #[error("no query id appears in two or more samples")]
    NoRepeatedQueries,

    #[error("samples span more than one (platform, topic) pair")]
    MixedKeys,

    #[error("at least {needed} samples are required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample has no responses")]
    EmptySample,

    #[error("sample has no citations; share is undefined")]
    EmptySampleCitations,

    #[error("need at least two runs of a query to compare")]
    SingleRun,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid value {n} exceeds sample size {available}")]
    GridExceedsSample { n: usize, available: usize },

    #[error("statistic undefined on bootstrap replicate {replicate}: {reason}")]
    StatisticUndefined { replicate: usize, reason: String },

    #[error("domain {domain:?} has zero share in at least one sample")]
    ZeroShare { domain: String },

    #[error("need at least {needed} rows for a fit, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    #[error("all ranks tied in at least one sample; correlation undefined")]
    DegenerateRanks,

    #[error("need at least {needed} domains, got {got}")]
    TooFewDomains { needed: usize, got: usize },

    #[error("conflicting hash for url {url:?} in job {job_id:?}")]
    ConflictingHash { url: String, job_id: String },

    #[error("invalid synthetic config: {0}")]
    Config(String),

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("drift schedule index out of bounds: {0}")]
    ScheduleOutOfBounds(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
