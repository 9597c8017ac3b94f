use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by every analysis in the crate.
///
/// Variants split into two families: input/data problems (bad files,
/// missing cells, too little data) and numerical failures (degenerate
/// variance, rank deficiency, non-convergence). [`Error::is_numerical`]
/// tells them apart; the CLI maps them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("non-finite value at {location}")]
    NonFiniteValue { location: String },
    #[error("empty identifier at {location}")]
    EmptyId { location: String },
    #[error("duplicate key (object={object}, instrument={instrument}, replicate={replicate}, variable={variable})")]
    DuplicateKey {
        object: String,
        instrument: String,
        replicate: u32,
        variable: String,
    },
    #[error("object {object} has no {instrument} value for {variable}")]
    MissingPairMember {
        object: String,
        instrument: String,
        variable: String,
    },
    #[error("object {object} has {count} replicates for {instrument}; aggregate replicates before pairing")]
    AmbiguousReplicates {
        object: String,
        instrument: String,
        count: usize,
    },
    #[error("bad header: expected `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("line {line}: unknown outcome token `{token}`")]
    UnknownOutcomeToken { line: u64, token: String },
    #[error("line {line}: duplicate test case (object={object}, suite={suite}, case={case})")]
    DuplicateCase {
        line: u64,
        object: String,
        suite: String,
        case: String,
    },
    #[error("no {granularity} entries for object {object} under suite {suite}")]
    NoEntriesAtGranularity {
        object: String,
        suite: String,
        granularity: String,
    },
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("need at least {needed} pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("zero variance in {what}")]
    DegenerateVariance { what: String },
    #[error("probability {0} is outside (0, 1)")]
    BadProbability(f64),
    #[error("degrees of freedom must be positive (got {df1}, {df2})")]
    BadDegreesOfFreedom { df1: u64, df2: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unbalanced design: object {object} lacks instrument {instrument}")]
    UnbalancedDesign { object: String, instrument: String },
    #[error("need at least 2 levels of {factor}, got {got}")]
    TooFewLevels { factor: String, got: usize },
    #[error("incomplete grid: {reason}")]
    IncompleteGrid { reason: String },
    #[error("ANOVA table has no `{0}` row")]
    MissingTerm(String),
    #[error("ANOVA row `{0}` has zero degrees of freedom")]
    ZeroDf(String),
    #[error("object {0} has no reference value")]
    MissingTruth(String),
    #[error("invalid experiment design: {0}")]
    InvalidDesign(String),
    #[error("design matrix is rank deficient")]
    RankDeficientDesign,
    #[error("optimizer did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },
    #[error("invalid process spec: {0}")]
    InvalidSpec(String),
    #[error("replicate {replicate}: {source}")]
    EstimatorFailure {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, used as the diagnostic tag on the command line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::EmptyId { .. } => "EmptyId",
            Error::DuplicateKey { .. } => "DuplicateKey",
            Error::MissingPairMember { .. } => "MissingPairMember",
            Error::AmbiguousReplicates { .. } => "AmbiguousReplicates",
            Error::BadHeader { .. } => "BadHeader",
            Error::BadRow { .. } => "BadRow",
            Error::UnknownOutcomeToken { .. } => "UnknownOutcomeToken",
            Error::DuplicateCase { .. } => "DuplicateCase",
            Error::NoEntriesAtGranularity { .. } => "NoEntriesAtGranularity",
            Error::TooFewValues { .. } => "TooFewValues",
            Error::TooFewPairs { .. } => "TooFewPairs",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::BadProbability(_) => "BadProbability",
            Error::BadDegreesOfFreedom { .. } => "BadDegreesOfFreedom",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::UnbalancedDesign { .. } => "UnbalancedDesign",
            Error::TooFewLevels { .. } => "TooFewLevels",
            Error::IncompleteGrid { .. } => "IncompleteGrid",
            Error::MissingTerm(_) => "MissingTerm",
            Error::ZeroDf(_) => "ZeroDf",
            Error::MissingTruth(_) => "MissingTruth",
            Error::InvalidDesign(_) => "InvalidDesign",
            Error::RankDeficientDesign => "RankDeficientDesign",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::EstimatorFailure { .. } => "EstimatorFailure",
            Error::Io(_) => "IoFailure",
            Error::Json(_) => "Json",
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateVariance { .. }
            | Error::RankDeficientDesign
            | Error::NonConvergence { .. } => true,
            Error::EstimatorFailure { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
