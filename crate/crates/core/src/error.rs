use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("a degree sequence needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("degree at position {index} is {value}, must be at least 1")]
    EntryBelowOne { index: usize, value: u32 },
    #[error("degree sum is {actual}, a tree on {n} nodes requires {required}")]
    SumMismatch {
        n: usize,
        actual: u64,
        required: u64,
    },
    #[error("n = {n} exceeds the enumeration limit {max}")]
    NTooLarge { n: usize, max: usize },
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),
    #[error("model is defined for n = {expected}, requested n = {requested}")]
    ModelSizeMismatch { expected: usize, requested: usize },
    #[error("no valid degree sequence on {n} nodes exists under this model")]
    InfeasibleModel { n: usize },
    #[error("rejection sampling failed after {0} attempts")]
    RetriesExhausted(u64),
    #[error("prefix of length {k} is longer than n = {n}")]
    PrefixTooLong { k: usize, n: usize },
    #[error("the conditioning event sum = {target} has probability zero")]
    UnconditionedSumZero { target: u64 },
    #[error("index sets overlap or leave [n]")]
    OverlappingSupports,
    #[error("Prüfer symbol {symbol} out of range for n = {n}")]
    SymbolOutOfRange { symbol: u32, n: usize },
    #[error("Prüfer sequence for n = {n} must have length {expected}, got {actual}")]
    PruferLength {
        n: usize,
        expected: usize,
        actual: usize,
    },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("enumeration would produce {count} trees, limit is {limit}")]
    TooManyTrees { count: String, limit: u64 },
    #[error("model does not provide the required marginals")]
    UnsupportedModel,
    #[error("operation requires depth at least {required}, ball has depth {actual}")]
    DepthTooSmall { required: usize, actual: usize },
    #[error("automorphism count not divisible by the deepest-level factor")]
    NonDivisible,
    #[error("configuration outside the range of the embedding formula: {0}")]
    DegenerateConfiguration(String),
    #[error("merged graph is not a forest")]
    NotAForest,
    #[error("remainder degrees are inconsistent at host vertex {0}")]
    InconsistentRemainders(u32),
    #[error("conditioning event has probability zero")]
    NullConditioning,
    #[error("map is not injective into [n]")]
    InvalidEmbedding,
    #[error("degree support exceeds cap {cap}")]
    CapExceeded { cap: usize },
    #[error("base ball has zero mass under the limit measure")]
    ZeroMassBase,
    #[error("measure is not consistent: gamma = {gamma}")]
    NotConsistent { gamma: String },
    #[error("ball distributions have different depths ({0} vs {1})")]
    DepthMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}
