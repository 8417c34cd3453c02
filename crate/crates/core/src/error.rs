use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid proposition set: {0}")]
    InvalidPropositions(String),

    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),

    #[error("reward {0} is not in the machine's reward set")]
    UnknownReward(f64),

    #[error("enumerating 2^{props} labels exceeds the cap of {cap}")]
    LabelCapExceeded { props: usize, cap: usize },

    #[error("unreachable word: the prefix and next label have zero probability")]
    UnreachableWord,

    #[error("undefined transition at state `{state}` on label `{label}`")]
    UndefinedTransition { state: String, label: String },

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("action {action} is not available in state {state}")]
    UnavailableAction { state: usize, action: usize },

    #[error("no reward distribution recorded for word `{0}`")]
    NoRewardDistribution(String),

    #[error("machine is missing transitions for {0} (state, label) pairs, first: {1}")]
    MissingTransitions(usize, String),

    #[error("the query word must be non-empty")]
    EmptyWord,

    #[error("observation table is not closed")]
    NotClosed,

    #[error("observation table is not consistent")]
    NotConsistent,

    #[error("search budget exceeded after expanding {nodes} nodes")]
    BudgetExceeded { nodes: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("map parse error at row {row}, column {col}: {msg}")]
    MapParse { row: usize, col: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
