use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot difference a series of length {0}")]
    CannotDifference(usize),

    #[error("empty symbolic sequence")]
    EmptySequence,

    #[error("component `{label}`: {source}")]
    Component {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("entity `{id}`: {source}")]
    Entity {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate: all components constant (null entropy vector)")]
    NullEntropyVector,

    #[error("dimension mismatch: expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("window longer than series: window {window}, series {length}")]
    WindowTooLong { window: usize, length: usize },

    #[error("degenerate window {index}: all component entropies are zero")]
    DegenerateWindow { index: usize },

    #[error("trend undefined: stationary walk")]
    StationaryWalk,

    #[error("trend direction ambiguous")]
    AmbiguousTrend,

    #[error("word length {word} must be shorter than the sequence length {length}")]
    WordTooLong { word: usize, length: usize },

    #[error("holdout window has length {found} but analysis windows have length {expected}")]
    HoldoutLength { expected: usize, found: usize },

    #[error("plotting supports N = 3 only (got N = {0})")]
    PlotDimension(usize),
}

impl Error {
    pub fn in_component(self, label: &str) -> Self {
        Error::Component { label: label.to_owned(), source: Box::new(self) }
    }

    pub fn in_entity(self, id: &str) -> Self {
        Error::Entity { id: id.to_owned(), source: Box::new(self) }
    }
}
