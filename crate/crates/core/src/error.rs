use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A subset or section was used outside the domain it lives on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// E1 fails somewhere: a context (named) has no possible outcome.
    #[error("degenerate model: context {context} has no possible outcome ({reason})")]
    DegenerateModel { context: String, reason: String },

    #[error("normalisation error: row {context} sums to {sum}, expected 1")]
    Normalisation { context: String, sum: String },

    #[error("probability error: {0}")]
    Probability(String),

    #[error("signalling between {first} and {second}: marginal on {overlap} disagrees at {outcome}")]
    Signalling {
        first: String,
        second: String,
        overlap: String,
        outcome: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cover is disconnected ({count} components: {components}); analyse each component separately")]
    Disconnected { count: usize, components: String },

    #[error("unsupported ring: {0}")]
    UnsupportedRing(String),

    #[error("unsupported homomorphism {source_ring} -> {target}")]
    UnsupportedHomomorphism { source_ring: String, target: String },

    /// An outcome value cannot be read as an element of the requested ring.
    #[error("outcome {outcome:?} is not an element of {ring}")]
    Coercion { outcome: String, ring: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("pauli error: {0}")]
    Pauli(String),

    #[error("formula error: {0}")]
    Formula(String),

    #[error("{message} (at {path}, line {line}, column {column})")]
    Document {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown corpus entry {0:?}")]
    UnknownCorpus(String),

    #[error("search budget exhausted after {0} nodes")]
    Budget(u64),

    /// The implication hierarchy was violated; this is a bug, never an input problem.
    #[error("internal self-check failed: {0}")]
    SelfCheck(String),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::SelfCheck(_))
    }
}
