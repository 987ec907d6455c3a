use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("query already contains an `__ans` atom")]
    AnswerAtomPresent,
    #[error("query contains {0} `__ans` atoms, expected at most one")]
    MultipleAnswerAtoms(usize),
    #[error("answer term {0} does not occur in the query body")]
    AnswerVariableUnbound(String),
    #[error("partition is not admissible: class {0} contains two constants")]
    Inadmissible(String),
    #[error("partitions are defined over different term sets")]
    CarrierMismatch,
    #[error("atoms do not share a single predicate: {0} vs {1}")]
    MixedPredicates(String, String),
    #[error("invalid piece-unifier: {0}")]
    InvalidUnifier(String),
    #[error("rule {0} does not have an atomic head")]
    NonAtomicHead(String),
    #[error("exhaustive unifier search refused: query has {query} atoms, head has {head} (caps {max_query}/{max_head})")]
    SizeCap { query: usize, head: usize, max_query: usize, max_head: usize },
    #[error("rewriting invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
