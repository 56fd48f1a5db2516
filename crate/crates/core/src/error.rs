use alloc::string::String;

use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("rank {0} outside the supported range 2..=26")]
    InvalidRank(usize),
    #[error("invalid letter {0:?} for rank {1}")]
    InvalidLetter(char, usize),
    #[error("word {0} is not freely reduced")]
    NotReduced(String),
    #[error("word {0} is not cyclically reduced")]
    NotCyclicallyReduced(Word),
    #[error("word must be nonempty")]
    EmptyWord,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("maps are not mutually inverse: generator {0} is not recovered")]
    NotInverse(char),
    #[error("image of {0} is empty")]
    EmptyImage(char),
    #[error("expected {expected} images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("not a signed permutation of the alphabet")]
    NotPermutation,
    #[error("Whitehead type map must not assign the multiplier's own generator")]
    MultiplierTyped,

    #[error("initial distribution is not stationary for the transition matrix")]
    NotStationary,
    #[error("transition {0}->{1} must be zero (inverse pair)")]
    ForbiddenTransition(char, char),
    #[error("{0} row or distribution does not sum to one")]
    NotStochastic(String),
    #[error("{0} must be strictly positive")]
    NonPositive(String),
    #[error("{0} must be non-negative")]
    Negative(String),
    #[error("{0} is a proper power")]
    ProperPower(Word),

    #[error("cylinders {0} and {1} are comparable (nested)")]
    ComparableCylinders(Word, Word),

    #[error("resource limit exceeded: {0} (budget {1})")]
    ResourceLimit(&'static str, u64),
    #[error("descent stuck: no second-kind Whitehead automorphism decreases L = {length} of non-simple {map}")]
    DescentStuck { map: String, length: String },

    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}
