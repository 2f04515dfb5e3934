use thiserror::Error;

/// Errors produced by constructors and partial operations.
///
/// Rank mixing between already-constructed values is treated as a programming
/// error and panics instead; everything that validates external input returns
/// one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank must lie in {min}..={max}, got {got}", min = crate::word::Rank::MIN, max = crate::word::Rank::MAX)]
    InvalidRank { got: usize },
    #[error("letter {letter} out of range 1..={rank}")]
    LetterOutOfRange { letter: usize, rank: usize },
    #[error("cannot parse word from {input:?}")]
    WordParse { input: String },
    #[error("conjugator must not end with the core letter {letter}")]
    UnreducedInvolution { letter: u8 },
    #[error("partial conjugation must not move its own conjugating letter {letter}")]
    ConjugatingLetterInSet { letter: u8 },
    #[error("swap needs two distinct letters")]
    SwapEqualLetters,
    #[error("a leaf conjugation of letter {letter} needs a conjugator avoiding that letter")]
    ConjugatorTouchesLetter { letter: u8 },
    #[error("image tuple is not a valid marking: {reason}")]
    InvalidImages { reason: String },
    #[error("automorphism images do not match the declared move word")]
    ImageMismatch,
    #[error("whitehead descent exceeded its budget (depth {depth}, {states} states)")]
    DescentBudget { depth: usize, states: usize },
    #[error("generator words must be nonempty")]
    EmptyGenerator,
    #[error("subgroup has free part of rank {rank}, only involution-generated subgroups are supported here")]
    FreePart { rank: usize },
    #[error("free-factor status of a required subgroup is undecided within the search budget")]
    FreeFactorUndecided,
    #[error("subgroup is not a free factor")]
    NotAFreeFactor,
    #[error("twistor does not lie in a vertex group at the chosen edge")]
    TwistorNotInVertexGroup,
    #[error("edge index {index} out of range")]
    NoSuchEdge { index: usize },
    #[error("automorphism does not stabilize the splitting class")]
    NotAStabilizer,
    #[error("a star cannot have all of 1..={rank} in its center")]
    CenterIsEverything { rank: usize },
    #[error("splitting is not star-shaped")]
    NotAStar,
    #[error("cannot collapse every edge of a splitting")]
    CollapseEverything,
    #[error("classes are not corank-one free factor classes")]
    NotCorankOne,
    #[error("no aligned refinement found for the pair ({left}, {right})")]
    IncompatiblePair { left: String, right: String },
    #[error("star classes are not admissible vertices of the requested graph")]
    InadmissibleVertex,
    #[error("star classes are not pairwise adjacent")]
    NotPairwiseAdjacent,
    #[error("a family of {got} classes is not admissible here (need {min}..={max})")]
    BadFamilySize { got: usize, min: usize, max: usize },
    #[error("image classes are not jointly refinable: offending pair ({left}, {right})")]
    NotJointlyRefinable { left: String, right: String },
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("{0}")]
    Json(String),
}
