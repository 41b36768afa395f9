//! Shared error type for model construction and queries.

use thiserror::Error;

/// Errors raised by constructors and queries on model values.
///
/// Structural problems that should be *reported* rather than rejected
/// (e.g. an automaton with an empty initial set) are diagnostics, not
/// errors; see [`crate::automaton::validate_automaton`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("the name `{0}` is reserved")]
    ReservedName(String),
    #[error("names must be nonempty")]
    EmptyName,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown automaton `{0}`")]
    UnknownAutomaton(String),
    #[error("a system needs at least one automaton")]
    EmptySystem,
    #[error("automaton `{name}` does not share the system alphabet")]
    AlphabetMismatch { name: String },
    #[error("automaton `{name}` is not valid for use in a system: {first}")]
    InvalidMember { name: String, first: String },
    #[error("global state {state} has {got} components, expected {expected}")]
    ArityMismatch {
        state: String,
        expected: usize,
        got: usize,
    },
    #[error("component {index} of {state} is not a state of automaton `{automaton}`")]
    BadComponent {
        state: String,
        index: usize,
        automaton: String,
    },
    #[error("J is defined only for letters of the alphabet, not tau")]
    SyncSetOfTau,
    #[error("stage index {0} is out of range 1..=7")]
    BadStageIndex(u8),
    #[error("stage {0} needs instantiation parameters")]
    MissingStageParams(u8),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("{0}")]
    Invalid(String),
}
