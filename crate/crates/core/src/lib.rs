//! Systems of finite automata synchronized via generalized rendezvous.
//!
//! The crate provides:
//!
//! * plain finite automata (no accepting states) with validation and
//!   elementary queries ([`automaton`]);
//! * systems of automata with rendezvous semantics: a letter fires only when
//!   every automaton owning that letter fires it too, while `tau` steps are
//!   always local ([`system`], [`trace`], [`sim`]);
//! * compact automata whose states denote element sets and whose transitions
//!   carry guard formulas, unfolded into plain automata ([`compact`]);
//! * three refinement quasi-orders — on labels, on automata via partition
//!   witnesses, and on systems — with an exhaustive checker and an
//!   independent witness verifier ([`refine`]);
//! * language tools: alphabet projection, bounded word sets, exact language
//!   inclusion with shortest counterexamples, and the simulation preorder
//!   ([`lang`]);
//! * a worked model chain of stress appraisal and coping, from a one-state
//!   system to a five-automaton system with commitments ([`stress`]);
//! * a textual document format with canonical serialization, plus DOT
//!   export ([`doc`], [`dot`]).

pub mod automaton;
pub mod compact;
pub mod doc;
pub mod dot;
pub mod error;
pub mod label;
pub mod lang;
pub mod refine;
pub mod sim;
pub mod stress;
pub mod system;
pub mod trace;

pub use automaton::{validate_automaton, Diagnostic, FiniteAutomaton, Transition};
pub use compact::{
    validate_compact, CompactAutomaton, ElementAnnotations, ElementUniverse, Guard, LabeledGraph,
};
pub use doc::{parse_document, serialize_document, AutomatonDecl, ModelDocument, ParseError};
pub use error::ModelError;
pub use label::{Alphabet, Label};
pub use lang::{determinize, language_includes, project, simulates, words_upto, WordSet};
pub use refine::{
    automaton_leq, label_leq, system_leq, transition_leq, verify_witness, PartitionWitness,
    RefinementReport,
};
pub use sim::{simulate, Policy, SimulationRun, Simulator};
pub use stress::{money_params, reference_traces, stage, stressed, Stage, StageParams};
pub use system::{GlobalState, GlobalTransition, System};
pub use trace::{parse_trace, validate_trace, Trace, TraceError};
