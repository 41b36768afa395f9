//! Plain finite automata without accepting states.
//!
//! An automaton is a named tuple (alphabet, states, transitions, initials).
//! The transition relation has set semantics: repeated declarations collapse.
//! Structural invariants are checked by [`validate_automaton`], which reports
//! diagnostics instead of rejecting, so partially built or degenerate
//! automata can still be inspected. Systems require members with no
//! diagnostics at all.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ModelError;
use crate::label::{Alphabet, Label};

/// One transition: source state, label, target state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: String,
    pub label: Label,
    pub target: String,
}

impl Transition {
    pub fn new(
        source: impl Into<String>,
        label: Label,
        target: impl Into<String>,
    ) -> Self {
        Transition {
            source: source.into(),
            label,
            target: target.into(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} --{}--> {}", self.source, self.label, self.target)
    }
}

/// A finite automaton without accepting states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAutomaton {
    pub name: String,
    pub alphabet: Alphabet,
    pub states: BTreeSet<String>,
    pub transitions: BTreeSet<Transition>,
    pub initials: BTreeSet<String>,
}

impl FiniteAutomaton {
    /// Builds an automaton. No invariant is enforced here; run
    /// [`validate_automaton`] to obtain diagnostics.
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        states: impl IntoIterator<Item = impl Into<String>>,
        transitions: impl IntoIterator<Item = Transition>,
        initials: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        FiniteAutomaton {
            name: name.into(),
            alphabet,
            states: states.into_iter().map(Into::into).collect(),
            transitions: transitions.into_iter().collect(),
            initials: initials.into_iter().map(Into::into).collect(),
        }
    }

    /// States reachable on `label` from `state` in one step.
    pub fn successors(
        &self,
        state: &str,
        label: &Label,
    ) -> Result<BTreeSet<String>, ModelError> {
        if !self.states.contains(state) {
            return Err(ModelError::UnknownState(state.to_string()));
        }
        if !self.alphabet.contains_label(label) {
            return Err(ModelError::UnknownLabel(label.to_string()));
        }
        Ok(self
            .transitions
            .iter()
            .filter(|t| t.source == state && &t.label == label)
            .map(|t| t.target.clone())
            .collect())
    }

    /// The set of labels appearing on at least one transition.
    pub fn letters_used(&self) -> BTreeSet<Label> {
        self.transitions.iter().map(|t| t.label.clone()).collect()
    }

    /// True when at least one transition carries this label. This is the
    /// membership test behind synchronization sets: it reads the full
    /// transition relation, not the current state.
    pub fn has_label(&self, label: &Label) -> bool {
        self.transitions.iter().any(|t| &t.label == label)
    }

    /// Least fixpoint of one-step successors from the initial states,
    /// over all labels.
    pub fn reachable_states(&self) -> BTreeSet<String> {
        let mut reached: BTreeSet<String> = self
            .initials
            .iter()
            .filter(|q| self.states.contains(*q))
            .cloned()
            .collect();
        let mut frontier: Vec<String> = reached.iter().cloned().collect();
        while let Some(state) = frontier.pop() {
            for t in self.transitions.iter().filter(|t| t.source == state) {
                if reached.insert(t.target.clone()) {
                    frontier.push(t.target.clone());
                }
            }
        }
        reached
    }

    /// Restriction to the reachable part (used by the product builder's
    /// pruning flag). Transition endpoints outside the kept set are dropped.
    pub fn restrict_to_reachable(&self) -> FiniteAutomaton {
        let kept = self.reachable_states();
        FiniteAutomaton {
            name: self.name.clone(),
            alphabet: self.alphabet.clone(),
            states: kept.clone(),
            transitions: self
                .transitions
                .iter()
                .filter(|t| kept.contains(&t.source) && kept.contains(&t.target))
                .cloned()
                .collect(),
            initials: self
                .initials
                .iter()
                .filter(|q| kept.contains(*q))
                .cloned()
                .collect(),
        }
    }
}

/// A structural problem found in a model value. The message names the
/// offending element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl Diagnostic {
    pub fn new(message: impl Into<String>) -> Self {
        Diagnostic {
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks the structural invariants of an automaton and returns one
/// diagnostic per violation (empty = valid).
///
/// An empty initial set is reported but does not make the value unusable
/// on its own; it only disqualifies the automaton from system membership,
/// where an empty component initial set would empty the whole product.
pub fn validate_automaton(a: &FiniteAutomaton) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if a.name.is_empty() {
        diags.push(Diagnostic::new("automaton has an empty name"));
    }
    for t in &a.transitions {
        if !a.states.contains(&t.source) {
            diags.push(Diagnostic::new(format!(
                "transition {t} uses unknown source state `{}`",
                t.source
            )));
        }
        if !a.states.contains(&t.target) {
            diags.push(Diagnostic::new(format!(
                "transition {t} uses unknown target state `{}`",
                t.target
            )));
        }
        if !a.alphabet.contains_label(&t.label) {
            diags.push(Diagnostic::new(format!(
                "transition {t} uses label `{}` outside the alphabet",
                t.label
            )));
        }
    }
    for q in &a.initials {
        if !a.states.contains(q) {
            diags.push(Diagnostic::new(format!(
                "initial state `{q}` is not a declared state"
            )));
        }
    }
    if a.initials.is_empty() {
        diags.push(Diagnostic::new("empty initial set"));
    }
    if a.states.is_empty() {
        diags.push(Diagnostic::new("empty state set"));
    }
    diags
}
