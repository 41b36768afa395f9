//! Systems of automata synchronized via generalized rendezvous.
//!
//! A system is an ordered list of automata over one shared alphabet. Its
//! behavior is given by two rules over global states (one component state
//! per member):
//!
//! 1. `tau` steps: any single component takes a local `tau` transition while
//!    every other component is frozen. There is no blocking condition.
//! 2. letter steps: a letter `a` fires only if every member that owns at
//!    least one `a`-transition anywhere in its relation (the sync set of
//!    `a`) takes a local `a`-transition simultaneously; members outside the
//!    sync set are frozen.
//!
//! The explicit product automaton and the per-state enabled-transition
//! computation are two routes to the same relation and are cross-checked in
//! tests.

use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::{validate_automaton, FiniteAutomaton, Transition};
use crate::error::ModelError;
use crate::label::{Alphabet, Label};

/// One state per member automaton, in member order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState(pub Vec<String>);

impl GlobalState {
    pub fn new(components: impl IntoIterator<Item = impl Into<String>>) -> Self {
        GlobalState(components.into_iter().map(Into::into).collect())
    }

    pub fn components(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// A transition of the product semantics.
///
/// `movers` records which components produced the step: for a letter this is
/// its sync set; for `tau` it is every component whose local `tau` move could
/// have produced the step (the rules deliberately do not distinguish them).
/// Equality and ordering ignore `movers`: the global relation is a set of
/// (source, label, target) triples.
#[derive(Clone, Debug)]
pub struct GlobalTransition {
    pub source: GlobalState,
    pub label: Label,
    pub target: GlobalState,
    pub movers: BTreeSet<usize>,
}

impl PartialEq for GlobalTransition {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.label == other.label && self.target == other.target
    }
}

impl Eq for GlobalTransition {}

impl PartialOrd for GlobalTransition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GlobalTransition {
    /// Canonical order: label first (letters by name, `tau` last), then
    /// target tuple, then source tuple.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.label, &self.target, &self.source).cmp(&(
            &other.label,
            &other.target,
            &other.source,
        ))
    }
}

impl fmt::Display for GlobalTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} --{}--> {}", self.source, self.label, self.target)
    }
}

/// An ordered, nonempty list of valid automata over one shared alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    automata: Vec<FiniteAutomaton>,
}

impl System {
    /// Builds a system, checking that the member list is nonempty, that all
    /// members share one alphabet and that each member validates cleanly.
    pub fn new(automata: Vec<FiniteAutomaton>) -> Result<Self, ModelError> {
        let first = automata.first().ok_or(ModelError::EmptySystem)?;
        let sigma = first.alphabet.clone();
        for a in &automata {
            if a.alphabet != sigma {
                return Err(ModelError::AlphabetMismatch {
                    name: a.name.clone(),
                });
            }
            let diags = validate_automaton(a);
            if let Some(first) = diags.first() {
                return Err(ModelError::InvalidMember {
                    name: a.name.clone(),
                    first: first.message.clone(),
                });
            }
        }
        Ok(System { automata })
    }

    pub fn automata(&self) -> &[FiniteAutomaton] {
        &self.automata
    }

    pub fn len(&self) -> usize {
        self.automata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.automata.is_empty()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.automata[0].alphabet
    }

    /// The sync set of a letter: indices (0-based, in member order) of the
    /// automata owning at least one transition with that letter.
    pub fn sync_indices(&self, letter: &Label) -> Result<BTreeSet<usize>, ModelError> {
        if letter.is_tau() {
            return Err(ModelError::SyncSetOfTau);
        }
        Ok(self
            .automata
            .iter()
            .enumerate()
            .filter(|(_, a)| a.has_label(letter))
            .map(|(i, _)| i)
            .collect())
    }

    /// Checks arity and per-component membership of a global state.
    pub fn check_global_state(&self, g: &GlobalState) -> Result<(), ModelError> {
        if g.0.len() != self.automata.len() {
            return Err(ModelError::ArityMismatch {
                state: g.to_string(),
                expected: self.automata.len(),
                got: g.0.len(),
            });
        }
        for (i, (q, a)) in g.0.iter().zip(&self.automata).enumerate() {
            if !a.states.contains(q) {
                return Err(ModelError::BadComponent {
                    state: g.to_string(),
                    index: i,
                    automaton: a.name.clone(),
                });
            }
        }
        Ok(())
    }

    /// All global initial states (component-wise Cartesian product of the
    /// member initial sets), sorted.
    pub fn global_initials(&self) -> Vec<GlobalState> {
        let per_member: Vec<Vec<&String>> = self
            .automata
            .iter()
            .map(|a| a.initials.iter().collect())
            .collect();
        cartesian(&per_member)
    }

    /// All global states of the full product, sorted.
    pub fn global_states(&self) -> Vec<GlobalState> {
        let per_member: Vec<Vec<&String>> = self
            .automata
            .iter()
            .map(|a| a.states.iter().collect())
            .collect();
        cartesian(&per_member)
    }

    /// The transitions enabled at `g`, in canonical order.
    ///
    /// Steps with equal endpoints and label collapse to one transition with
    /// merged movers.
    pub fn enabled_global_transitions(
        &self,
        g: &GlobalState,
    ) -> Result<Vec<GlobalTransition>, ModelError> {
        self.check_global_state(g)?;
        let mut out: Vec<GlobalTransition> = Vec::new();

        // Rule 1: a single component moves on tau.
        for (i, a) in self.automata.iter().enumerate() {
            for t in a.transitions.iter().filter(|t| t.label.is_tau()) {
                if t.source != g.0[i] {
                    continue;
                }
                let mut target = g.0.clone();
                target[i] = t.target.clone();
                merge_step(
                    &mut out,
                    GlobalTransition {
                        source: g.clone(),
                        label: Label::Tau,
                        target: GlobalState(target),
                        movers: BTreeSet::from([i]),
                    },
                );
            }
        }

        // Rule 2: every sync-set member fires the letter, the rest freeze.
        for letter in self.alphabet().labels_with_tau() {
            if letter.is_tau() {
                continue;
            }
            let sync = self.sync_indices(&letter)?;
            if sync.is_empty() {
                continue;
            }
            // Local choices per sync member; empty choice set blocks the letter.
            let mut choices: Vec<(usize, Vec<&Transition>)> = Vec::new();
            let mut blocked = false;
            for &i in &sync {
                let local: Vec<&Transition> = self.automata[i]
                    .transitions
                    .iter()
                    .filter(|t| t.label == letter && t.source == g.0[i])
                    .collect();
                if local.is_empty() {
                    blocked = true;
                    break;
                }
                choices.push((i, local));
            }
            if blocked {
                continue;
            }
            let mut picks = vec![0usize; choices.len()];
            loop {
                let mut target = g.0.clone();
                for (slot, (i, local)) in choices.iter().enumerate() {
                    target[*i] = local[picks[slot]].target.clone();
                }
                merge_step(
                    &mut out,
                    GlobalTransition {
                        source: g.clone(),
                        label: letter.clone(),
                        target: GlobalState(target),
                        movers: sync.clone(),
                    },
                );
                // Advance the mixed-radix counter over local choices.
                let mut slot = 0;
                loop {
                    if slot == choices.len() {
                        break;
                    }
                    picks[slot] += 1;
                    if picks[slot] < choices[slot].1.len() {
                        break;
                    }
                    picks[slot] = 0;
                    slot += 1;
                }
                if slot == choices.len() {
                    break;
                }
            }
        }

        out.sort();
        Ok(out)
    }

    /// Whether the triple (g, label, g') is a step of the product semantics.
    pub fn step_enabled(
        &self,
        source: &GlobalState,
        label: &Label,
        target: &GlobalState,
    ) -> Result<bool, ModelError> {
        let enabled = self.enabled_global_transitions(source)?;
        Ok(enabled
            .iter()
            .any(|t| &t.label == label && &t.target == target))
    }

    /// The explicit product automaton. By default the state set is the full
    /// Cartesian product; with `reachable_only` it is pruned to the part
    /// reachable from the global initial states.
    pub fn build_product(&self, reachable_only: bool) -> Result<FiniteAutomaton, ModelError> {
        let states = self.global_states();
        let mut transitions = BTreeSet::new();
        for g in &states {
            for t in self.enabled_global_transitions(g)? {
                transitions.insert(Transition::new(
                    t.source.to_string(),
                    t.label,
                    t.target.to_string(),
                ));
            }
        }
        let product = FiniteAutomaton::new(
            format!("product_of_{}", self.automata.len()),
            self.alphabet().clone(),
            states.iter().map(|g| g.to_string()),
            transitions,
            self.global_initials().iter().map(|g| g.to_string()),
        );
        Ok(if reachable_only {
            product.restrict_to_reachable()
        } else {
            product
        })
    }
}

fn merge_step(out: &mut Vec<GlobalTransition>, step: GlobalTransition) {
    if let Some(existing) = out.iter_mut().find(|t| **t == step) {
        existing.movers.extend(step.movers);
    } else {
        out.push(step);
    }
}

fn cartesian(per_member: &[Vec<&String>]) -> Vec<GlobalState> {
    let mut acc: Vec<Vec<String>> = vec![Vec::new()];
    for options in per_member {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for prefix in &acc {
            for option in options {
                let mut tuple = prefix.clone();
                tuple.push((*option).clone());
                next.push(tuple);
            }
        }
        acc = next;
    }
    if per_member.is_empty() {
        return Vec::new();
    }
    let mut states: Vec<GlobalState> = acc.into_iter().map(GlobalState).collect();
    states.sort();
    states
}
