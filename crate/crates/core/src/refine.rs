//! Refinement quasi-orders on labels, automata, and systems.
//!
//! Labels: `tau` refines to anything, every label refines to itself.
//! Automata: the refined state set is partitioned into blocks indexed by
//! the abstract states; every refined transition must be matched, block to
//! block, by an abstract transition whose label is below the refined one,
//! and every refined initial state must sit in the block of an abstract
//! initial state. Systems: at least as many components, componentwise
//! automaton refinement at aligned indices, and inclusion of the
//! synchronization sets of every abstract letter.
//!
//! The witness search is an exhaustive backtracking over block assignments
//! and is exact at the scale this crate targets. Returned witnesses always
//! pass [`verify_witness`], which re-checks the conditions directly and
//! independently of the search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automaton::{FiniteAutomaton, Transition};
use crate::error::ModelError;
use crate::label::Label;
use crate::system::System;

/// `tau` is below every label; otherwise only equal labels are related.
pub fn label_leq(lower: &Label, upper: &Label) -> bool {
    lower.is_tau() || lower == upper
}

/// Transition refinement compares labels only; endpoints are ignored.
pub fn transition_leq(lower: &Transition, upper: &Transition) -> bool {
    label_leq(&lower.label, &upper.label)
}

/// Block family certifying an automaton refinement: each abstract state maps
/// to the set of refined states it abstracts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionWitness {
    pub blocks: BTreeMap<String, BTreeSet<String>>,
}

impl fmt::Display for PartitionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (abstract_state, block) in &self.blocks {
            let members: Vec<&str> = block.iter().map(String::as_str).collect();
            writeln!(f, "{} -> {{ {} }}", abstract_state, members.join(" "))?;
        }
        Ok(())
    }
}

/// One reason a refinement check failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementDiagnostic {
    /// The abstract alphabet is not included in the refined one.
    AlphabetNotIncluded { missing: Vec<String> },
    /// A refined transition matched by no abstract transition under the
    /// best assignment found.
    UnmatchedTransition { transition: Transition },
    /// A refined initial state lying in no abstract-initial block under the
    /// best assignment found.
    UnmatchedInitial { state: String },
    /// Strict mode requires a partition with nonempty blocks, which cannot
    /// exist when the refined automaton has fewer states.
    NoStrictPartition {
        abstract_states: usize,
        refined_states: usize,
    },
    /// The refined system has fewer components than the abstract one.
    TooFewComponents {
        abstract_len: usize,
        refined_len: usize,
    },
    /// An abstract letter whose synchronization set is not included in the
    /// refined one.
    SyncSetNotIncluded {
        letter: String,
        abstract_indices: Vec<usize>,
        refined_indices: Vec<usize>,
    },
}

impl fmt::Display for RefinementDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementDiagnostic::AlphabetNotIncluded { missing } => {
                write!(f, "alphabet not included; missing: {}", missing.join(" "))
            }
            RefinementDiagnostic::UnmatchedTransition { transition } => {
                write!(f, "unmatched transition: {transition}")
            }
            RefinementDiagnostic::UnmatchedInitial { state } => {
                write!(f, "unmatched initial state: {state}")
            }
            RefinementDiagnostic::NoStrictPartition {
                abstract_states,
                refined_states,
            } => write!(
                f,
                "no strict partition: {refined_states} refined states cannot fill {abstract_states} blocks"
            ),
            RefinementDiagnostic::TooFewComponents {
                abstract_len,
                refined_len,
            } => write!(
                f,
                "refined system has {refined_len} components, fewer than {abstract_len}"
            ),
            RefinementDiagnostic::SyncSetNotIncluded {
                letter,
                abstract_indices,
                refined_indices,
            } => write!(
                f,
                "sync set of `{letter}` not included: {abstract_indices:?} vs {refined_indices:?}"
            ),
        }
    }
}

/// Outcome of one automaton-level comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentReport {
    pub index: usize,
    pub abstract_name: String,
    pub refined_name: String,
    pub holds: bool,
    pub witness: Option<PartitionWitness>,
    pub diagnostics: Vec<RefinementDiagnostic>,
}

/// Verdict plus witnesses or diagnostics, for automaton- and system-level
/// refinement. Automaton-level reports carry exactly one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementReport {
    pub holds: bool,
    pub components: Vec<ComponentReport>,
    /// System-level diagnostics (component count, sync-set inclusion).
    pub diagnostics: Vec<RefinementDiagnostic>,
}

impl RefinementReport {
    /// The witness of a single-component (automaton-level) report.
    pub fn witness(&self) -> Option<&PartitionWitness> {
        self.components.first().and_then(|c| c.witness.as_ref())
    }
}

impl fmt::Display for RefinementReport {
    /// Stable rendering: verdict, then components in order with block maps
    /// (abstract state -> sorted refined states), then diagnostics.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", if self.holds { "holds" } else { "fails" })?;
        for c in &self.components {
            writeln!(
                f,
                "component {}: {} <= {}: {}",
                c.index,
                c.abstract_name,
                c.refined_name,
                if c.holds { "holds" } else { "fails" }
            )?;
            if let Some(witness) = &c.witness {
                for (abstract_state, block) in &witness.blocks {
                    let members: Vec<&str> = block.iter().map(String::as_str).collect();
                    writeln!(f, "  {} -> {{ {} }}", abstract_state, members.join(" "))?;
                }
            }
            for d in &c.diagnostics {
                writeln!(f, "  {d}")?;
            }
        }
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Search workspace for one automaton pair.
struct PairSearch<'a> {
    abstract_states: Vec<&'a str>,
    refined_states: Vec<&'a str>,
    /// Pairs (p,q) with an abstract tau transition p -> q.
    tau_pairs: BTreeSet<(usize, usize)>,
    /// Abstract transitions as (p, label, q) index triples.
    exact: BTreeSet<(usize, Label, usize)>,
    /// Refined transitions with endpoint indices.
    refined_transitions: Vec<(usize, Label, usize, &'a Transition)>,
    /// Transition indices adjacent to each refined state.
    adjacency: Vec<Vec<usize>>,
    /// Refined initial state indices.
    refined_initials: Vec<usize>,
    /// Abstract initial state indices.
    abstract_initials: BTreeSet<usize>,
}

impl<'a> PairSearch<'a> {
    fn new(abstract_a: &'a FiniteAutomaton, refined: &'a FiniteAutomaton) -> Self {
        let abstract_states: Vec<&str> = abstract_a.states.iter().map(String::as_str).collect();
        let refined_states: Vec<&str> = refined.states.iter().map(String::as_str).collect();
        let abs_index: BTreeMap<&str, usize> = abstract_states
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        let ref_index: BTreeMap<&str, usize> = refined_states
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();

        let mut tau_pairs = BTreeSet::new();
        let mut exact = BTreeSet::new();
        for t in &abstract_a.transitions {
            let p = abs_index[t.source.as_str()];
            let q = abs_index[t.target.as_str()];
            if t.label.is_tau() {
                tau_pairs.insert((p, q));
            }
            exact.insert((p, t.label.clone(), q));
        }

        let mut refined_transitions = Vec::new();
        let mut adjacency = vec![Vec::new(); refined_states.len()];
        for t in &refined.transitions {
            let p = ref_index[t.source.as_str()];
            let q = ref_index[t.target.as_str()];
            let idx = refined_transitions.len();
            refined_transitions.push((p, t.label.clone(), q, t));
            adjacency[p].push(idx);
            if q != p {
                adjacency[q].push(idx);
            }
        }

        PairSearch {
            abstract_states,
            refined_states,
            tau_pairs,
            exact,
            refined_transitions,
            adjacency,
            refined_initials: refined
                .initials
                .iter()
                .map(|s| ref_index[s.as_str()])
                .collect(),
            abstract_initials: abstract_a
                .initials
                .iter()
                .map(|s| abs_index[s.as_str()])
                .collect(),
        }
    }

    /// Is the refined transition label/endpoint combination matched when its
    /// endpoints sit in blocks `p` and `q`?
    fn matched(&self, p: usize, label: &Label, q: usize) -> bool {
        self.tau_pairs.contains(&(p, q)) || self.exact.contains(&(p, label.clone(), q))
    }

    /// Backtracking over assignments of refined states to abstract blocks.
    ///
    /// Refined initial states may only enter blocks of abstract initial
    /// states (the initial condition, propagated up front). Transitions are
    /// checked as soon as both endpoints are assigned. In strict mode the
    /// search prunes branches that can no longer fill every block.
    ///
    /// Candidate order: a same-named abstract state first (so a reflexive
    /// check returns the identity witness), then descending canonical order,
    /// so refined states left unconstrained gravitate to the block of the
    /// latest abstract state — the shape worked refinement diagrams use,
    /// with new behavior grouped under the newest abstract state.
    fn solve(&self, strict: bool) -> Option<Vec<usize>> {
        let n_refined = self.refined_states.len();
        let n_abstract = self.abstract_states.len();
        if strict && n_refined < n_abstract {
            return None;
        }
        let is_initial: Vec<bool> = (0..n_refined)
            .map(|i| self.refined_initials.contains(&i))
            .collect();
        let candidate_orders: Vec<Vec<usize>> = (0..n_refined)
            .map(|i| {
                let namesake = self
                    .abstract_states
                    .iter()
                    .position(|s| *s == self.refined_states[i]);
                let mut order: Vec<usize> = Vec::with_capacity(n_abstract);
                order.extend(namesake);
                order.extend((0..n_abstract).rev().filter(|c| Some(*c) != namesake));
                order
            })
            .collect();
        let mut assignment: Vec<Option<usize>> = vec![None; n_refined];
        let mut block_sizes = vec![0usize; n_abstract];
        if self.backtrack(
            0,
            strict,
            &is_initial,
            &candidate_orders,
            &mut assignment,
            &mut block_sizes,
        ) {
            Some(assignment.into_iter().map(Option::unwrap).collect())
        } else {
            None
        }
    }

    fn backtrack(
        &self,
        next: usize,
        strict: bool,
        is_initial: &[bool],
        candidate_orders: &[Vec<usize>],
        assignment: &mut Vec<Option<usize>>,
        block_sizes: &mut Vec<usize>,
    ) -> bool {
        let n_refined = self.refined_states.len();
        if next == n_refined {
            return !strict || block_sizes.iter().all(|&size| size > 0);
        }
        if strict {
            let empty_blocks = block_sizes.iter().filter(|&&size| size == 0).count();
            if n_refined - next < empty_blocks {
                return false;
            }
        }
        for &candidate in &candidate_orders[next] {
            if is_initial[next] && !self.abstract_initials.contains(&candidate) {
                continue;
            }
            assignment[next] = Some(candidate);
            let consistent = self.adjacency[next].iter().all(|&ti| {
                let (p, ref label, q, _) = self.refined_transitions[ti];
                match (assignment[p], assignment[q]) {
                    (Some(bp), Some(bq)) => self.matched(bp, label, bq),
                    _ => true,
                }
            });
            if consistent {
                block_sizes[candidate] += 1;
                if self.backtrack(
                    next + 1,
                    strict,
                    is_initial,
                    candidate_orders,
                    assignment,
                    block_sizes,
                ) {
                    return true;
                }
                block_sizes[candidate] -= 1;
            }
            assignment[next] = None;
        }
        false
    }

    /// Best-effort failure explanation: scans complete assignments (strict
    /// ones when strict mode is on), keeps the one matching the most
    /// transitions, breaking ties by matched initial states, and reports
    /// what it leaves unmatched. The scan is capped; the corpus scale never
    /// reaches the cap.
    fn explain_failure(&self, strict: bool) -> Vec<RefinementDiagnostic> {
        const CAP: u64 = 4_000_000;
        let n_refined = self.refined_states.len();
        let n_abstract = self.abstract_states.len();
        if strict && n_refined < n_abstract {
            return vec![RefinementDiagnostic::NoStrictPartition {
                abstract_states: n_abstract,
                refined_states: n_refined,
            }];
        }
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        let mut assignment = vec![0usize; n_refined];
        let mut scanned: u64 = 0;
        loop {
            scanned += 1;
            if scanned > CAP {
                break;
            }
            let surjective = {
                let mut seen = vec![false; n_abstract];
                for &b in &assignment {
                    seen[b] = true;
                }
                seen.iter().all(|&s| s)
            };
            if !strict || surjective {
                let matched_transitions = self
                    .refined_transitions
                    .iter()
                    .filter(|(p, label, q, _)| self.matched(assignment[*p], label, assignment[*q]))
                    .count();
                let matched_initials = self
                    .refined_initials
                    .iter()
                    .filter(|&&i| self.abstract_initials.contains(&assignment[i]))
                    .count();
                let better = match &best {
                    None => true,
                    Some((bt, bi, _)) => {
                        (matched_transitions, matched_initials) > (*bt, *bi)
                    }
                };
                if better {
                    best = Some((matched_transitions, matched_initials, assignment.clone()));
                }
            }
            // Advance the mixed-radix counter.
            let mut slot = 0;
            loop {
                if slot == n_refined {
                    break;
                }
                assignment[slot] += 1;
                if assignment[slot] < n_abstract {
                    break;
                }
                assignment[slot] = 0;
                slot += 1;
            }
            if slot == n_refined || n_refined == 0 {
                break;
            }
        }
        let Some((_, _, assignment)) = best else {
            return vec![RefinementDiagnostic::NoStrictPartition {
                abstract_states: n_abstract,
                refined_states: n_refined,
            }];
        };
        let mut diags = Vec::new();
        for (p, label, q, t) in &self.refined_transitions {
            if !self.matched(assignment[*p], label, assignment[*q]) {
                diags.push(RefinementDiagnostic::UnmatchedTransition {
                    transition: (*t).clone(),
                });
            }
        }
        for &i in &self.refined_initials {
            if !self.abstract_initials.contains(&assignment[i]) {
                diags.push(RefinementDiagnostic::UnmatchedInitial {
                    state: self.refined_states[i].to_string(),
                });
            }
        }
        diags
    }

    fn witness_from(&self, assignment: &[usize]) -> PartitionWitness {
        let mut blocks: BTreeMap<String, BTreeSet<String>> = self
            .abstract_states
            .iter()
            .map(|s| (s.to_string(), BTreeSet::new()))
            .collect();
        for (i, &b) in assignment.iter().enumerate() {
            blocks
                .get_mut(self.abstract_states[b])
                .unwrap()
                .insert(self.refined_states[i].to_string());
        }
        PartitionWitness { blocks }
    }
}

fn compare_pair(
    index: usize,
    abstract_a: &FiniteAutomaton,
    refined: &FiniteAutomaton,
    strict: bool,
) -> ComponentReport {
    let mut report = ComponentReport {
        index,
        abstract_name: abstract_a.name.clone(),
        refined_name: refined.name.clone(),
        holds: false,
        witness: None,
        diagnostics: Vec::new(),
    };
    if !abstract_a.alphabet.is_subset_of(&refined.alphabet) {
        report
            .diagnostics
            .push(RefinementDiagnostic::AlphabetNotIncluded {
                missing: abstract_a.alphabet.missing_from(&refined.alphabet),
            });
        return report;
    }
    let search = PairSearch::new(abstract_a, refined);
    match search.solve(strict) {
        Some(assignment) => {
            report.holds = true;
            report.witness = Some(search.witness_from(&assignment));
        }
        None => {
            report.diagnostics = search.explain_failure(strict);
        }
    }
    report
}

/// Decides automaton refinement (strict partitions: every block nonempty).
pub fn automaton_leq(abstract_a: &FiniteAutomaton, refined: &FiniteAutomaton) -> RefinementReport {
    automaton_leq_with(abstract_a, refined, true)
}

/// Automaton refinement with a choice of partition convention. Relaxed mode
/// allows empty blocks, treating the family as a total assignment of refined
/// states to abstract states.
pub fn automaton_leq_with(
    abstract_a: &FiniteAutomaton,
    refined: &FiniteAutomaton,
    strict: bool,
) -> RefinementReport {
    let component = compare_pair(0, abstract_a, refined, strict);
    RefinementReport {
        holds: component.holds,
        components: vec![component],
        diagnostics: Vec::new(),
    }
}

/// Direct check that a witness certifies the refinement: partition
/// well-formedness (disjoint nonempty blocks covering the refined states),
/// alphabet inclusion, the transition condition and the initial condition.
/// Implemented independently of the search. Block keys or members naming
/// unknown states are malformed and raise an error.
pub fn verify_witness(
    abstract_a: &FiniteAutomaton,
    refined: &FiniteAutomaton,
    witness: &PartitionWitness,
    strict: bool,
) -> Result<bool, ModelError> {
    for (abstract_state, block) in &witness.blocks {
        if !abstract_a.states.contains(abstract_state) {
            return Err(ModelError::MalformedWitness(format!(
                "block key `{abstract_state}` is not an abstract state"
            )));
        }
        for member in block {
            if !refined.states.contains(member) {
                return Err(ModelError::MalformedWitness(format!(
                    "block member `{member}` is not a refined state"
                )));
            }
        }
    }

    if !abstract_a.alphabet.is_subset_of(&refined.alphabet) {
        return Ok(false);
    }

    // Partition well-formedness over the refined state set.
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for (abstract_state, block) in &witness.blocks {
        if strict && block.is_empty() {
            return Ok(false);
        }
        for member in block {
            if owner.insert(member.as_str(), abstract_state.as_str()).is_some() {
                return Ok(false); // overlapping blocks
            }
        }
    }
    if owner.len() != refined.states.len() {
        return Ok(false); // blocks do not cover the refined states
    }
    if strict && witness.blocks.len() != abstract_a.states.len() {
        return Ok(false); // a block family must index every abstract state
    }

    // Transition condition.
    for t in &refined.transitions {
        let p = owner[t.source.as_str()];
        let q = owner[t.target.as_str()];
        let matched = abstract_a.transitions.iter().any(|abs| {
            abs.source == p && abs.target == q && label_leq(&abs.label, &t.label)
        });
        if !matched {
            return Ok(false);
        }
    }

    // Initial condition.
    for q in &refined.initials {
        let block_of_q = owner[q.as_str()];
        if !abstract_a.initials.contains(block_of_q) {
            return Ok(false);
        }
    }

    Ok(true)
}

/// Decides system refinement (strict partition convention).
pub fn system_leq(abstract_s: &System, refined: &System) -> RefinementReport {
    system_leq_with(abstract_s, refined, true)
}

/// System refinement with a choice of partition convention.
pub fn system_leq_with(abstract_s: &System, refined: &System, strict: bool) -> RefinementReport {
    let mut report = RefinementReport {
        holds: true,
        components: Vec::new(),
        diagnostics: Vec::new(),
    };
    let n = abstract_s.len();
    let m = refined.len();
    if n > m {
        report.holds = false;
        report.diagnostics.push(RefinementDiagnostic::TooFewComponents {
            abstract_len: n,
            refined_len: m,
        });
        return report;
    }
    for i in 0..n {
        let component = compare_pair(
            i,
            &abstract_s.automata()[i],
            &refined.automata()[i],
            strict,
        );
        report.holds &= component.holds;
        report.components.push(component);
    }
    for letter in abstract_s.alphabet().labels_with_tau() {
        if letter.is_tau() {
            continue;
        }
        let j_abstract = abstract_s.sync_indices(&letter).expect("letter");
        let j_refined = refined.sync_indices(&letter).expect("letter");
        if !j_abstract.is_subset(&j_refined) {
            report.holds = false;
            report.diagnostics.push(RefinementDiagnostic::SyncSetNotIncluded {
                letter: letter.to_string(),
                abstract_indices: j_abstract.into_iter().collect(),
                refined_indices: j_refined.into_iter().collect(),
            });
        }
    }
    report
}
