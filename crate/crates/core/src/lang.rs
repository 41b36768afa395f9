//! Language comparison between automata: alphabet projection, bounded word
//! enumeration, exact inclusion with shortest counterexamples, and the
//! simulation preorder.
//!
//! Every state is accepting throughout: the language of an automaton is the
//! set of label sequences readable from some initial state. By default `tau`
//! is an ordinary visible letter (executions print their internal steps); a
//! weak mode treats it as an epsilon move instead.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automaton::FiniteAutomaton;
use crate::label::{Alphabet, Label};

/// Replaces every transition label outside the target alphabet with `tau`;
/// states and initial states are untouched. Distinctly labeled transitions
/// with equal endpoints may collapse (the relation is a set).
pub fn project(a: &FiniteAutomaton, target: &Alphabet) -> FiniteAutomaton {
    let mut projected = a.clone();
    projected.alphabet = target.clone();
    projected.transitions = a
        .transitions
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if !target.contains_label(&t.label) {
                t.label = Label::Tau;
            }
            t
        })
        .collect();
    projected
}

/// A finite, length-bounded word set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSet {
    pub words: BTreeSet<Vec<Label>>,
    pub bound: usize,
}

impl WordSet {
    pub fn contains(&self, word: &[Label]) -> bool {
        self.words.contains(word)
    }

    pub fn is_subset_of(&self, other: &WordSet) -> bool {
        self.words.is_subset(&other.words)
    }
}

fn successor_map(a: &FiniteAutomaton) -> BTreeMap<(&str, &Label), Vec<&str>> {
    let mut map: BTreeMap<(&str, &Label), Vec<&str>> = BTreeMap::new();
    for t in &a.transitions {
        map.entry((t.source.as_str(), &t.label))
            .or_default()
            .push(t.target.as_str());
    }
    map
}

/// All label sequences of length at most `bound` readable from some initial
/// state. An automaton without initial states reads nothing, not even the
/// empty word.
pub fn words_upto(a: &FiniteAutomaton, bound: usize) -> WordSet {
    let mut words = BTreeSet::new();
    if a.initials.is_empty() {
        return WordSet { words, bound };
    }
    let successors = successor_map(a);
    let labels = a.alphabet.labels_with_tau();
    let init: BTreeSet<&str> = a.initials.iter().map(String::as_str).collect();
    words.insert(Vec::new());
    let mut frontier: Vec<(Vec<Label>, BTreeSet<&str>)> = vec![(Vec::new(), init)];
    for _ in 0..bound {
        let mut next = Vec::new();
        for (word, states) in &frontier {
            for label in &labels {
                let mut post: BTreeSet<&str> = BTreeSet::new();
                for q in states {
                    if let Some(targets) = successors.get(&(*q, label)) {
                        post.extend(targets.iter().copied());
                    }
                }
                if post.is_empty() {
                    continue;
                }
                let mut extended = word.clone();
                extended.push(label.clone());
                words.insert(extended.clone());
                next.push((extended, post));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    WordSet { words, bound }
}

/// Subset construction with every state accepting: the result is
/// deterministic, reads exactly the same words, and names each state by the
/// sorted set of original states it stands for. The empty subset is not
/// materialized (a word is readable only while the subset stays nonempty).
pub fn determinize(a: &FiniteAutomaton) -> FiniteAutomaton {
    let successors = successor_map(a);
    let labels = a.alphabet.labels_with_tau();
    let render = |set: &BTreeSet<&str>| format!("{{{}}}", set.iter().copied().collect::<Vec<_>>().join(","));

    let mut states = BTreeSet::new();
    let mut transitions = BTreeSet::new();
    let mut initials = BTreeSet::new();
    if a.initials.is_empty() {
        return FiniteAutomaton::new(
            format!("det_{}", a.name),
            a.alphabet.clone(),
            states,
            transitions,
            initials,
        );
    }
    let init: BTreeSet<&str> = a.initials.iter().map(String::as_str).collect();
    initials.insert(render(&init));
    states.insert(render(&init));
    let mut frontier = vec![init.clone()];
    let mut seen = BTreeSet::from([init]);
    while let Some(current) = frontier.pop() {
        for label in &labels {
            let mut post: BTreeSet<&str> = BTreeSet::new();
            for q in &current {
                if let Some(targets) = successors.get(&(*q, label)) {
                    post.extend(targets.iter().copied());
                }
            }
            if post.is_empty() {
                continue;
            }
            transitions.insert(crate::automaton::Transition::new(
                render(&current),
                label.clone(),
                render(&post),
            ));
            states.insert(render(&post));
            if seen.insert(post.clone()) {
                frontier.push(post);
            }
        }
    }
    FiniteAutomaton::new(
        format!("det_{}", a.name),
        a.alphabet.clone(),
        states,
        transitions,
        initials,
    )
}

/// Result of a language-inclusion check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionOutcome {
    pub holds: bool,
    /// A shortest word readable by the subset side but not the superset
    /// side; ties broken by canonical label order.
    pub counterexample: Option<Vec<Label>>,
}

/// Renders a word as comma-separated label names (empty word as `<empty>`).
pub fn word_text(word: &[Label]) -> String {
    if word.is_empty() {
        "<empty>".to_string()
    } else {
        word.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn closure<'a>(
    successors: &BTreeMap<(&'a str, &'a Label), Vec<&'a str>>,
    set: BTreeSet<&'a str>,
) -> BTreeSet<&'a str> {
    let mut closed = set;
    let mut frontier: Vec<&str> = closed.iter().copied().collect();
    while let Some(q) = frontier.pop() {
        if let Some(targets) = successors.get(&(q, &Label::Tau)) {
            for t in targets {
                if closed.insert(t) {
                    frontier.push(t);
                }
            }
        }
    }
    closed
}

/// Decides whether every word of `subset` is a word of `superset`, by a
/// subset construction on both sides; exact, and returns a shortest
/// counterexample on failure. With `tau_as_epsilon`, `tau` steps are silent
/// and words range over visible letters only.
pub fn language_includes(
    superset: &FiniteAutomaton,
    subset: &FiniteAutomaton,
    tau_as_epsilon: bool,
) -> InclusionOutcome {
    let super_successors = successor_map(superset);
    let sub_successors = successor_map(subset);

    let mut sub_init: BTreeSet<&str> = subset.initials.iter().map(String::as_str).collect();
    let mut super_init: BTreeSet<&str> = superset.initials.iter().map(String::as_str).collect();
    if tau_as_epsilon {
        sub_init = closure(&sub_successors, sub_init);
        super_init = closure(&super_successors, super_init);
    }

    if sub_init.is_empty() {
        // The subset language is empty.
        return InclusionOutcome {
            holds: true,
            counterexample: None,
        };
    }
    if super_init.is_empty() {
        // Subset reads the empty word, superset reads nothing.
        return InclusionOutcome {
            holds: false,
            counterexample: Some(Vec::new()),
        };
    }

    let labels: Vec<Label> = if tau_as_epsilon {
        subset
            .alphabet
            .labels_with_tau()
            .into_iter()
            .filter(|l| !l.is_tau())
            .collect()
    } else {
        subset.alphabet.labels_with_tau()
    };

    let mut visited: BTreeSet<(BTreeSet<&str>, BTreeSet<&str>)> = BTreeSet::new();
    let mut queue: VecDeque<(Vec<Label>, BTreeSet<&str>, BTreeSet<&str>)> = VecDeque::new();
    visited.insert((sub_init.clone(), super_init.clone()));
    queue.push_back((Vec::new(), sub_init, super_init));

    while let Some((word, sub_states, super_states)) = queue.pop_front() {
        for label in &labels {
            let mut sub_post: BTreeSet<&str> = BTreeSet::new();
            for q in &sub_states {
                if let Some(targets) = sub_successors.get(&(*q, label)) {
                    sub_post.extend(targets.iter().copied());
                }
            }
            if tau_as_epsilon {
                sub_post = closure(&sub_successors, sub_post);
            }
            if sub_post.is_empty() {
                continue; // the subset side cannot read this extension
            }
            let mut super_post: BTreeSet<&str> = BTreeSet::new();
            for q in &super_states {
                if let Some(targets) = super_successors.get(&(*q, label)) {
                    super_post.extend(targets.iter().copied());
                }
            }
            if tau_as_epsilon {
                super_post = closure(&super_successors, super_post);
            }
            let mut extended = word.clone();
            extended.push(label.clone());
            if super_post.is_empty() {
                return InclusionOutcome {
                    holds: false,
                    counterexample: Some(extended),
                };
            }
            if visited.insert((sub_post.clone(), super_post.clone())) {
                queue.push_back((extended, sub_post, super_post));
            }
        }
    }

    InclusionOutcome {
        holds: true,
        counterexample: None,
    }
}

/// Result of a simulation-preorder check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationOutcome {
    pub holds: bool,
    /// The greatest simulation: pairs (abstract state, refined state) where
    /// the abstract state simulates the refined one.
    pub relation: BTreeSet<(String, String)>,
}

/// Greatest simulation of `refined` by `abstract_a`: a pair (p, q) survives
/// when every move of q is matched, label for label, by a move of p staying
/// in the relation. Holds when every refined initial state is simulated by
/// some abstract initial state.
pub fn simulates(abstract_a: &FiniteAutomaton, refined: &FiniteAutomaton) -> SimulationOutcome {
    let abs_successors = successor_map(abstract_a);
    let ref_successors = successor_map(refined);

    let mut relation: BTreeSet<(&str, &str)> = BTreeSet::new();
    for p in &abstract_a.states {
        for q in &refined.states {
            relation.insert((p.as_str(), q.as_str()));
        }
    }

    // Refined moves grouped by source.
    let mut ref_moves: BTreeMap<&str, Vec<(&Label, &str)>> = BTreeMap::new();
    for ((source, label), targets) in &ref_successors {
        for t in targets {
            ref_moves.entry(source).or_default().push((label, t));
        }
    }

    loop {
        let mut dropped = Vec::new();
        for &(p, q) in &relation {
            let moves = ref_moves.get(q).map(Vec::as_slice).unwrap_or(&[]);
            let simulated = moves.iter().all(|(label, q_next)| {
                abs_successors
                    .get(&(p, *label))
                    .map(|p_nexts| {
                        p_nexts
                            .iter()
                            .any(|p_next| relation.contains(&(*p_next, *q_next)))
                    })
                    .unwrap_or(false)
            });
            if !simulated {
                dropped.push((p, q));
            }
        }
        if dropped.is_empty() {
            break;
        }
        for pair in dropped {
            relation.remove(&pair);
        }
    }

    let holds = refined.initials.iter().all(|q| {
        abstract_a
            .initials
            .iter()
            .any(|p| relation.contains(&(p.as_str(), q.as_str())))
    });

    SimulationOutcome {
        holds,
        relation: relation
            .into_iter()
            .map(|(p, q)| (p.to_string(), q.to_string()))
            .collect(),
    }
}
