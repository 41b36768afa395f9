//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles re-implement the checked definitions by brute force and do
//! not call into the search/construction paths they are used to judge.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rvz_core::automaton::{FiniteAutomaton, Transition};
use rvz_core::compact::{CompactAutomaton, ElementUniverse, Guard, LabeledGraph};
use rvz_core::label::{Alphabet, Label};
use rvz_core::system::{GlobalState, System};
use rvz_core::trace::Trace;

pub fn letter(name: &str) -> Label {
    Label::letter(name).unwrap()
}

// ---------------------------------------------------------------------------
// Worked examples used across suites
// ---------------------------------------------------------------------------

/// Three automata synchronizing on `a` between the first two members, with a
/// private `b` loop on the third.
pub fn rendezvous_trio() -> System {
    let sigma = Alphabet::new(["a", "b"]).unwrap();
    let first = FiniteAutomaton::new(
        "first",
        sigma.clone(),
        ["q1", "q2"],
        [
            Transition::new("q1", letter("a"), "q2"),
            Transition::new("q2", Label::Tau, "q1"),
            Transition::new("q2", Label::Tau, "q2"),
        ],
        ["q1"],
    );
    let second = FiniteAutomaton::new(
        "second",
        sigma.clone(),
        ["p"],
        [Transition::new("p", letter("a"), "p")],
        ["p"],
    );
    let third = FiniteAutomaton::new(
        "third",
        sigma,
        ["r"],
        [
            Transition::new("r", letter("b"), "r"),
            Transition::new("r", Label::Tau, "r"),
        ],
        ["r"],
    );
    System::new(vec![first, second, third]).unwrap()
}

/// The two printed executions of the trio.
pub fn rendezvous_trio_executions() -> Vec<Trace> {
    let g = |a: &str| GlobalState::new([a, "p", "r"]);
    let mut first = Trace::new(g("q1"));
    first.steps = vec![
        (letter("a"), g("q2")),
        (letter("b"), g("q2")),
        (Label::Tau, g("q2")),
        (Label::Tau, g("q1")),
        (Label::Tau, g("q1")),
    ];
    let mut second = Trace::new(g("q1"));
    second.steps = vec![
        (letter("b"), g("q1")),
        (letter("a"), g("q2")),
        (letter("b"), g("q2")),
        (Label::Tau, g("q2")),
    ];
    vec![first, second]
}

/// Compact pair with full three-element images: a cross transition labeled
/// `a` and a self-loop labeled `b`.
pub fn full_image_compact_pair() -> CompactAutomaton {
    let universe = ElementUniverse::new("X", ["x0", "x1", "x2"]);
    let image: BTreeSet<String> = universe.elements.clone();
    CompactAutomaton {
        name: "pair".to_string(),
        alphabet: Alphabet::new(["a", "b"]).unwrap(),
        universe,
        images: BTreeMap::from([
            ("q".to_string(), image.clone()),
            ("p".to_string(), image),
        ]),
        transitions: BTreeSet::from([
            ("q".to_string(), Guard::LabelIs(letter("a")), "p".to_string()),
            ("q".to_string(), Guard::LabelIs(letter("b")), "q".to_string()),
        ]),
        initials: BTreeSet::from(["x0".to_string()]),
        graphs: BTreeMap::new(),
    }
}

/// Compact pair whose single cross transition is guarded by membership in a
/// three-edge graph.
pub fn graph_guarded_compact_pair() -> CompactAutomaton {
    let universe = ElementUniverse::new("X", ["x0", "x1", "x2"]);
    let image: BTreeSet<String> = universe.elements.clone();
    let graph = LabeledGraph::new("G", "X").with_edges(
        [letter("a"), letter("b")],
        [
            ("x0".to_string(), letter("a"), "x1".to_string()),
            ("x0".to_string(), letter("b"), "x2".to_string()),
            ("x1".to_string(), letter("b"), "x1".to_string()),
        ],
    );
    CompactAutomaton {
        name: "graphed".to_string(),
        alphabet: Alphabet::new(["a", "b"]).unwrap(),
        universe,
        images: BTreeMap::from([
            ("cx".to_string(), image.clone()),
            ("cy".to_string(), image),
        ]),
        transitions: BTreeSet::from([(
            "cx".to_string(),
            Guard::EdgeIn("G".to_string()),
            "cy".to_string(),
        )]),
        initials: BTreeSet::from(["x0".to_string()]),
        graphs: BTreeMap::from([("G".to_string(), graph)]),
    }
}

/// The worked refinement pair: two abstract states against five refined
/// states partitioned {p1,p2} / {p3,p4,p5}.
pub fn worked_refinement_pair() -> (FiniteAutomaton, FiniteAutomaton) {
    let abstract_a = FiniteAutomaton::new(
        "abs",
        Alphabet::new(["a"]).unwrap(),
        ["q1", "q2"],
        [
            Transition::new("q1", Label::Tau, "q1"),
            Transition::new("q1", Label::Tau, "q2"),
            Transition::new("q2", letter("a"), "q1"),
        ],
        ["q1"],
    );
    let refined = FiniteAutomaton::new(
        "ref",
        Alphabet::new(["a", "b", "c"]).unwrap(),
        ["p1", "p2", "p3", "p4", "p5"],
        [
            Transition::new("p1", Label::Tau, "p2"),
            Transition::new("p2", letter("b"), "p4"),
            Transition::new("p2", letter("c"), "p2"),
            Transition::new("p5", letter("a"), "p1"),
        ],
        ["p1"],
    );
    (abstract_a, refined)
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Brute-force unfolding: enumerate every compact transition against every
/// (source element, label, target element) triple and filter by the guard,
/// restricting compact self-loops to concrete self-loops.
pub fn oracle_unfold(c: &CompactAutomaton) -> BTreeSet<Transition> {
    let mut out = BTreeSet::new();
    let labels = c.alphabet.labels_with_tau();
    for (source_cs, guard, target_cs) in &c.transitions {
        let sources = c.images.get(source_cs).cloned().unwrap_or_default();
        let targets = c.images.get(target_cs).cloned().unwrap_or_default();
        for x in &sources {
            for label in &labels {
                for y in &targets {
                    if source_cs == target_cs && x != y {
                        continue;
                    }
                    if c.eval_guard(guard, x, label, y) {
                        out.insert(Transition::new(x.clone(), label.clone(), y.clone()));
                    }
                }
            }
        }
    }
    out
}

fn assignment_satisfies(
    abstract_a: &FiniteAutomaton,
    refined: &FiniteAutomaton,
    abs_states: &[&String],
    ref_states: &[&String],
    assignment: &[usize],
    strict: bool,
) -> bool {
    if strict {
        let mut filled = vec![false; abs_states.len()];
        for &b in assignment {
            filled[b] = true;
        }
        if !filled.iter().all(|&f| f) {
            return false;
        }
    }
    let block_of = |state: &str| -> &String {
        let idx = ref_states.iter().position(|s| s.as_str() == state).unwrap();
        abs_states[assignment[idx]]
    };
    for q in &refined.initials {
        if !abstract_a.initials.contains(block_of(q)) {
            return false;
        }
    }
    for t in &refined.transitions {
        let p_block = block_of(&t.source);
        let q_block = block_of(&t.target);
        let matched = abstract_a.transitions.iter().any(|abs| {
            &abs.source == p_block
                && &abs.target == q_block
                && (abs.label == Label::Tau || abs.label == t.label)
        });
        if !matched {
            return false;
        }
    }
    true
}

/// Exhaustive automaton-refinement oracle: tries every assignment of
/// refined states to abstract blocks and checks the definition directly.
pub fn oracle_automaton_leq(
    abstract_a: &FiniteAutomaton,
    refined: &FiniteAutomaton,
    strict: bool,
) -> bool {
    if !abstract_a.alphabet.is_subset_of(&refined.alphabet) {
        return false;
    }
    let abs_states: Vec<&String> = abstract_a.states.iter().collect();
    let ref_states: Vec<&String> = refined.states.iter().collect();
    if abs_states.is_empty() {
        return ref_states.is_empty();
    }
    let mut assignment = vec![0usize; ref_states.len()];
    loop {
        if assignment_satisfies(
            abstract_a,
            refined,
            &abs_states,
            &ref_states,
            &assignment,
            strict,
        ) {
            return true;
        }
        let mut slot = 0;
        loop {
            if slot == assignment.len() {
                return false;
            }
            assignment[slot] += 1;
            if assignment[slot] < abs_states.len() {
                break;
            }
            assignment[slot] = 0;
            slot += 1;
        }
        if assignment.is_empty() {
            return false;
        }
    }
}

/// Exhaustive system-refinement oracle: component count, componentwise
/// partition oracle, and inclusion of (independently recomputed)
/// synchronization sets for every abstract letter.
pub fn oracle_system_leq(abstract_s: &System, refined: &System, strict: bool) -> bool {
    if abstract_s.len() > refined.len() {
        return false;
    }
    for i in 0..abstract_s.len() {
        if !oracle_automaton_leq(
            &abstract_s.automata()[i],
            &refined.automata()[i],
            strict,
        ) {
            return false;
        }
    }
    for name in abstract_s.alphabet().letters() {
        let label = letter(name);
        let owners = |s: &System| -> BTreeSet<usize> {
            s.automata()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.transitions.iter().any(|t| t.label == label))
                .map(|(i, _)| i)
                .collect()
        };
        if !owners(abstract_s).is_subset(&owners(refined)) {
            return false;
        }
    }
    true
}
