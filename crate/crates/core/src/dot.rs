//! Graphviz DOT export for plain and compact automata.
//!
//! Node and edge ordering is deterministic. Initial states get an incoming
//! arrow from a point node. Parallel plain transitions merge into one edge
//! with a comma-joined label list. A compact state whose image holds more
//! than one element renders with a double periphery, and a cross transition
//! guarded by graph membership is labeled `G/{labels}`; other guards are
//! labeled with their concrete syntax.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::automaton::FiniteAutomaton;
use crate::compact::{CompactAutomaton, Guard};

fn quoted(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT text for a plain automaton.
pub fn export_dot_automaton(a: &FiniteAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quoted(&a.name));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=circle];");
    for (i, _) in a.initials.iter().enumerate() {
        let _ = writeln!(out, "  {} [shape=point];", quoted(&format!("__init_{i}")));
    }
    for state in &a.states {
        let _ = writeln!(out, "  {};", quoted(state));
    }
    for (i, initial) in a.initials.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {} -> {};",
            quoted(&format!("__init_{i}")),
            quoted(initial)
        );
    }
    let mut grouped: BTreeMap<(&str, &str), Vec<String>> = BTreeMap::new();
    for t in &a.transitions {
        grouped
            .entry((t.source.as_str(), t.target.as_str()))
            .or_default()
            .push(t.label.to_string());
    }
    for ((source, target), labels) in grouped {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quoted(source),
            quoted(target),
            quoted(&labels.join(", "))
        );
    }
    out.push_str("}\n");
    out
}

fn guard_edge_label(c: &CompactAutomaton, guard: &Guard, is_loop: bool) -> String {
    if let Guard::EdgeIn(name) = guard {
        if !is_loop {
            let labels = c
                .graphs
                .get(name)
                .map(|g| {
                    g.labels
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .unwrap_or_default();
            return format!("{name}/{{{labels}}}");
        }
    }
    guard.to_string()
}

/// DOT text for a compact automaton. Initial elements arrow into the first
/// compact state whose image contains them, labeled with the element.
pub fn export_dot_compact(c: &CompactAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quoted(&c.name));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=circle];");
    for (i, _) in c.initials.iter().enumerate() {
        let _ = writeln!(out, "  {} [shape=point];", quoted(&format!("__init_{i}")));
    }
    for (cstate, image) in &c.images {
        if image.len() > 1 {
            let _ = writeln!(out, "  {} [shape=doublecircle];", quoted(cstate));
        } else {
            let _ = writeln!(out, "  {};", quoted(cstate));
        }
    }
    for (i, element) in c.initials.iter().enumerate() {
        let home = c
            .images
            .iter()
            .find(|(_, image)| image.contains(element))
            .map(|(cstate, _)| cstate.as_str());
        if let Some(home) = home {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}];",
                quoted(&format!("__init_{i}")),
                quoted(home),
                quoted(element)
            );
        }
    }
    let mut transitions: Vec<&(String, Guard, String)> = c.transitions.iter().collect();
    transitions.sort_by_key(|(s, g, t)| (s.clone(), g.to_string(), t.clone()));
    for (source, guard, target) in transitions {
        let label = guard_edge_label(c, guard, source == target);
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quoted(source),
            quoted(target),
            quoted(&label)
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Transition;
    use crate::label::{Alphabet, Label};

    #[test]
    fn single_state_loop_renders_two_nodes_two_edges() {
        let a = FiniteAutomaton::new(
            "universe",
            Alphabet::empty(),
            ["uni"],
            [Transition::new("uni", Label::Tau, "uni")],
            ["uni"],
        );
        let dot = export_dot_automaton(&a);
        let nodes = dot.lines().filter(|l| l.contains("shape=point") || *l == "  \"uni\";").count();
        let edges = dot.lines().filter(|l| l.contains("->")).count();
        assert_eq!(nodes, 2);
        assert_eq!(edges, 2);
        assert_eq!(dot, export_dot_automaton(&a));
    }

    #[test]
    fn parallel_labels_merge() {
        let sigma = Alphabet::new(["s", "nostress"]).unwrap();
        let a = FiniteAutomaton::new(
            "verdicts",
            sigma,
            ["f"],
            [
                Transition::new("f", Label::letter("s").unwrap(), "f"),
                Transition::new("f", Label::letter("nostress").unwrap(), "f"),
                Transition::new("f", Label::Tau, "f"),
            ],
            ["f"],
        );
        let dot = export_dot_automaton(&a);
        assert!(dot.contains("\"nostress, s, tau\""));
    }
}
