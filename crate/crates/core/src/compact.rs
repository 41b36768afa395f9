//! Compact automata and their unfolding into plain finite automata.
//!
//! A compact automaton has compact states denoting sets of concrete
//! elements (via the image function `f`), and compact transitions guarded by
//! quantifier-free formulas over the triple (source element, label, target
//! element). Unfolding produces a plain automaton:
//!
//! * a compact transition between two *different* compact states generates
//!   every guarded triple between their images — including concrete loops
//!   when the images overlap;
//! * a compact *self-loop* generates only concrete self-loops.
//!
//! Elements may carry annotations that the guard atoms consult: a linked
//! letter (the element doubles as a letter of the alphabet, used by
//! environments that broadcast their own state), an underlying letter (a
//! candidate tagged with the strategy it denotes), and a counterpart (the
//! pairing between a candidate and its committed form).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automaton::{Diagnostic, FiniteAutomaton, Transition};
use crate::label::{Alphabet, Label};

/// Per-element annotations consulted by guard atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElementAnnotations {
    /// The element doubles as this letter of the alphabet.
    pub linked_letter: Option<String>,
    /// The letter this element stands for (e.g. a coping strategy).
    pub underlying_letter: Option<String>,
    /// The paired element (a partial involution).
    pub counterpart: Option<String>,
}

impl ElementAnnotations {
    pub fn is_empty(&self) -> bool {
        self.linked_letter.is_none()
            && self.underlying_letter.is_none()
            && self.counterpart.is_none()
    }
}

/// A named finite set of elements with optional annotations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElementUniverse {
    pub name: String,
    pub elements: BTreeSet<String>,
    pub annotations: BTreeMap<String, ElementAnnotations>,
}

impl ElementUniverse {
    pub fn new(
        name: impl Into<String>,
        elements: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        ElementUniverse {
            name: name.into(),
            elements: elements.into_iter().map(Into::into).collect(),
            annotations: BTreeMap::new(),
        }
    }

    pub fn annotations_of(&self, element: &str) -> Option<&ElementAnnotations> {
        self.annotations.get(element)
    }

    pub fn linked_letter(&self, element: &str) -> Option<&str> {
        self.annotations
            .get(element)
            .and_then(|a| a.linked_letter.as_deref())
    }

    pub fn underlying_letter(&self, element: &str) -> Option<&str> {
        self.annotations
            .get(element)
            .and_then(|a| a.underlying_letter.as_deref())
    }

    pub fn counterpart(&self, element: &str) -> Option<&str> {
        self.annotations
            .get(element)
            .and_then(|a| a.counterpart.as_deref())
    }
}

/// A directed labeled graph over the elements of one universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    pub name: String,
    /// Name of the universe the vertices come from.
    pub universe: String,
    pub labels: BTreeSet<Label>,
    pub edges: BTreeSet<(String, Label, String)>,
}

impl LabeledGraph {
    pub fn new(name: impl Into<String>, universe: impl Into<String>) -> Self {
        LabeledGraph {
            name: name.into(),
            universe: universe.into(),
            labels: BTreeSet::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn with_edges(
        mut self,
        labels: impl IntoIterator<Item = Label>,
        edges: impl IntoIterator<Item = (String, Label, String)>,
    ) -> Self {
        self.labels = labels.into_iter().collect();
        self.edges = edges.into_iter().collect();
        self
    }

    pub fn has_edge(&self, source: &str, label: &Label, target: &str) -> bool {
        self.edges
            .iter()
            .any(|(s, l, t)| s == source && l == label && t == target)
    }
}

/// Quantifier-free guard over (source element, label, target element).
///
/// Atoms referencing an annotation the source element does not carry
/// evaluate to false; validation warns about such uses.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Guard {
    True,
    /// label = a
    LabelIs(Label),
    /// label = linked letter of the source element
    LabelEqualsSourceName,
    /// label = underlying letter of the source element
    LabelEqualsSourceUnderlying,
    /// target = counterpart of the source element
    TargetIsCounterpartOfSource,
    /// source = x
    SourceIs(String),
    /// target = y
    TargetIs(String),
    /// (source, label, target) is an edge of the named graph
    EdgeIn(String),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
    Not(Box<Guard>),
}

impl Guard {
    pub fn and(self, other: Guard) -> Guard {
        Guard::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Guard) -> Guard {
        Guard::Or(Box::new(self), Box::new(other))
    }

    /// Graph names referenced anywhere in the formula.
    pub fn referenced_graphs(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_graphs(&mut out);
        out
    }

    fn collect_graphs<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Guard::EdgeIn(g) => {
                out.insert(g.as_str());
            }
            Guard::And(a, b) | Guard::Or(a, b) => {
                a.collect_graphs(out);
                b.collect_graphs(out);
            }
            Guard::Not(a) => a.collect_graphs(out),
            _ => {}
        }
    }

    /// True when the formula uses the linked-letter atom.
    pub fn uses_source_name(&self) -> bool {
        self.any_atom(&|g| matches!(g, Guard::LabelEqualsSourceName))
    }

    /// True when the formula uses the underlying-letter atom.
    pub fn uses_source_underlying(&self) -> bool {
        self.any_atom(&|g| matches!(g, Guard::LabelEqualsSourceUnderlying))
    }

    /// True when the formula uses the counterpart atom.
    pub fn uses_counterpart(&self) -> bool {
        self.any_atom(&|g| matches!(g, Guard::TargetIsCounterpartOfSource))
    }

    fn any_atom(&self, pred: &dyn Fn(&Guard) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Guard::And(a, b) | Guard::Or(a, b) => a.any_atom(pred) || b.any_atom(pred),
            Guard::Not(a) => a.any_atom(pred),
            _ => false,
        }
    }
}

impl std::ops::Not for Guard {
    type Output = Guard;

    fn not(self) -> Guard {
        Guard::Not(Box::new(self))
    }
}

/// Concrete syntax of guards, as used in model documents.
impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => f.write_str("true"),
            Guard::LabelIs(l) => write!(f, "label {l}"),
            Guard::LabelEqualsSourceName => f.write_str("label src.name"),
            Guard::LabelEqualsSourceUnderlying => f.write_str("label src.under"),
            Guard::TargetIsCounterpartOfSource => f.write_str("target counterpart"),
            Guard::SourceIs(x) => write!(f, "src {x}"),
            Guard::TargetIs(y) => write!(f, "target {y}"),
            Guard::EdgeIn(g) => write!(f, "edge {g}"),
            Guard::And(a, b) => {
                write_operand(f, a)?;
                f.write_str(" & ")?;
                write_operand(f, b)
            }
            Guard::Or(a, b) => {
                write_operand(f, a)?;
                f.write_str(" | ")?;
                write_operand(f, b)
            }
            Guard::Not(a) => {
                f.write_str("!")?;
                write_operand(f, a)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Guard) -> fmt::Result {
    if matches!(g, Guard::And(..) | Guard::Or(..)) {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

/// A compact automaton: compact states with element images, guarded compact
/// transitions, and initial *elements*.
///
/// Element identity is global: compact states with overlapping images denote
/// shared unfolded states. The graphs referenced by guards are carried along
/// so the automaton unfolds without external context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactAutomaton {
    pub name: String,
    pub alphabet: Alphabet,
    pub universe: ElementUniverse,
    /// Image function: compact state -> elements it denotes.
    pub images: BTreeMap<String, BTreeSet<String>>,
    pub transitions: BTreeSet<(String, Guard, String)>,
    /// Initial elements, drawn from the union of the images.
    pub initials: BTreeSet<String>,
    /// Graphs referenced by guards, keyed by name.
    pub graphs: BTreeMap<String, LabeledGraph>,
}

impl CompactAutomaton {
    /// All unfolded states: the union of the images.
    pub fn unfolded_states(&self) -> BTreeSet<String> {
        self.images.values().flatten().cloned().collect()
    }

    /// Evaluates a guard on a concrete triple.
    pub fn eval_guard(&self, guard: &Guard, source: &str, label: &Label, target: &str) -> bool {
        match guard {
            Guard::True => true,
            Guard::LabelIs(l) => label == l,
            Guard::LabelEqualsSourceName => match self.universe.linked_letter(source) {
                Some(name) => label.letter_name() == Some(name),
                None => false,
            },
            Guard::LabelEqualsSourceUnderlying => {
                match self.universe.underlying_letter(source) {
                    Some(name) => label.letter_name() == Some(name),
                    None => false,
                }
            }
            Guard::TargetIsCounterpartOfSource => {
                self.universe.counterpart(source) == Some(target)
            }
            Guard::SourceIs(x) => source == x,
            Guard::TargetIs(y) => target == y,
            Guard::EdgeIn(name) => self
                .graphs
                .get(name)
                .map(|g| g.has_edge(source, label, target))
                .unwrap_or(false),
            Guard::And(a, b) => {
                self.eval_guard(a, source, label, target)
                    && self.eval_guard(b, source, label, target)
            }
            Guard::Or(a, b) => {
                self.eval_guard(a, source, label, target)
                    || self.eval_guard(b, source, label, target)
            }
            Guard::Not(a) => !self.eval_guard(a, source, label, target),
        }
    }

    /// Unfolds into a plain finite automaton of the same name.
    pub fn unfold(&self) -> FiniteAutomaton {
        let states = self.unfolded_states();
        let labels = self.alphabet.labels_with_tau();
        let mut transitions = BTreeSet::new();
        for (source_cs, guard, target_cs) in &self.transitions {
            let empty = BTreeSet::new();
            let sources = self.images.get(source_cs).unwrap_or(&empty);
            let targets = self.images.get(target_cs).unwrap_or(&empty);
            if source_cs != target_cs {
                // Cross-state compact transition: all guarded pairs, loops
                // included when the images overlap.
                for x in sources {
                    for label in &labels {
                        for y in targets {
                            if self.eval_guard(guard, x, label, y) {
                                transitions.insert(Transition::new(
                                    x.clone(),
                                    label.clone(),
                                    y.clone(),
                                ));
                            }
                        }
                    }
                }
            } else {
                // Compact self-loop: concrete self-loops only.
                for x in sources {
                    for label in &labels {
                        if self.eval_guard(guard, x, label, x) {
                            transitions.insert(Transition::new(
                                x.clone(),
                                label.clone(),
                                x.clone(),
                            ));
                        }
                    }
                }
            }
        }
        FiniteAutomaton::new(
            self.name.clone(),
            self.alphabet.clone(),
            states,
            transitions,
            self.initials.clone(),
        )
    }
}

/// Structural validation of a compact automaton: empty images, initial
/// elements outside the images, dangling references, annotation atoms used
/// on elements without the annotation.
pub fn validate_compact(c: &CompactAutomaton) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    for (cs, image) in &c.images {
        if image.is_empty() {
            diags.push(Diagnostic::new(format!(
                "compact state `{cs}` has an empty image"
            )));
        }
        for e in image {
            if !c.universe.elements.contains(e) {
                diags.push(Diagnostic::new(format!(
                    "compact state `{cs}` maps to unknown element `{e}`"
                )));
            }
        }
    }

    let unfolded = c.unfolded_states();
    for e in &c.initials {
        if !unfolded.contains(e) {
            diags.push(Diagnostic::new(format!(
                "initial element `{e}` is outside the union of the images"
            )));
        }
    }
    if c.initials.is_empty() {
        diags.push(Diagnostic::new("empty initial set"));
    }

    for (element, ann) in &c.universe.annotations {
        if !c.universe.elements.contains(element) {
            diags.push(Diagnostic::new(format!(
                "annotation on unknown element `{element}`"
            )));
            continue;
        }
        if let Some(letter) = &ann.linked_letter {
            if !c.alphabet.contains(letter) {
                diags.push(Diagnostic::new(format!(
                    "element `{element}` links to unknown letter `{letter}`"
                )));
            }
        }
        if let Some(letter) = &ann.underlying_letter {
            if !c.alphabet.contains(letter) {
                diags.push(Diagnostic::new(format!(
                    "element `{element}` carries unknown underlying letter `{letter}`"
                )));
            }
        }
        if let Some(other) = &ann.counterpart {
            if !c.universe.elements.contains(other) {
                diags.push(Diagnostic::new(format!(
                    "element `{element}` pairs with unknown element `{other}`"
                )));
            } else if c.universe.counterpart(other) != Some(element.as_str()) {
                diags.push(Diagnostic::new(format!(
                    "counterpart pairing `{element}` <-> `{other}` is not an involution"
                )));
            }
        }
    }

    for (source_cs, guard, target_cs) in &c.transitions {
        for cs in [source_cs, target_cs] {
            if !c.images.contains_key(cs) {
                diags.push(Diagnostic::new(format!(
                    "compact transition references unknown compact state `{cs}`"
                )));
            }
        }
        for g in guard.referenced_graphs() {
            match c.graphs.get(g) {
                None => diags.push(Diagnostic::new(format!(
                    "guard references unknown graph `{g}`"
                ))),
                Some(graph) => {
                    if graph.universe != c.universe.name {
                        diags.push(Diagnostic::new(format!(
                            "graph `{g}` is over universe `{}`, not `{}`",
                            graph.universe, c.universe.name
                        )));
                    }
                }
            }
        }
        // Annotation atoms on elements lacking the annotation: warn at
        // validation time (the atom itself evaluates to false).
        if let Some(image) = c.images.get(source_cs) {
            for x in image {
                if guard.uses_source_name() && c.universe.linked_letter(x).is_none() {
                    diags.push(Diagnostic::new(format!(
                        "guard `{guard}` reads the linked letter of `{x}`, which has none"
                    )));
                }
                if guard.uses_source_underlying() && c.universe.underlying_letter(x).is_none() {
                    diags.push(Diagnostic::new(format!(
                        "guard `{guard}` reads the underlying letter of `{x}`, which has none"
                    )));
                }
                if guard.uses_counterpart() && c.universe.counterpart(x).is_none() {
                    diags.push(Diagnostic::new(format!(
                        "guard `{guard}` reads the counterpart of `{x}`, which has none"
                    )));
                }
            }
        }
    }

    for graph in c.graphs.values() {
        for l in &graph.labels {
            if !c.alphabet.contains_label(l) {
                diags.push(Diagnostic::new(format!(
                    "graph `{}` declares label `{l}` outside the alphabet",
                    graph.name
                )));
            }
        }
        for (s, l, t) in &graph.edges {
            if !c.universe.elements.contains(s) || !c.universe.elements.contains(t) {
                diags.push(Diagnostic::new(format!(
                    "graph `{}` edge ({s},{l},{t}) uses elements outside `{}`",
                    graph.name, c.universe.name
                )));
            }
            if !graph.labels.contains(l) {
                diags.push(Diagnostic::new(format!(
                    "graph `{}` edge ({s},{l},{t}) uses a label outside its label set",
                    graph.name
                )));
            }
        }
    }

    diags
}
