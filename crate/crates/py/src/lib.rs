//! Python bindings: a `Model` class wrapping a parsed document plus its
//! built system, and module-level checks (refinement, language inclusion,
//! simulation). Results come back as plain Python data; the canonical text
//! formats are the same ones the command-line tool reads and writes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rvz_core::doc::{parse_document, serialize_automaton, serialize_document, ModelDocument};
use rvz_core::dot::{export_dot_automaton, export_dot_compact};
use rvz_core::label::Label;
use rvz_core::lang::{self, word_text};
use rvz_core::refine::system_leq_with;
use rvz_core::sim::{simulate, Policy, SimulateError};
use rvz_core::stress::{money_params, reference_traces, stage, stressed};
use rvz_core::system::{GlobalState, System};
use rvz_core::trace::{parse_trace, validate_trace};

fn value_error(message: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(message.to_string())
}

fn parse_label_list(text: &str) -> PyResult<Vec<Label>> {
    text.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| Label::parse(part).map_err(value_error))
        .collect()
}

/// A parsed model document together with its built system.
#[pyclass]
struct Model {
    doc: ModelDocument,
    system: System,
}

impl Model {
    fn from_document(doc: ModelDocument) -> PyResult<Self> {
        let system = doc.build_system().map_err(value_error)?;
        Ok(Model { doc, system })
    }
}

#[pymethods]
impl Model {
    /// Parse a document from its text form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let doc = parse_document(text).map_err(|errors| {
            let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
            value_error(lines.join("\n"))
        })?;
        Model::from_document(doc)
    }

    /// Build a bundled model-chain stage (1..=7). Stages 4 and up take
    /// params="money".
    #[staticmethod]
    #[pyo3(signature = (index, params=None))]
    fn stage(index: u8, params: Option<&str>) -> PyResult<Self> {
        let params_value = match params {
            None => None,
            Some("money") => Some(money_params()),
            Some(other) => {
                return Err(value_error(format!(
                    "unknown parameter set `{other}` (try \"money\")"
                )))
            }
        };
        let built = stage(index, params_value.as_ref()).map_err(value_error)?;
        Model::from_document(built.to_document())
    }

    /// Canonical document text.
    fn serialize(&self) -> String {
        serialize_document(&self.doc)
    }

    /// Semantic diagnostics (empty list = valid).
    fn validate(&self) -> Vec<String> {
        self.doc.validate().iter().map(ToString::to_string).collect()
    }

    /// Names of all declared automata.
    fn automaton_names(&self) -> Vec<String> {
        self.doc.automata.keys().cloned().collect()
    }

    /// System members in declaration order.
    fn member_names(&self) -> Vec<String> {
        self.doc.system.clone()
    }

    /// Letters of the alphabet (without tau).
    fn letters(&self) -> Vec<String> {
        self.doc.alphabet.letters().map(str::to_string).collect()
    }

    /// The named automaton, unfolded if compact, as declaration text.
    fn unfold(&self, name: &str) -> PyResult<String> {
        match self.doc.automata.get(name) {
            Some(decl) => Ok(serialize_automaton(&decl.unfolded())),
            None => Err(value_error(format!("no automaton named `{name}`"))),
        }
    }

    /// Graphviz DOT text for the named automaton (compact ones keep their
    /// compact shape).
    fn export_dot(&self, name: &str) -> PyResult<String> {
        match self.doc.automata.get(name) {
            Some(rvz_core::doc::AutomatonDecl::Plain(a)) => Ok(export_dot_automaton(a)),
            Some(rvz_core::doc::AutomatonDecl::Compact(c)) => Ok(export_dot_compact(c)),
            None => Err(value_error(format!("no automaton named `{name}`"))),
        }
    }

    /// States of the product automaton, rendered as tuples.
    #[pyo3(signature = (reachable=false))]
    fn product_states(&self, reachable: bool) -> PyResult<Vec<String>> {
        let product = self.system.build_product(reachable).map_err(value_error)?;
        Ok(product.states.iter().cloned().collect())
    }

    /// Transitions of the product automaton as (source, label, target).
    #[pyo3(signature = (reachable=false))]
    fn product_transitions(&self, reachable: bool) -> PyResult<Vec<(String, String, String)>> {
        let product = self.system.build_product(reachable).map_err(value_error)?;
        Ok(product
            .transitions
            .iter()
            .map(|t| (t.source.clone(), t.label.to_string(), t.target.clone()))
            .collect())
    }

    /// The global initial states.
    fn initial_states(&self) -> Vec<String> {
        self.system
            .global_initials()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Transitions enabled at a global state given as component list, in
    /// canonical order, as (label, target-components).
    fn enabled(&self, state: Vec<String>) -> PyResult<Vec<(String, Vec<String>)>> {
        let transitions = self
            .system
            .enabled_global_transitions(&GlobalState(state))
            .map_err(value_error)?;
        Ok(transitions
            .into_iter()
            .map(|t| (t.label.to_string(), t.target.0))
            .collect())
    }

    /// Run the seeded-random policy; returns (trace text, deadlocked).
    #[pyo3(signature = (steps=20, seed=0))]
    fn simulate(&self, steps: usize, seed: u64) -> PyResult<(String, bool)> {
        let run = simulate(&self.system, &Policy::Random { seed }, steps).map_err(value_error)?;
        Ok((run.trace.to_string(), run.deadlocked))
    }

    /// Fire a comma-separated word (e.g. "tau,s,nostress"); returns the
    /// trace text. Raises ValueError when a label is blocked, naming the
    /// blocking components.
    fn simulate_word(&self, word: &str) -> PyResult<String> {
        let word = parse_label_list(word)?;
        let max_steps = word.len();
        match simulate(&self.system, &Policy::Scripted(word), max_steps) {
            Ok(run) => Ok(run.trace.to_string()),
            Err(e @ SimulateError::ScriptBlocked { .. }) => Err(value_error(e)),
            Err(e) => Err(value_error(e)),
        }
    }

    /// Replay trace text; returns (accepted, explanation).
    fn check_trace(&self, text: &str) -> PyResult<(bool, String)> {
        let trace = parse_trace(text).map_err(value_error)?;
        match validate_trace(&self.system, &trace) {
            Ok(()) => Ok((true, format!("accepted ({} steps)", trace.len()))),
            Err(e) => Ok((false, e.to_string())),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(members={:?}, letters={:?})",
            self.doc.system,
            self.letters()
        )
    }
}

/// Outcome of a refinement check.
#[pyclass(get_all)]
struct Refinement {
    /// Overall verdict.
    holds: bool,
    /// Stable rendering of the full report.
    text: String,
    /// Per-component block maps (abstract state -> refined states), None
    /// for components without a witness.
    witnesses: Vec<Option<std::collections::BTreeMap<String, Vec<String>>>>,
    /// Flattened diagnostics, component ones first.
    diagnostics: Vec<String>,
}

#[pymethods]
impl Refinement {
    fn __repr__(&self) -> String {
        format!("Refinement(holds={})", self.holds)
    }
}

/// Does the second model's system refine the first's? Componentwise
/// partition witnesses plus synchronization-set inclusion.
#[pyfunction]
#[pyo3(signature = (abstract_model, refined_model, relaxed=false))]
fn refine(abstract_model: &Model, refined_model: &Model, relaxed: bool) -> Refinement {
    let report = system_leq_with(&abstract_model.system, &refined_model.system, !relaxed);
    let witnesses = report
        .components
        .iter()
        .map(|c| {
            c.witness.as_ref().map(|w| {
                w.blocks
                    .iter()
                    .map(|(q, block)| (q.clone(), block.iter().cloned().collect()))
                    .collect()
            })
        })
        .collect();
    let mut diagnostics: Vec<String> = Vec::new();
    for c in &report.components {
        diagnostics.extend(c.diagnostics.iter().map(ToString::to_string));
    }
    diagnostics.extend(report.diagnostics.iter().map(ToString::to_string));
    Refinement {
        holds: report.holds,
        text: report.to_string(),
        witnesses,
        diagnostics,
    }
}

/// Is the subset system's product language included in the superset's?
/// Returns (holds, counterexample word or None).
#[pyfunction]
#[pyo3(signature = (superset, subset, project=false, tau_epsilon=false))]
fn includes(
    superset: &Model,
    subset: &Model,
    project: bool,
    tau_epsilon: bool,
) -> PyResult<(bool, Option<String>)> {
    let superset_p = superset.system.build_product(true).map_err(value_error)?;
    let mut subset_p = subset.system.build_product(true).map_err(value_error)?;
    if project {
        subset_p = lang::project(&subset_p, &superset_p.alphabet);
    }
    let outcome = lang::language_includes(&superset_p, &subset_p, tau_epsilon);
    Ok((
        outcome.holds,
        outcome.counterexample.as_deref().map(word_text),
    ))
}

/// Does the abstract system's product simulate the refined one's?
#[pyfunction]
fn simulates(abstract_model: &Model, refined_model: &Model) -> PyResult<bool> {
    let abstract_p = abstract_model
        .system
        .build_product(true)
        .map_err(value_error)?;
    let refined_p = refined_model
        .system
        .build_product(true)
        .map_err(value_error)?;
    Ok(lang::simulates(&abstract_p, &refined_p).holds)
}

/// The bundled reference execution of a chain stage (3..=6) as trace text.
#[pyfunction]
fn reference_trace(index: u8) -> PyResult<String> {
    let traces = reference_traces(index).map_err(value_error)?;
    Ok(traces
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Is the person stressed at (environment element, commitment element),
/// under the bundled money parameters?
#[pyfunction]
fn money_stressed(env: &str, commitment: &str) -> PyResult<bool> {
    stressed(env, commitment, &money_params()).map_err(value_error)
}

#[pymodule]
fn rvz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Model>()?;
    m.add_class::<Refinement>()?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(includes, m)?)?;
    m.add_function(wrap_pyfunction!(simulates, m)?)?;
    m.add_function(wrap_pyfunction!(reference_trace, m)?)?;
    m.add_function(wrap_pyfunction!(money_stressed, m)?)?;
    Ok(())
}
