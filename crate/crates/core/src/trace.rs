//! Traces (executions) and their text format.
//!
//! A trace is an alternating sequence `g0 --l1--> g1 --l2--> ... --lk--> gk`
//! of global states and labels. The text format is one step per line:
//!
//! ```text
//! (na,f) --tau--> (a,f)
//! (a,f) --s--> (a,f)
//! ```
//!
//! A zero-step trace is a single line holding just the start state. The
//! format is emitted and consumed byte-exactly by the command-line tool.

use std::fmt;

use thiserror::Error;

use crate::label::Label;
use crate::system::{GlobalState, System};

/// An execution candidate: a start state and a sequence of labeled steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: GlobalState,
    pub steps: Vec<(Label, GlobalState)>,
}

impl Trace {
    pub fn new(start: GlobalState) -> Self {
        Trace {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The state reached after the last step.
    pub fn end(&self) -> &GlobalState {
        self.steps.last().map(|(_, g)| g).unwrap_or(&self.start)
    }

    /// The source state of step `index` (0-based).
    pub fn source_of_step(&self, index: usize) -> &GlobalState {
        if index == 0 {
            &self.start
        } else {
            &self.steps[index - 1].1
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return writeln!(f, "{}", self.start);
        }
        let mut current = &self.start;
        for (label, target) in &self.steps {
            writeln!(f, "{current} --{label}--> {target}")?;
            current = target;
        }
        Ok(())
    }
}

/// Why a trace is not an execution of a system.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceError {
    /// A state in the trace is not a well-formed global state.
    #[error("malformed state: {0}")]
    Malformed(String),
    /// The start state is not a global initial state.
    #[error("start state {0} is not initial")]
    NotInitial(GlobalStateText),
    /// Step `step` (1-based) is not enabled at its source.
    #[error("step {step} not enabled: {from} --{label}--> {to}")]
    StepNotEnabled {
        step: usize,
        from: GlobalStateText,
        label: Label,
        to: GlobalStateText,
    },
}

/// Rendered global state carried inside errors.
pub type GlobalStateText = String;

/// Accepts the trace iff its start state is a global initial state and every
/// step is an enabled transition. Rejection reports the first failing step
/// (1-based); a non-initial start is a distinct error.
pub fn validate_trace(system: &System, trace: &Trace) -> Result<(), TraceError> {
    system
        .check_global_state(&trace.start)
        .map_err(|e| TraceError::Malformed(e.to_string()))?;
    if !system.global_initials().contains(&trace.start) {
        return Err(TraceError::NotInitial(trace.start.to_string()));
    }
    let mut current = trace.start.clone();
    for (i, (label, target)) in trace.steps.iter().enumerate() {
        system
            .check_global_state(target)
            .map_err(|e| TraceError::Malformed(e.to_string()))?;
        let ok = system
            .step_enabled(&current, label, target)
            .map_err(|e| TraceError::Malformed(e.to_string()))?;
        if !ok {
            return Err(TraceError::StepNotEnabled {
                step: i + 1,
                from: current.to_string(),
                label: label.clone(),
                to: target.to_string(),
            });
        }
        current = target.clone();
    }
    Ok(())
}

/// Error while reading the trace text format.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

fn parse_state(text: &str, line: usize) -> Result<GlobalState, TraceParseError> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| TraceParseError {
            line,
            message: format!("expected a state tuple `(...)`, found `{text}`"),
        })?;
    let components: Vec<String> = inner.split(',').map(|c| c.trim().to_string()).collect();
    if components.iter().any(String::is_empty) {
        return Err(TraceParseError {
            line,
            message: format!("empty component in state tuple `{text}`"),
        });
    }
    Ok(GlobalState(components))
}

/// Parses the trace text format. Blank lines are ignored. Consecutive steps
/// must chain (each source equals the previous target).
pub fn parse_trace(text: &str) -> Result<Trace, TraceParseError> {
    let mut trace: Option<Trace> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((lhs, rest)) = line.split_once("--") {
            let (label_text, rhs) = rest.split_once("-->").ok_or_else(|| TraceParseError {
                line: line_no,
                message: "expected `--label--> (state)`".into(),
            })?;
            let source = parse_state(lhs.trim(), line_no)?;
            let target = parse_state(rhs.trim(), line_no)?;
            let label = Label::parse(label_text.trim()).map_err(|e| TraceParseError {
                line: line_no,
                message: e.to_string(),
            })?;
            let trace = trace.get_or_insert_with(|| Trace::new(source.clone()));
            if trace.end() != &source {
                return Err(TraceParseError {
                    line: line_no,
                    message: format!(
                        "step source {source} does not chain from previous state {}",
                        trace.end()
                    ),
                });
            }
            trace.steps.push((label, target));
        } else {
            // A bare state line: only valid as a zero-step trace.
            let state = parse_state(line, line_no)?;
            if trace.is_some() {
                return Err(TraceParseError {
                    line: line_no,
                    message: "unexpected bare state after steps".into(),
                });
            }
            trace = Some(Trace::new(state));
        }
    }
    trace.ok_or(TraceParseError {
        line: 0,
        message: "empty trace".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{FiniteAutomaton, Transition};
    use crate::label::Alphabet;

    fn letter(name: &str) -> Label {
        Label::letter(name).unwrap()
    }

    fn two_member_system() -> System {
        let sigma = Alphabet::new(["s", "nostress"]).unwrap();
        let appraisal = FiniteAutomaton::new(
            "appraisal",
            sigma.clone(),
            ["na", "a"],
            [
                Transition::new("na", Label::Tau, "a"),
                Transition::new("a", letter("s"), "a"),
                Transition::new("a", letter("nostress"), "a"),
                Transition::new("a", Label::Tau, "na"),
                Transition::new("a", Label::Tau, "a"),
            ],
            ["na"],
        );
        let stress = FiniteAutomaton::new(
            "stress",
            sigma,
            ["f"],
            [
                Transition::new("f", letter("s"), "f"),
                Transition::new("f", letter("nostress"), "f"),
                Transition::new("f", Label::Tau, "f"),
            ],
            ["f"],
        );
        System::new(vec![appraisal, stress]).unwrap()
    }

    fn wake_appraise_sleep() -> Trace {
        let mut t = Trace::new(GlobalState::new(["na", "f"]));
        t.steps = vec![
            (Label::Tau, GlobalState::new(["a", "f"])),
            (letter("s"), GlobalState::new(["a", "f"])),
            (letter("nostress"), GlobalState::new(["a", "f"])),
            (Label::Tau, GlobalState::new(["na", "f"])),
        ];
        t
    }

    #[test]
    fn printed_execution_validates() {
        let s = two_member_system();
        assert_eq!(validate_trace(&s, &wake_appraise_sleep()), Ok(()));
    }

    #[test]
    fn stress_is_blocked_while_non_awake() {
        let s = two_member_system();
        let mut t = Trace::new(GlobalState::new(["na", "f"]));
        t.steps.push((letter("s"), GlobalState::new(["na", "f"])));
        assert!(matches!(
            validate_trace(&s, &t),
            Err(TraceError::StepNotEnabled { step: 1, .. })
        ));
    }

    #[test]
    fn non_initial_start_is_a_distinct_error() {
        let s = two_member_system();
        let t = Trace::new(GlobalState::new(["a", "f"]));
        assert!(matches!(validate_trace(&s, &t), Err(TraceError::NotInitial(_))));
    }

    #[test]
    fn text_round_trip() {
        let t = wake_appraise_sleep();
        let text = t.to_string();
        assert_eq!(parse_trace(&text).unwrap(), t);
        assert_eq!(
            text,
            "(na,f) --tau--> (a,f)\n(a,f) --s--> (a,f)\n(a,f) --nostress--> (a,f)\n(a,f) --tau--> (na,f)\n"
        );
    }

    #[test]
    fn zero_step_trace_is_one_bare_state() {
        let t = Trace::new(GlobalState::new(["na", "f"]));
        assert_eq!(t.to_string(), "(na,f)\n");
        assert_eq!(parse_trace("(na,f)\n").unwrap(), t);
    }

    #[test]
    fn broken_chain_is_rejected() {
        let text = "(na,f) --tau--> (a,f)\n(na,f) --s--> (a,f)\n";
        assert!(parse_trace(text).is_err());
    }
}
