//! Step-by-step simulation of a system.
//!
//! [`Simulator`] exposes the current global state and the canonically
//! ordered enabled transitions, one step at a time; the interactive
//! command-line session is built on it. [`simulate`] drives it with a
//! policy: seeded-random (a deterministic function of system and seed) or
//! scripted (a word over the extended alphabet, resolved against the
//! canonical order).

use thiserror::Error;

use crate::error::ModelError;
use crate::label::Label;
use crate::system::{GlobalState, GlobalTransition, System};
use crate::trace::Trace;

/// splitmix64: tiny, seedable, and identical across languages.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// How [`simulate`] picks among enabled transitions.
#[derive(Clone, Debug)]
pub enum Policy {
    /// Pick index `next() % len` from a [`SplitMix64`] seeded directly.
    Random { seed: u64 },
    /// Fire the first canonical transition carrying each requested label.
    Scripted(Vec<Label>),
}

/// Result of a simulation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationRun {
    pub trace: Trace,
    /// True when the run stopped early because no transition was enabled.
    pub deadlocked: bool,
}

/// Errors from simulation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimulateError {
    #[error("{0}")]
    Model(#[from] ModelError),
    /// A scripted label is not enabled; `blocking` lists the component
    /// indices that cannot fire it from the current state.
    #[error("scripted label `{label}` not enabled at {state}; blocking components: {blocking:?}")]
    ScriptBlocked {
        label: Label,
        state: String,
        blocking: Vec<usize>,
    },
    #[error("transition choice {index} out of range (0..{len})")]
    ChoiceOutOfRange { index: usize, len: usize },
}

/// Cursor over the product semantics of one system.
pub struct Simulator<'a> {
    system: &'a System,
    trace: Trace,
    enabled: Vec<GlobalTransition>,
}

impl<'a> Simulator<'a> {
    /// Starts at the canonically least global initial state.
    pub fn new(system: &'a System) -> Result<Self, ModelError> {
        let start = system
            .global_initials()
            .into_iter()
            .next()
            .ok_or(ModelError::EmptySystem)?;
        Self::from_state(system, start)
    }

    /// Starts at an explicit global state (not required to be initial; trace
    /// validation is the caller's concern then).
    pub fn from_state(system: &'a System, start: GlobalState) -> Result<Self, ModelError> {
        let enabled = system.enabled_global_transitions(&start)?;
        Ok(Simulator {
            system,
            trace: Trace::new(start),
            enabled,
        })
    }

    pub fn current(&self) -> &GlobalState {
        self.trace.end()
    }

    /// Enabled transitions at the current state, canonical order.
    pub fn enabled(&self) -> &[GlobalTransition] {
        &self.enabled
    }

    pub fn is_deadlocked(&self) -> bool {
        self.enabled.is_empty()
    }

    /// Fires the enabled transition at `index` (into [`Self::enabled`]).
    pub fn step(&mut self, index: usize) -> Result<(), SimulateError> {
        let t = self
            .enabled
            .get(index)
            .ok_or(SimulateError::ChoiceOutOfRange {
                index,
                len: self.enabled.len(),
            })?
            .clone();
        self.trace.steps.push((t.label.clone(), t.target.clone()));
        self.enabled = self.system.enabled_global_transitions(&t.target)?;
        Ok(())
    }

    /// Fires the first canonical transition with the given label.
    pub fn step_label(&mut self, label: &Label) -> Result<(), SimulateError> {
        match self.enabled.iter().position(|t| &t.label == label) {
            Some(index) => self.step(index),
            None => Err(SimulateError::ScriptBlocked {
                label: label.clone(),
                state: self.current().to_string(),
                blocking: self.blocking_components(label),
            }),
        }
    }

    /// Components preventing `label` from firing at the current state: for a
    /// letter, the sync-set members with no local move; for `tau`, every
    /// component (none can move).
    fn blocking_components(&self, label: &Label) -> Vec<usize> {
        let g = self.current().clone();
        match label {
            Label::Tau => (0..self.system.len()).collect(),
            letter => match self.system.sync_indices(letter) {
                Ok(sync) => sync
                    .into_iter()
                    .filter(|&i| {
                        self.system.automata()[i]
                            .successors(&g.0[i], letter)
                            .map(|succ| succ.is_empty())
                            .unwrap_or(true)
                    })
                    .collect(),
                Err(_) => Vec::new(),
            },
        }
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }
}

/// Runs a policy for at most `max_steps` steps. The random policy stops at a
/// deadlock; the scripted policy errors if a requested label is blocked and
/// stops after the word is exhausted.
pub fn simulate(
    system: &System,
    policy: &Policy,
    max_steps: usize,
) -> Result<SimulationRun, SimulateError> {
    let mut sim = Simulator::new(system)?;
    let mut deadlocked = false;
    match policy {
        Policy::Random { seed } => {
            let mut rng = SplitMix64::new(*seed);
            for _ in 0..max_steps {
                if sim.is_deadlocked() {
                    deadlocked = true;
                    break;
                }
                let index = (rng.next_u64() % sim.enabled().len() as u64) as usize;
                sim.step(index)?;
            }
        }
        Policy::Scripted(word) => {
            for label in word.iter().take(max_steps) {
                sim.step_label(label)?;
            }
        }
    }
    Ok(SimulationRun {
        trace: sim.into_trace(),
        deadlocked,
    })
}
