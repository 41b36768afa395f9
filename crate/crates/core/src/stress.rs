//! Bundled model chain: a staged formalization of stress appraisal and
//! coping (after Lazarus and Folkman's theory).
//!
//! Seven systems of increasing precision, each refining the previous one's
//! shape:
//!
//! 1. a single universe state with an internal-step loop;
//! 2. cognitive appraisal: non-awake vs. appraising;
//! 3. a stress-verdict automaton synchronizing on `s` / `nostress`;
//! 4. an environment that drifts on internal steps and broadcasts its state
//!    while the person appraises;
//! 5. a coping automaton instructing the environment after a stress verdict;
//! 6. appraisal split into primary and secondary phases, coping split into
//!    per-strategy candidate/commit states with good/bad evaluations;
//! 7. internal commitment parameters rewritten by emotion-focused coping.
//!
//! Stages 4 and up are parametric in the environment, the strategy set and
//! the commitment space; [`money_params`] provides the worked instantiation
//! (a person committed to keeping at least 1000 in the bank, with a saving
//! strategy and a detachment strategy). Reference executions for stages 3-6
//! are bundled and validate against the built systems.

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{FiniteAutomaton, Transition};
use crate::compact::{
    CompactAutomaton, ElementAnnotations, ElementUniverse, Guard, LabeledGraph,
};
use crate::doc::{AutomatonDecl, ModelDocument};
use crate::error::ModelError;
use crate::label::{Alphabet, Label};
use crate::system::{GlobalState, System};
use crate::trace::Trace;

/// Parameters instantiating the environment, coping and commitment parts of
/// stages 4 and up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageParams {
    /// Environment states; each element is letter-linked so it can broadcast
    /// its own name.
    pub environment: ElementUniverse,
    /// Coping strategy letters.
    pub coping_letters: BTreeSet<String>,
    /// Commitment functions as named elements.
    pub commitments: ElementUniverse,
    /// How the environment drifts by itself (internal steps over the
    /// environment states).
    pub env_drift: LabeledGraph,
    /// How coping strategies rewrite the environment.
    pub env_coping: LabeledGraph,
    /// How coping strategies rewrite the commitments.
    pub commitment_coping: LabeledGraph,
    /// Initial environment element.
    pub initial_env: String,
    /// Initial commitment element.
    pub initial_commitment: String,
    /// commitment x environment -> does the commitment hold there?
    pub commitment_table: BTreeMap<(String, String), bool>,
}

/// A member as declared: plain, or compact to be unfolded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageMember {
    Plain(FiniteAutomaton),
    Compact(CompactAutomaton),
}

impl StageMember {
    pub fn name(&self) -> &str {
        match self {
            StageMember::Plain(a) => &a.name,
            StageMember::Compact(c) => &c.name,
        }
    }

    /// The plain automaton this member denotes.
    pub fn unfolded(&self) -> FiniteAutomaton {
        match self {
            StageMember::Plain(a) => a.clone(),
            StageMember::Compact(c) => c.unfold(),
        }
    }
}

/// One stage of the chain: declared members, the built system, and short
/// descriptive notes.
#[derive(Clone, Debug)]
pub struct Stage {
    pub index: u8,
    pub members: Vec<StageMember>,
    pub system: System,
    pub notes: Vec<String>,
}

impl Stage {
    /// The stage as a model document; compact members stay compact, with
    /// their universes and graphs declared once at top level.
    pub fn to_document(&self) -> ModelDocument {
        let mut sets = BTreeMap::new();
        let mut graphs = BTreeMap::new();
        let mut automata = BTreeMap::new();
        let mut system = Vec::new();
        for member in &self.members {
            system.push(member.name().to_string());
            match member {
                StageMember::Plain(a) => {
                    automata.insert(a.name.clone(), AutomatonDecl::Plain(a.clone()));
                }
                StageMember::Compact(c) => {
                    sets.insert(c.universe.name.clone(), c.universe.clone());
                    for (name, graph) in &c.graphs {
                        graphs.insert(name.clone(), graph.clone());
                    }
                    automata.insert(c.name.clone(), AutomatonDecl::Compact(c.clone()));
                }
            }
        }
        ModelDocument {
            format_version: 1,
            alphabet: self.system.alphabet().clone(),
            sets,
            graphs,
            automata,
            system,
        }
    }
}

const GRAPH_DRIFT: &str = "Gtau";
const GRAPH_ENV_COPING: &str = "Gx";
const GRAPH_COMMITMENT: &str = "Gphi";

/// The worked instantiation: two environment states (at least / below 1000
/// in the bank), a saving strategy `c1` acting on the environment and a
/// detachment strategy `c2` acting on the commitments.
pub fn money_params() -> StageParams {
    let ge = "x_ge1000";
    let lt = "x_lt1000";
    let mut environment = ElementUniverse::new("X", [ge, lt]);
    for element in [ge, lt] {
        environment.annotations.insert(
            element.to_string(),
            ElementAnnotations {
                linked_letter: Some(element.to_string()),
                ..Default::default()
            },
        );
    }

    let commitments = ElementUniverse::new("Phi", ["phi", "one_minus_phi", "one", "zero"]);

    let c1 = || Label::Letter("c1".to_string());
    let c2 = || Label::Letter("c2".to_string());

    // The environment only drifts downwards: money gets stolen.
    let env_drift = LabeledGraph::new(GRAPH_DRIFT, "X").with_edges(
        [Label::Tau],
        [
            (ge.to_string(), Label::Tau, lt.to_string()),
            (lt.to_string(), Label::Tau, lt.to_string()),
        ],
    );

    // Saving (c1) can restore the balance; detachment (c2) leaves it alone.
    let env_coping = LabeledGraph::new(GRAPH_ENV_COPING, "X").with_edges(
        [c1(), c2()],
        [
            (lt.to_string(), c1(), lt.to_string()),
            (lt.to_string(), c1(), ge.to_string()),
            (ge.to_string(), c1(), ge.to_string()),
            (lt.to_string(), c2(), lt.to_string()),
            (ge.to_string(), c2(), ge.to_string()),
        ],
    );

    // Detachment can weaken the commitment to the constant-true one.
    let commitment_coping = LabeledGraph::new(GRAPH_COMMITMENT, "Phi").with_edges(
        [c1(), c2()],
        [
            ("phi".to_string(), c2(), "phi".to_string()),
            ("phi".to_string(), c2(), "one".to_string()),
            ("one".to_string(), c2(), "one".to_string()),
            ("phi".to_string(), c1(), "phi".to_string()),
            ("one".to_string(), c1(), "one".to_string()),
        ],
    );

    let mut commitment_table = BTreeMap::new();
    let mut set = |f: &str, x: &str, v: bool| {
        commitment_table.insert((f.to_string(), x.to_string()), v);
    };
    set("phi", ge, true);
    set("phi", lt, false);
    set("one_minus_phi", ge, false);
    set("one_minus_phi", lt, true);
    set("one", ge, true);
    set("one", lt, true);
    set("zero", ge, false);
    set("zero", lt, false);

    StageParams {
        environment,
        coping_letters: BTreeSet::from(["c1".to_string(), "c2".to_string()]),
        commitments,
        env_drift,
        env_coping,
        commitment_coping,
        initial_env: ge.to_string(),
        initial_commitment: "phi".to_string(),
        commitment_table,
    }
}

/// Is the person stressed at (environment, commitment)? True exactly when
/// the commitment does not hold there.
pub fn stressed(env: &str, commitment: &str, params: &StageParams) -> Result<bool, ModelError> {
    if !params.environment.elements.contains(env) {
        return Err(ModelError::UnknownElement(env.to_string()));
    }
    if !params.commitments.elements.contains(commitment) {
        return Err(ModelError::UnknownElement(commitment.to_string()));
    }
    let holds = params
        .commitment_table
        .get(&(commitment.to_string(), env.to_string()))
        .copied()
        .ok_or_else(|| ModelError::UnknownElement(format!("{commitment}({env})")))?;
    Ok(!holds)
}

fn letter(name: &str) -> Label {
    Label::Letter(name.to_string())
}

fn x_letters(params: &StageParams) -> Vec<String> {
    params
        .environment
        .elements
        .iter()
        .filter_map(|e| params.environment.linked_letter(e))
        .map(str::to_string)
        .collect()
}

fn stage_alphabet(index: u8, params: Option<&StageParams>) -> Result<Alphabet, ModelError> {
    let mut letters: Vec<String> = Vec::new();
    if index >= 3 {
        letters.push("s".to_string());
        letters.push("nostress".to_string());
    }
    if index >= 4 {
        let params = params.ok_or(ModelError::MissingStageParams(index))?;
        letters.extend(x_letters(params));
    }
    if index >= 5 {
        let params = params.expect("checked above");
        letters.extend(params.coping_letters.iter().cloned());
    }
    if index >= 6 {
        letters.push("g".to_string());
        letters.push("b".to_string());
    }
    Alphabet::new(letters)
}

/// Single universe state with an internal-step loop.
fn universe_automaton(sigma: &Alphabet) -> FiniteAutomaton {
    FiniteAutomaton::new(
        "universe",
        sigma.clone(),
        ["uni"],
        [Transition::new("uni", Label::Tau, "uni")],
        ["uni"],
    )
}

/// Stage-2 appraisal: waking up, appraising (with unspecified activity),
/// going back to sleep.
fn appraisal_two_state_long(sigma: &Alphabet) -> FiniteAutomaton {
    FiniteAutomaton::new(
        "appraisal",
        sigma.clone(),
        ["non_awake", "appraisal"],
        [
            Transition::new("non_awake", Label::Tau, "appraisal"),
            Transition::new("appraisal", Label::Tau, "appraisal"),
            Transition::new("appraisal", Label::Tau, "non_awake"),
        ],
        ["non_awake"],
    )
}

/// Stages 3-5 appraisal over the short state names, optionally broadcasting
/// the environment letters while appraising.
fn appraisal_two_state(sigma: &Alphabet, broadcast: &[String]) -> FiniteAutomaton {
    let mut transitions = vec![
        Transition::new("na", Label::Tau, "a"),
        Transition::new("a", letter("s"), "a"),
        Transition::new("a", letter("nostress"), "a"),
        Transition::new("a", Label::Tau, "na"),
        Transition::new("a", Label::Tau, "a"),
    ];
    for x in broadcast {
        transitions.push(Transition::new("a", letter(x), "a"));
    }
    FiniteAutomaton::new("appraisal", sigma.clone(), ["na", "a"], transitions, ["na"])
}

/// Stages 6-7 appraisal split into primary (`pa`) and secondary (`sa`)
/// phases. The `pa` state carries no internal-step loop.
fn appraisal_split(sigma: &Alphabet, broadcast: &[String]) -> FiniteAutomaton {
    let mut transitions = vec![
        Transition::new("na", Label::Tau, "pa"),
        Transition::new("pa", Label::Tau, "na"),
        Transition::new("pa", letter("s"), "sa"),
        Transition::new("sa", letter("g"), "pa"),
        Transition::new("sa", letter("b"), "pa"),
        Transition::new("pa", letter("nostress"), "pa"),
    ];
    for x in broadcast {
        transitions.push(Transition::new("pa", letter(x), "pa"));
    }
    FiniteAutomaton::new(
        "appraisal",
        sigma.clone(),
        ["na", "pa", "sa"],
        transitions,
        ["na"],
    )
}

/// The stress verdict automaton: one state, verdict loops, internal loop.
fn stress_calc(sigma: &Alphabet) -> FiniteAutomaton {
    FiniteAutomaton::new(
        "stress",
        sigma.clone(),
        ["f"],
        [
            Transition::new("f", letter("s"), "f"),
            Transition::new("f", letter("nostress"), "f"),
            Transition::new("f", Label::Tau, "f"),
        ],
        ["f"],
    )
}

/// Environment as a compact automaton: two full-image compact states, drift
/// edges between them, a broadcast self-loop, and (from stage 5) coping
/// edges.
fn environment_compact(
    sigma: &Alphabet,
    params: &StageParams,
    with_coping: bool,
) -> CompactAutomaton {
    let image: BTreeSet<String> = params.environment.elements.clone();
    let mut transitions = BTreeSet::from([
        (
            "e1".to_string(),
            Guard::EdgeIn(GRAPH_DRIFT.to_string()),
            "e2".to_string(),
        ),
        ("e1".to_string(), Guard::LabelEqualsSourceName, "e1".to_string()),
    ]);
    let mut graphs = BTreeMap::from([(GRAPH_DRIFT.to_string(), params.env_drift.clone())]);
    if with_coping {
        transitions.insert((
            "e1".to_string(),
            Guard::EdgeIn(GRAPH_ENV_COPING.to_string()),
            "e2".to_string(),
        ));
        graphs.insert(GRAPH_ENV_COPING.to_string(), params.env_coping.clone());
    }
    CompactAutomaton {
        name: "environment".to_string(),
        alphabet: sigma.clone(),
        universe: params.environment.clone(),
        images: BTreeMap::from([
            ("e1".to_string(), image.clone()),
            ("e2".to_string(), image),
        ]),
        transitions,
        initials: BTreeSet::from([params.initial_env.clone()]),
        graphs,
    }
}

/// Stage-5 coping: rest until a stress verdict, then any strategy may fire.
fn coping_plain(sigma: &Alphabet, coping_letters: &BTreeSet<String>) -> FiniteAutomaton {
    let mut transitions = vec![
        Transition::new("rho", letter("s"), "engaged"),
        Transition::new("rho", letter("nostress"), "rho"),
    ];
    for c in coping_letters {
        transitions.push(Transition::new("engaged", letter(c), "rho"));
    }
    FiniteAutomaton::new(
        "coping",
        sigma.clone(),
        ["rho", "engaged"],
        transitions,
        ["rho"],
    )
}

/// Stages 6-7 coping with secondary appraisal: per-strategy candidate states
/// (evaluated good or bad) and committed states engaging the strategy.
fn coping_compact(sigma: &Alphabet, coping_letters: &BTreeSet<String>) -> CompactAutomaton {
    let mut universe = ElementUniverse::new("Cop", ["rho"]);
    let mut candidates = BTreeSet::new();
    let mut committed = BTreeSet::new();
    for c in coping_letters {
        let cand = format!("cand_{c}");
        let chosen = format!("chosen_{c}");
        universe.elements.insert(cand.clone());
        universe.elements.insert(chosen.clone());
        universe.annotations.insert(
            cand.clone(),
            ElementAnnotations {
                underlying_letter: Some(c.clone()),
                counterpart: Some(chosen.clone()),
                ..Default::default()
            },
        );
        universe.annotations.insert(
            chosen.clone(),
            ElementAnnotations {
                underlying_letter: Some(c.clone()),
                counterpart: Some(cand.clone()),
                ..Default::default()
            },
        );
        candidates.insert(cand);
        committed.insert(chosen);
    }
    let transitions = BTreeSet::from([
        (
            "rest".to_string(),
            Guard::LabelIs(letter("s")),
            "cand".to_string(),
        ),
        (
            "cand".to_string(),
            Guard::LabelIs(letter("b")),
            "rest".to_string(),
        ),
        (
            "cand".to_string(),
            Guard::TargetIsCounterpartOfSource.and(Guard::LabelIs(letter("g"))),
            "chosen".to_string(),
        ),
        (
            "chosen".to_string(),
            Guard::LabelEqualsSourceUnderlying,
            "rest".to_string(),
        ),
        (
            "rest".to_string(),
            Guard::LabelIs(letter("nostress")),
            "rest".to_string(),
        ),
    ]);
    CompactAutomaton {
        name: "coping".to_string(),
        alphabet: sigma.clone(),
        universe,
        images: BTreeMap::from([
            ("rest".to_string(), BTreeSet::from(["rho".to_string()])),
            ("cand".to_string(), candidates),
            ("chosen".to_string(), committed),
        ]),
        transitions,
        initials: BTreeSet::from(["rho".to_string()]),
        graphs: BTreeMap::new(),
    }
}

/// Stage-7 internal parameters: commitments rewritten by coping strategies.
fn internal_compact(sigma: &Alphabet, params: &StageParams) -> CompactAutomaton {
    let image: BTreeSet<String> = params.commitments.elements.clone();
    CompactAutomaton {
        name: "internal".to_string(),
        alphabet: sigma.clone(),
        universe: params.commitments.clone(),
        images: BTreeMap::from([
            ("p1".to_string(), image.clone()),
            ("p2".to_string(), image),
        ]),
        transitions: BTreeSet::from([(
            "p1".to_string(),
            Guard::EdgeIn(GRAPH_COMMITMENT.to_string()),
            "p2".to_string(),
        )]),
        initials: BTreeSet::from([params.initial_commitment.clone()]),
        graphs: BTreeMap::from([(
            GRAPH_COMMITMENT.to_string(),
            params.commitment_coping.clone(),
        )]),
    }
}

/// Builds stage `index` (1..=7). Stages 4 and up need parameters.
pub fn stage(index: u8, params: Option<&StageParams>) -> Result<Stage, ModelError> {
    if !(1..=7).contains(&index) {
        return Err(ModelError::BadStageIndex(index));
    }
    if index >= 4 && params.is_none() {
        return Err(ModelError::MissingStageParams(index));
    }
    let sigma = stage_alphabet(index, params)?;
    let (members, notes): (Vec<StageMember>, Vec<String>) = match index {
        1 => (
            vec![StageMember::Plain(universe_automaton(&sigma))],
            vec!["a single universe state with unspecified activity".to_string()],
        ),
        2 => (
            vec![StageMember::Plain(appraisal_two_state_long(&sigma))],
            vec!["cognitive appraisal happens only while awake".to_string()],
        ),
        3 => (
            vec![
                StageMember::Plain(appraisal_two_state(&sigma, &[])),
                StageMember::Plain(stress_calc(&sigma)),
            ],
            vec![
                "stress verdicts synchronize the appraisal and verdict automata".to_string(),
            ],
        ),
        4 => {
            let params = params.unwrap();
            (
                vec![
                    StageMember::Plain(appraisal_two_state(&sigma, &x_letters(params))),
                    StageMember::Plain(stress_calc(&sigma)),
                    StageMember::Compact(environment_compact(&sigma, params, false)),
                ],
                vec![
                    "the environment drifts on internal steps and broadcasts its state during appraisal".to_string(),
                ],
            )
        }
        5 => {
            let params = params.unwrap();
            (
                vec![
                    StageMember::Plain(appraisal_two_state(&sigma, &x_letters(params))),
                    StageMember::Plain(stress_calc(&sigma)),
                    StageMember::Compact(environment_compact(&sigma, params, true)),
                    StageMember::Plain(coping_plain(&sigma, &params.coping_letters)),
                ],
                vec![
                    "after a stress verdict the coping automaton may instruct the environment".to_string(),
                ],
            )
        }
        6 => {
            let params = params.unwrap();
            (
                vec![
                    StageMember::Plain(appraisal_split(&sigma, &x_letters(params))),
                    StageMember::Plain(stress_calc(&sigma)),
                    StageMember::Compact(environment_compact(&sigma, params, true)),
                    StageMember::Compact(coping_compact(&sigma, &params.coping_letters)),
                ],
                vec![
                    "appraisal splits into primary and secondary phases; strategies are evaluated one at a time".to_string(),
                ],
            )
        }
        7 => {
            let params = params.unwrap();
            (
                vec![
                    StageMember::Plain(appraisal_split(&sigma, &x_letters(params))),
                    StageMember::Plain(stress_calc(&sigma)),
                    StageMember::Compact(environment_compact(&sigma, params, true)),
                    StageMember::Compact(coping_compact(&sigma, &params.coping_letters)),
                    StageMember::Compact(internal_compact(&sigma, params)),
                ],
                vec![
                    "commitments become internal parameters rewritten by emotion-focused coping".to_string(),
                ],
            )
        }
        _ => unreachable!(),
    };
    let system = System::new(members.iter().map(StageMember::unfolded).collect())?;
    Ok(Stage {
        index,
        members,
        system,
        notes,
    })
}

/// The bundled reference executions for stages 3-6, with the environment
/// placeholders instantiated so the run starts in the initial state: the
/// initial balance is healthy, drift empties it, and saving restores it.
pub fn reference_traces(index: u8) -> Result<Vec<Trace>, ModelError> {
    let ge = "x_ge1000";
    let lt = "x_lt1000";
    let tau = Label::Tau;
    let traces = match index {
        3 => {
            let mut t = Trace::new(GlobalState::new(["na", "f"]));
            t.steps = vec![
                (tau.clone(), GlobalState::new(["a", "f"])),
                (letter("s"), GlobalState::new(["a", "f"])),
                (letter("nostress"), GlobalState::new(["a", "f"])),
                (tau, GlobalState::new(["na", "f"])),
            ];
            vec![t]
        }
        4 => {
            let mut t = Trace::new(GlobalState::new(["na", "f", ge]));
            t.steps = vec![
                (tau.clone(), GlobalState::new(["a", "f", ge])),
                (letter(ge), GlobalState::new(["a", "f", ge])),
                (letter("s"), GlobalState::new(["a", "f", ge])),
                (tau, GlobalState::new(["a", "f", lt])),
                (letter(lt), GlobalState::new(["a", "f", lt])),
                (letter("nostress"), GlobalState::new(["a", "f", lt])),
            ];
            vec![t]
        }
        5 => {
            let mut t = Trace::new(GlobalState::new(["na", "f", ge, "rho"]));
            t.steps = vec![
                (tau, GlobalState::new(["a", "f", ge, "rho"])),
                (letter(ge), GlobalState::new(["a", "f", ge, "rho"])),
                (letter("s"), GlobalState::new(["a", "f", ge, "engaged"])),
                (letter("c1"), GlobalState::new(["a", "f", ge, "rho"])),
                (letter(ge), GlobalState::new(["a", "f", ge, "rho"])),
                (letter("nostress"), GlobalState::new(["a", "f", ge, "rho"])),
            ];
            vec![t]
        }
        6 => {
            let mut t = Trace::new(GlobalState::new(["na", "f", ge, "rho"]));
            t.steps = vec![
                (tau, GlobalState::new(["pa", "f", ge, "rho"])),
                (letter(ge), GlobalState::new(["pa", "f", ge, "rho"])),
                (letter("s"), GlobalState::new(["sa", "f", ge, "cand_c1"])),
                (letter("b"), GlobalState::new(["pa", "f", ge, "rho"])),
                (letter("s"), GlobalState::new(["sa", "f", ge, "cand_c2"])),
                (letter("g"), GlobalState::new(["pa", "f", ge, "chosen_c2"])),
                (letter("c2"), GlobalState::new(["pa", "f", ge, "rho"])),
                (letter(ge), GlobalState::new(["pa", "f", ge, "rho"])),
                (letter("nostress"), GlobalState::new(["pa", "f", ge, "rho"])),
            ];
            vec![t]
        }
        other => return Err(ModelError::BadStageIndex(other)),
    };
    Ok(traces)
}
