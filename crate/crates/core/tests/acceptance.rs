//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test -- --nocapture`). Expected values are either
//! frozen from independent oracles in `common` or asserted exactly.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use rvz_core::automaton::{FiniteAutomaton, Transition};
use rvz_core::doc::{parse_document, serialize_document};
use rvz_core::label::Label;
use rvz_core::lang::{language_includes, project, simulates, words_upto};
use rvz_core::refine::{automaton_leq, system_leq, verify_witness, RefinementDiagnostic};
use rvz_core::sim::{simulate, Policy, SplitMix64};
use rvz_core::stress::{money_params, reference_traces, stage, Stage};
use rvz_core::system::{GlobalState, System};
use rvz_core::trace::{validate_trace, Trace, TraceError};

fn all_stages() -> Vec<Stage> {
    let params = money_params();
    (1..=7u8)
        .map(|k| {
            let params = (k >= 4).then_some(&params);
            stage(k, params).unwrap()
        })
        .collect()
}

/// Every member automaton of every stage, unfolded, tagged by stage index.
fn corpus_automata(stages: &[Stage]) -> Vec<(u8, FiniteAutomaton)> {
    stages
        .iter()
        .flat_map(|s| {
            s.system
                .automata()
                .iter()
                .map(move |a| (s.index, a.clone()))
        })
        .collect()
}

#[test]
fn criterion_01_unfolding_full_image_pair_is_exact() {
    let compact = full_image_compact_pair();
    let unfolded = compact.unfold();
    assert_eq!(unfolded.states.len(), 3);
    assert_eq!(unfolded.transitions.len(), 12);
    let a_transitions: Vec<&Transition> = unfolded
        .transitions
        .iter()
        .filter(|t| t.label == letter("a"))
        .collect();
    let b_transitions: Vec<&Transition> = unfolded
        .transitions
        .iter()
        .filter(|t| t.label == letter("b"))
        .collect();
    assert_eq!(a_transitions.len(), 9);
    assert_eq!(a_transitions.iter().filter(|t| t.source != t.target).count(), 6);
    assert_eq!(a_transitions.iter().filter(|t| t.source == t.target).count(), 3);
    assert_eq!(b_transitions.len(), 3);
    assert!(b_transitions.iter().all(|t| t.source == t.target));
    assert_eq!(unfolded.transitions, oracle_unfold(&compact));
    println!("criterion 01 PASS: full-image pair unfolds to 3 states and 9+3 transitions");
}

#[test]
fn criterion_02_unfolding_graph_guard_is_exact() {
    let compact = graph_guarded_compact_pair();
    let unfolded = compact.unfold();
    assert_eq!(
        unfolded.transitions,
        BTreeSet::from([
            Transition::new("x0", letter("a"), "x1"),
            Transition::new("x0", letter("b"), "x2"),
            Transition::new("x1", letter("b"), "x1"),
        ])
    );
    assert_eq!(unfolded.transitions, oracle_unfold(&compact));
    println!("criterion 02 PASS: graph-guarded pair unfolds to exactly 3 transitions");
}

#[test]
fn criterion_03_rendezvous_example_semantics() {
    let system = rendezvous_trio();
    let g1 = GlobalState::new(["q1", "p", "r"]);
    let g2 = GlobalState::new(["q2", "p", "r"]);

    let at_g1 = system.enabled_global_transitions(&g1).unwrap();
    assert!(at_g1
        .iter()
        .any(|t| t.label == letter("a") && t.target == g2));

    let at_g2 = system.enabled_global_transitions(&g2).unwrap();
    assert!(at_g2.iter().all(|t| t.label != letter("a")));
    assert!(at_g2.iter().any(|t| t.label.is_tau() && t.target == g1));

    for trace in rendezvous_trio_executions() {
        assert_eq!(validate_trace(&system, &trace), Ok(()));
    }
    println!("criterion 03 PASS: rendezvous example enables/blocks as printed and both executions replay");
}

/// Fixed mutation set for one trace: per step, the first label making the
/// step unenabled, and the first well-formed target doing the same. Steps
/// where every label (or every target) stays enabled contribute no mutation
/// of that kind.
fn mutations_of(system: &System, trace: &Trace) -> Vec<(usize, Trace)> {
    let mut out = Vec::new();
    let all_states = system.global_states();
    for (j0, (label, target)) in trace.steps.iter().enumerate() {
        let source = trace.source_of_step(j0);
        let wrong_label = system
            .alphabet()
            .labels_with_tau()
            .into_iter()
            .find(|l| l != label && !system.step_enabled(source, l, target).unwrap());
        if let Some(wrong) = wrong_label {
            let mut mutated = trace.clone();
            mutated.steps[j0].0 = wrong;
            out.push((j0 + 1, mutated));
        }
        let wrong_target = all_states
            .iter()
            .find(|g| *g != target && !system.step_enabled(source, label, g).unwrap());
        if let Some(wrong) = wrong_target {
            let mut mutated = trace.clone();
            mutated.steps[j0].1 = wrong.clone();
            out.push((j0 + 1, mutated));
        }
    }
    out
}

#[test]
fn criterion_04_reference_traces_replay_and_mutations_fail_at_their_step() {
    let params = money_params();
    let mut total_mutations = 0;
    for index in 3..=6u8 {
        let stage_k = stage(index, Some(&params)).unwrap();
        for trace in reference_traces(index).unwrap() {
            assert_eq!(
                validate_trace(&stage_k.system, &trace),
                Ok(()),
                "stage {index} reference trace must replay"
            );
            let mutations = mutations_of(&stage_k.system, &trace);
            assert!(
                !mutations.is_empty(),
                "stage {index}: mutation set must not be empty"
            );
            for (step, mutated) in mutations {
                match validate_trace(&stage_k.system, &mutated) {
                    Err(TraceError::StepNotEnabled { step: failed, .. }) => {
                        assert_eq!(failed, step, "stage {index}: rejected at the mutated step")
                    }
                    other => panic!("stage {index}: expected step rejection, got {other:?}"),
                }
                total_mutations += 1;
            }
        }
    }
    println!(
        "criterion 04 PASS: reference traces replay; {total_mutations} single-step mutations all rejected at their step"
    );
}

#[test]
fn criterion_05_chain_start_refines_with_the_documented_witness() {
    let stage1 = stage(1, None).unwrap();
    let stage2 = stage(2, None).unwrap();
    let stage3 = stage(3, None).unwrap();

    let first = system_leq(&stage1.system, &stage2.system);
    assert!(first.holds);

    let second = system_leq(&stage2.system, &stage3.system);
    assert!(second.holds);
    let witness = second.components[0].witness.as_ref().unwrap();
    assert_eq!(
        witness.blocks,
        BTreeMap::from([
            (
                "non_awake".to_string(),
                BTreeSet::from(["na".to_string()])
            ),
            (
                "appraisal".to_string(),
                BTreeSet::from(["a".to_string()])
            ),
        ])
    );
    println!("criterion 05 PASS: stage 1 <= stage 2 <= stage 3 with the documented witness");
}

#[test]
fn criterion_06_worked_pair_witness_found_and_verified() {
    let (abstract_a, refined) = worked_refinement_pair();
    let report = automaton_leq(&abstract_a, &refined);
    assert!(report.holds);
    let witness = report.witness().unwrap();
    assert_eq!(
        witness.blocks,
        BTreeMap::from([
            (
                "q1".to_string(),
                BTreeSet::from(["p1".to_string(), "p2".to_string()])
            ),
            (
                "q2".to_string(),
                BTreeSet::from(["p3".to_string(), "p4".to_string(), "p5".to_string()])
            ),
        ])
    );
    assert_eq!(verify_witness(&abstract_a, &refined, witness, true), Ok(true));
    println!("criterion 06 PASS: worked pair yields witness {{p1,p2}} / {{p3,p4,p5}}, verified");
}

#[test]
fn criterion_07_checker_verdicts_match_the_exhaustive_oracle() {
    let stages = all_stages();

    // Consecutive stage pairs.
    for window in stages.windows(2) {
        let report = system_leq(&window[0].system, &window[1].system);
        let expected = oracle_system_leq(&window[0].system, &window[1].system, true);
        assert_eq!(
            report.holds, expected,
            "stage {} <= stage {}",
            window[0].index, window[1].index
        );
        if !report.holds {
            let named = report.components.iter().any(|c| {
                c.diagnostics
                    .iter()
                    .any(|d| matches!(d, RefinementDiagnostic::UnmatchedTransition { .. }))
            });
            assert!(named, "failing report must name an unmatched transition");
        }
    }

    // The environment gains a balance-restoring strategy the abstract stage
    // cannot match, so stage 4 is not refined by stage 5.
    let s4_vs_s5 = system_leq(&stages[3].system, &stages[4].system);
    assert!(!s4_vs_s5.holds);
    let env = &s4_vs_s5.components[2];
    assert!(env.diagnostics.iter().any(|d| matches!(
        d,
        RefinementDiagnostic::UnmatchedTransition { transition }
            if transition == &Transition::new("x_lt1000", letter("c1"), "x_ge1000")
    )));

    // The candidate-evaluation step of the split coping automaton is
    // unmatched in the two-state one, so stage 5 is not refined by stage 6.
    let s5_vs_s6 = system_leq(&stages[4].system, &stages[5].system);
    assert!(!s5_vs_s6.holds);
    let coping = &s5_vs_s6.components[3];
    assert!(coping.diagnostics.iter().any(|d| matches!(
        d,
        RefinementDiagnostic::UnmatchedTransition { transition }
            if transition.label == letter("g")
    )));

    // Every corpus automaton pair (all are within the oracle's reach).
    let automata = corpus_automata(&stages);
    let mut pairs = 0;
    for (_, abstract_a) in &automata {
        for (_, refined) in &automata {
            assert!(refined.states.len() <= 8);
            let report = automaton_leq(abstract_a, refined);
            let expected = oracle_automaton_leq(abstract_a, refined, true);
            assert_eq!(
                report.holds, expected,
                "{} <= {}",
                abstract_a.name, refined.name
            );
            if let Some(witness) = report.witness() {
                assert_eq!(
                    verify_witness(abstract_a, refined, witness, true),
                    Ok(true)
                );
            }
            pairs += 1;
        }
    }
    println!(
        "criterion 07 PASS: oracle agreement on 6 stage pairs and {pairs} automaton pairs"
    );
}

#[test]
fn criterion_08_quasi_order_laws() {
    let stages = all_stages();
    let automata = corpus_automata(&stages);

    for (_, a) in &automata {
        let report = automaton_leq(a, a);
        assert!(report.holds, "reflexivity on {}", a.name);
        let witness = report.witness().unwrap();
        for (abstract_state, block) in &witness.blocks {
            assert_eq!(block, &BTreeSet::from([abstract_state.clone()]));
        }
    }

    // Transitivity over every corpus triple whose premises hold.
    let n = automata.len();
    let mut holds = vec![vec![false; n]; n];
    for (i, (_, a)) in automata.iter().enumerate() {
        for (j, (_, b)) in automata.iter().enumerate() {
            holds[i][j] = automaton_leq(a, b).holds;
        }
    }
    let mut checked = 0;
    for i in 0..n {
        for j in 0..n {
            if !holds[i][j] {
                continue;
            }
            for k in 0..n {
                if holds[j][k] {
                    assert!(
                        holds[i][k],
                        "transitivity broken: {} <= {} <= {}",
                        automata[i].1.name, automata[j].1.name, automata[k].1.name
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
    println!("criterion 08 PASS: reflexive on {n} corpus automata; transitive on {checked} triples");
}

#[test]
fn criterion_09_products_are_exact() {
    let stages = all_stages();

    // The two-member stage: full product has 2 states and 6 transitions.
    let product3 = stages[2].system.build_product(false).unwrap();
    assert_eq!(product3.states.len(), 2);
    let expected: BTreeSet<Transition> = BTreeSet::from([
        Transition::new("(na,f)", Label::Tau, "(a,f)"),
        Transition::new("(na,f)", Label::Tau, "(na,f)"),
        Transition::new("(a,f)", Label::Tau, "(na,f)"),
        Transition::new("(a,f)", Label::Tau, "(a,f)"),
        Transition::new("(a,f)", letter("s"), "(a,f)"),
        Transition::new("(a,f)", letter("nostress"), "(a,f)"),
    ]);
    assert_eq!(product3.transitions, expected);

    // The five-member stage: 3 * 1 * 2 * 5 * 4 = 120 full-product states.
    let product7 = stages[6].system.build_product(false).unwrap();
    assert_eq!(product7.states.len(), 120);

    // Pointwise agreement between the product edges and the per-state
    // enabled transitions, on every stage.
    for stage_k in &stages {
        let product = stage_k.system.build_product(false).unwrap();
        for g in stage_k.system.global_states() {
            let from_enabled: BTreeSet<Transition> = stage_k
                .system
                .enabled_global_transitions(&g)
                .unwrap()
                .into_iter()
                .map(|t| Transition::new(t.source.to_string(), t.label, t.target.to_string()))
                .collect();
            let from_product: BTreeSet<Transition> = product
                .transitions
                .iter()
                .filter(|t| t.source == g.to_string())
                .cloned()
                .collect();
            assert_eq!(from_enabled, from_product, "stage {}", stage_k.index);
        }
    }
    println!("criterion 09 PASS: stage-3 product exact (2 states, 6 transitions), stage-7 product has 120 states, products agree pointwise");
}

#[test]
fn criterion_10_language_and_simulation_coherence() {
    let stages = all_stages();
    let automata = corpus_automata(&stages);
    const BOUND: usize = 6;

    let word_sets: Vec<_> = automata
        .iter()
        .map(|(_, a)| words_upto(a, BOUND))
        .collect();

    let mut agreements = 0;
    let mut implications = 0;
    for (i, (_, superset)) in automata.iter().enumerate() {
        for (j, (_, subset)) in automata.iter().enumerate() {
            let outcome = language_includes(superset, subset, false);
            let oracle_holds = word_sets[j].is_subset_of(&word_sets[i]);
            assert_eq!(
                outcome.holds, oracle_holds,
                "includes({}, {}) vs bounded-word oracle",
                superset.name, subset.name
            );
            if let Some(counterexample) = &outcome.counterexample {
                // Languages are prefix-closed (every state accepting), so
                // the shortest failing word is the shortest word in the
                // bounded difference.
                let oracle_min = word_sets[j]
                    .words
                    .iter()
                    .filter(|w| !word_sets[i].contains(w))
                    .map(Vec::len)
                    .min()
                    .expect("oracle difference nonempty");
                assert_eq!(counterexample.len(), oracle_min);
            }
            agreements += 1;

            let sim = simulates(superset, subset);
            if sim.holds {
                assert!(
                    outcome.holds,
                    "simulates({}, {}) must imply inclusion",
                    superset.name, subset.name
                );
                implications += 1;
            }
        }
    }

    // The conclusion-style product comparisons along the chain, after
    // projecting the refined product onto the abstract alphabet.
    for window in stages.windows(2) {
        let abstract_product = window[0].system.build_product(false).unwrap();
        let refined_product = window[1].system.build_product(false).unwrap();
        let projected = project(&refined_product, &abstract_product.alphabet);
        let outcome = language_includes(&abstract_product, &projected, false);
        let oracle_holds =
            words_upto(&projected, BOUND).is_subset_of(&words_upto(&abstract_product, BOUND));
        assert_eq!(
            outcome.holds, oracle_holds,
            "product inclusion stage {} vs {}",
            window[0].index, window[1].index
        );
        let sim = simulates(&abstract_product, &projected);
        if sim.holds {
            assert!(outcome.holds);
        }
    }

    println!(
        "criterion 10 PASS: {agreements} inclusion checks agree with the bound-{BOUND} oracle; {implications} simulation=>inclusion implications hold"
    );
}

#[test]
fn criterion_11_round_trip_determinism_and_fuzz() {
    let stages = all_stages();

    // parse . serialize is the identity, and serialization is idempotent.
    for stage_k in &stages {
        let doc = stage_k.to_document();
        let text = serialize_document(&doc);
        let reparsed = parse_document(&text)
            .unwrap_or_else(|e| panic!("stage {} must reparse: {e:?}", stage_k.index));
        assert_eq!(doc, reparsed, "stage {}", stage_k.index);
        assert_eq!(serialize_document(&reparsed), text, "stage {}", stage_k.index);
        assert!(doc.validate().is_empty(), "stage {}", stage_k.index);

        // Documents and builders denote the same systems.
        let rebuilt = reparsed.build_system().unwrap();
        assert_eq!(rebuilt.automata(), stage_k.system.automata());
    }

    // Same seed, same trace.
    for stage_k in [&stages[2], &stages[6]] {
        for seed in [0u64, 7, 123_456_789] {
            let first = simulate(&stage_k.system, &Policy::Random { seed }, 100).unwrap();
            let second = simulate(&stage_k.system, &Policy::Random { seed }, 100).unwrap();
            assert_eq!(first, second);
            assert_eq!(validate_trace(&stage_k.system, &first.trace), Ok(()));
        }
    }

    // The parser survives arbitrary byte soup and mutated documents.
    let mut rng = SplitMix64::new(0xF0220522);
    let seed_text = serialize_document(&stages[6].to_document());
    for round in 0..400 {
        let text: String = if round % 2 == 0 {
            let len = (rng.next_u64() % 200) as usize;
            let bytes: Vec<u8> = (0..len).map(|_| (rng.next_u64() % 256) as u8).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            let mut mutated: Vec<u8> = seed_text.as_bytes().to_vec();
            for _ in 0..(rng.next_u64() % 8 + 1) {
                let at = (rng.next_u64() as usize) % mutated.len();
                mutated[at] = (rng.next_u64() % 128) as u8;
            }
            String::from_utf8_lossy(&mutated).into_owned()
        };
        let _ = parse_document(&text); // must not panic
    }

    println!("criterion 11 PASS: corpus documents round-trip byte-identically, simulation is seed-deterministic, parser survives fuzz");
}
