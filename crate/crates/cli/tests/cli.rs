//! End-to-end tests of the `rvz` binary: exit-code contract, output shapes,
//! and subcommand round trips over emitted corpus documents.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn rvz() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rvz"))
}

fn run(args: &[&str]) -> Output {
    rvz().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn emit_stage(dir: &Path, index: u8, money: bool) -> PathBuf {
    let mut args = vec![
        "corpus".to_string(),
        "--stage".to_string(),
        index.to_string(),
        "--emit".to_string(),
        dir.display().to_string(),
    ];
    if money {
        args.push("--params".to_string());
        args.push("money".to_string());
    }
    let output = rvz().args(&args).output().unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    dir.join("v1").join(format!("stage{index}.rvz"))
}

#[test]
fn corpus_emits_validating_documents() {
    let dir = tempfile::tempdir().unwrap();
    for index in 1..=7u8 {
        let doc = emit_stage(dir.path(), index, index >= 4);
        let output = run(&["validate", doc.to_str().unwrap()]);
        assert_eq!(output.status.code(), Some(0), "{}", stdout_of(&output));
        assert_eq!(stdout_of(&output), "ok\n");
    }
}

#[test]
fn product_lists_states_and_transitions() {
    let dir = tempfile::tempdir().unwrap();
    let doc = emit_stage(dir.path(), 3, false);
    let output = run(&["product", doc.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.starts_with("states: 2\ntransitions: 6\ninitial (na,f)\n"));
    assert!(text.contains("(a,f) --s--> (a,f)"));

    let full = run(&["product", doc.to_str().unwrap()]);
    let reachable = run(&["product", doc.to_str().unwrap(), "--reachable"]);
    // Both global states are reachable here, so pruning changes nothing.
    assert_eq!(stdout_of(&full), stdout_of(&reachable));
}

#[test]
fn simulated_traces_replay_through_check_trace() {
    let dir = tempfile::tempdir().unwrap();
    let doc = emit_stage(dir.path(), 7, true);
    let sim = run(&[
        "simulate",
        doc.to_str().unwrap(),
        "--steps",
        "40",
        "--seed",
        "9",
    ]);
    assert_eq!(sim.status.code(), Some(0));
    let trace_path = dir.path().join("run.trace");
    std::fs::write(&trace_path, sim.stdout).unwrap();
    let check = run(&[
        "check-trace",
        doc.to_str().unwrap(),
        "--trace",
        trace_path.to_str().unwrap(),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr_of(&check));
    assert!(stdout_of(&check).starts_with("accepted"));
}

#[test]
fn same_seed_gives_identical_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let doc = emit_stage(dir.path(), 7, true);
    let args = [
        "simulate",
        doc.to_str().unwrap(),
        "--steps",
        "60",
        "--seed",
        "123456789",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn emitted_reference_traces_replay() {
    let dir = tempfile::tempdir().unwrap();
    for index in 3..=6u8 {
        let doc = emit_stage(dir.path(), index, index >= 4);
        let trace = dir.path().join("v1").join(format!("stage{index}.trace"));
        assert!(trace.exists());
        let check = run(&[
            "check-trace",
            doc.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]);
        assert_eq!(check.status.code(), Some(0), "stage {index}");
    }
}

#[test]
fn scripted_word_runs_and_blocked_words_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let doc = emit_stage(dir.path(), 3, false);
    let ok = run(&[
        "simulate",
        doc.to_str().unwrap(),
        "--word",
        "tau,s,nostress,tau",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_of(&ok).lines().count(), 4);

    let blocked = run(&["simulate", doc.to_str().unwrap(), "--word", "s"]);
    assert_eq!(blocked.status.code(), Some(1));
    assert!(stderr_of(&blocked).contains("blocking components"));
}

#[test]
fn refine_exit_codes_separate_verdicts_from_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s2 = emit_stage(dir.path(), 2, false);
    let s3 = emit_stage(dir.path(), 3, false);
    let s4 = emit_stage(dir.path(), 4, true);
    let s5 = emit_stage(dir.path(), 5, true);

    let holds = run(&["refine", s2.to_str().unwrap(), s3.to_str().unwrap()]);
    assert_eq!(holds.status.code(), Some(0));
    let text = stdout_of(&holds);
    assert!(text.starts_with("verdict: holds"));
    assert!(text.contains("non_awake -> { na }"));

    let fails = run(&["refine", s4.to_str().unwrap(), s5.to_str().unwrap()]);
    assert_eq!(fails.status.code(), Some(1));
    let text = stdout_of(&fails);
    assert!(text.starts_with("verdict: fails"));
    assert!(text.contains("unmatched transition: x_lt1000 --c1--> x_ge1000"));

    let missing = run(&["refine", s2.to_str().unwrap(), "no-such-file.rvz"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn include_projects_and_reports_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let s2 = emit_stage(dir.path(), 2, false);
    let s3 = emit_stage(dir.path(), 3, false);

    let projected = run(&[
        "include",
        s2.to_str().unwrap(),
        s3.to_str().unwrap(),
        "--project",
    ]);
    assert_eq!(projected.status.code(), Some(0));
    assert_eq!(stdout_of(&projected), "holds\n");

    let raw = run(&["include", s2.to_str().unwrap(), s3.to_str().unwrap()]);
    assert_eq!(raw.status.code(), Some(1));
    let text = stdout_of(&raw);
    assert!(text.starts_with("fails\ncounterexample: "));
}

#[test]
fn simulates_is_reflexive_on_a_stage() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = emit_stage(dir.path(), 3, false);
    let output = run(&["simulates", s3.to_str().unwrap(), s3.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_of(&output).starts_with("holds\n"));
}

#[test]
fn unfold_prints_the_plain_declaration() {
    let dir = tempfile::tempdir().unwrap();
    let s7 = emit_stage(dir.path(), 7, true);
    let output = run(&["unfold", s7.to_str().unwrap(), "--automaton", "coping"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.starts_with("automaton coping {"));
    assert!(text.contains("chosen_c2 -c2-> rho"));

    let missing = run(&["unfold", s7.to_str().unwrap(), "--automaton", "nothing"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn export_dot_is_deterministic_and_marks_set_states() {
    let dir = tempfile::tempdir().unwrap();
    let s7 = emit_stage(dir.path(), 7, true);
    let first = run(&["export-dot", s7.to_str().unwrap(), "--automaton", "environment"]);
    let second = run(&["export-dot", s7.to_str().unwrap(), "--automaton", "environment"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout_of(&first);
    assert!(text.contains("doublecircle"));
    assert!(text.contains("Gtau/{tau}"));

    let plain = run(&["export-dot", s7.to_str().unwrap(), "--automaton", "stress"]);
    assert!(stdout_of(&plain).contains("shape=point"));
}

#[test]
fn parse_errors_exit_two_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rvz");
    std::fs::write(&bad, "alphabet { tau }\nsystem { ghost }\n").unwrap();
    let output = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let text = stderr_of(&output);
    assert!(text.contains("reserved"));
    assert!(text.contains("ghost"));
}

#[test]
fn rejected_traces_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = emit_stage(dir.path(), 3, false);
    let trace = dir.path().join("bad.trace");
    std::fs::write(&trace, "(na,f) --s--> (na,f)\n").unwrap();
    let output = run(&[
        "check-trace",
        s3.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout_of(&output).contains("step 1"));
}

#[test]
fn interactive_session_consumes_choices_and_prints_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = emit_stage(dir.path(), 3, false);
    let mut child = rvz()
        .args(["simulate", s3.to_str().unwrap(), "--interactive"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"0\n0\nq\n")
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let trace = stdout_of(&output);
    assert_eq!(trace.lines().count(), 2);
    assert!(trace.starts_with("(na,f) --"));
    let menu = stderr_of(&output);
    assert!(menu.contains("state: (na,f)"));
    assert!(menu.contains("0)"));
}
