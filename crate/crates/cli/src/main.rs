//! `rvz` — command-line front end for synchronized-automata models.
//!
//! Exit codes: 0 on success, 1 on analysis-negative verdicts (a refinement
//! or inclusion that fails, a rejected trace, a blocked scripted word), 2 on
//! input errors (unreadable files, parse errors, bad arguments). Verdicts
//! are never conflated with errors.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rvz_core::doc::{
    parse_document, serialize_automaton, serialize_document, AutomatonDecl, ModelDocument,
};
use rvz_core::dot::{export_dot_automaton, export_dot_compact};
use rvz_core::label::Label;
use rvz_core::lang::{language_includes, project, simulates, word_text};
use rvz_core::refine::system_leq_with;
use rvz_core::sim::{simulate, Policy, SimulateError, Simulator};
use rvz_core::stress::{money_params, reference_traces, stage};
use rvz_core::system::System;
use rvz_core::trace::{parse_trace, validate_trace, TraceError};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rvz",
    version,
    about = "Systems of finite automata synchronized via generalized rendezvous: validate, unfold, build products, simulate, replay traces, check refinements and language inclusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a document and report semantic diagnostics.
    Validate { doc: PathBuf },
    /// Unfold a compact automaton into a plain one and print it.
    Unfold {
        doc: PathBuf,
        /// Name of the automaton to unfold.
        #[arg(long)]
        automaton: String,
    },
    /// Build the explicit product automaton of the declared system.
    Product {
        doc: PathBuf,
        /// Prune to the states reachable from the global initial states.
        #[arg(long)]
        reachable: bool,
    },
    /// Run the declared system: seeded-random, scripted, or interactive.
    Simulate {
        doc: PathBuf,
        /// Number of random steps.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Seed for the random policy (decimal 64-bit unsigned).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated labels to fire in order (e.g. `tau,s,nostress`).
        #[arg(long, conflicts_with = "interactive")]
        word: Option<String>,
        /// Choose each step from a numbered menu on stdin.
        #[arg(long)]
        interactive: bool,
    },
    /// Replay a trace file against the declared system.
    CheckTrace {
        doc: PathBuf,
        /// Trace file, one `(state) --label--> (state)` step per line.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Check that the second document's system refines the first's.
    Refine {
        abstract_doc: PathBuf,
        refined_doc: PathBuf,
        /// Allow empty partition blocks.
        #[arg(long)]
        relaxed_partition: bool,
    },
    /// Check that the second system's language is included in the first's.
    Include {
        superset_doc: PathBuf,
        subset_doc: PathBuf,
        /// Project the subset system onto the superset alphabet first.
        #[arg(long)]
        project: bool,
        /// Treat tau as a silent step instead of a visible letter.
        #[arg(long)]
        tau_epsilon: bool,
    },
    /// Check that the first system's product simulates the second's.
    Simulates {
        abstract_doc: PathBuf,
        refined_doc: PathBuf,
    },
    /// Emit a bundled model-chain stage as a document (plus its reference
    /// execution, when one exists).
    Corpus {
        /// Stage index, 1 through 7.
        #[arg(long)]
        stage: u8,
        /// Parameter set for stages 4 and up (only `money` is bundled).
        #[arg(long)]
        params: Option<String>,
        /// Directory to write into (a `v1` subdirectory is created).
        #[arg(long)]
        emit: PathBuf,
    },
    /// Print an automaton in Graphviz DOT form.
    ExportDot {
        doc: PathBuf,
        /// Name of the automaton to export.
        #[arg(long)]
        automaton: String,
    },
}

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe (e.g. `rvz product | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    ExitCode::from(run(Cli::parse()))
}

fn load_document(path: &Path) -> Result<ModelDocument, u8> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_INPUT);
        }
    };
    match parse_document(&text) {
        Ok(doc) => Ok(doc),
        Err(errors) => {
            for e in errors {
                eprintln!("{}: {e}", path.display());
            }
            Err(EXIT_INPUT)
        }
    }
}

fn load_system(path: &Path) -> Result<(ModelDocument, System), u8> {
    let doc = load_document(path)?;
    match doc.build_system() {
        Ok(system) => Ok((doc, system)),
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            Err(EXIT_INPUT)
        }
    }
}

fn parse_word(text: &str) -> Result<Vec<Label>, u8> {
    let mut word = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match Label::parse(part) {
            Ok(label) => word.push(label),
            Err(e) => {
                eprintln!("error: bad label `{part}`: {e}");
                return Err(EXIT_INPUT);
            }
        }
    }
    Ok(word)
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Validate { doc } => {
            let doc = match load_document(&doc) {
                Ok(doc) => doc,
                Err(code) => return code,
            };
            let diags = doc.validate();
            if diags.is_empty() {
                println!("ok");
                EXIT_OK
            } else {
                for d in &diags {
                    println!("{d}");
                }
                EXIT_NEGATIVE
            }
        }

        Command::Unfold { doc, automaton } => {
            let doc = match load_document(&doc) {
                Ok(doc) => doc,
                Err(code) => return code,
            };
            match doc.automata.get(&automaton) {
                Some(decl) => {
                    print!("{}", serialize_automaton(&decl.unfolded()));
                    EXIT_OK
                }
                None => {
                    eprintln!("error: no automaton named `{automaton}`");
                    EXIT_INPUT
                }
            }
        }

        Command::Product { doc, reachable } => {
            let (_, system) = match load_system(&doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let product = match system.build_product(reachable) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            println!("states: {}", product.states.len());
            println!("transitions: {}", product.transitions.len());
            for initial in &product.initials {
                println!("initial {initial}");
            }
            for t in &product.transitions {
                println!("{} --{}--> {}", t.source, t.label, t.target);
            }
            EXIT_OK
        }

        Command::Simulate {
            doc,
            steps,
            seed,
            word,
            interactive,
        } => {
            let (_, system) = match load_system(&doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            if interactive {
                return run_interactive(&system);
            }
            let policy = match word {
                Some(text) => match parse_word(&text) {
                    Ok(word) => Policy::Scripted(word),
                    Err(code) => return code,
                },
                None => Policy::Random { seed },
            };
            let max_steps = match &policy {
                Policy::Scripted(word) => word.len(),
                Policy::Random { .. } => steps,
            };
            match simulate(&system, &policy, max_steps) {
                Ok(run) => {
                    print!("{}", run.trace);
                    if run.deadlocked {
                        eprintln!("deadlock after {} steps", run.trace.len());
                    }
                    EXIT_OK
                }
                Err(e @ SimulateError::ScriptBlocked { .. }) => {
                    eprintln!("{e}");
                    EXIT_NEGATIVE
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }

        Command::CheckTrace { doc, trace } => {
            let (_, system) = match load_system(&doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let text = match fs::read_to_string(&trace) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", trace.display());
                    return EXIT_INPUT;
                }
            };
            let parsed = match parse_trace(&text) {
                Ok(parsed) => parsed,
                Err(e) => {
                    eprintln!("error: {}: {e}", trace.display());
                    return EXIT_INPUT;
                }
            };
            match validate_trace(&system, &parsed) {
                Ok(()) => {
                    println!("accepted ({} steps)", parsed.len());
                    EXIT_OK
                }
                Err(TraceError::Malformed(message)) => {
                    eprintln!("error: {message}");
                    EXIT_INPUT
                }
                Err(verdict) => {
                    println!("rejected: {verdict}");
                    EXIT_NEGATIVE
                }
            }
        }

        Command::Refine {
            abstract_doc,
            refined_doc,
            relaxed_partition,
        } => {
            let (_, abstract_s) = match load_system(&abstract_doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let (_, refined_s) = match load_system(&refined_doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let report = system_leq_with(&abstract_s, &refined_s, !relaxed_partition);
            print!("{report}");
            if report.holds {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }

        Command::Include {
            superset_doc,
            subset_doc,
            project: do_project,
            tau_epsilon,
        } => {
            let (_, superset_s) = match load_system(&superset_doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let (_, subset_s) = match load_system(&subset_doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let (superset, subset_raw) = match (
                superset_s.build_product(true),
                subset_s.build_product(true),
            ) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let subset = if do_project {
                project(&subset_raw, &superset.alphabet)
            } else {
                subset_raw
            };
            let outcome = language_includes(&superset, &subset, tau_epsilon);
            if outcome.holds {
                println!("holds");
                EXIT_OK
            } else {
                println!("fails");
                if let Some(word) = &outcome.counterexample {
                    println!("counterexample: {}", word_text(word));
                }
                EXIT_NEGATIVE
            }
        }

        Command::Simulates {
            abstract_doc,
            refined_doc,
        } => {
            let (_, abstract_s) = match load_system(&abstract_doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let (_, refined_s) = match load_system(&refined_doc) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let (abstract_p, refined_p) = match (
                abstract_s.build_product(true),
                refined_s.build_product(true),
            ) {
                (Ok(a), Ok(r)) => (a, r),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let outcome = simulates(&abstract_p, &refined_p);
            if outcome.holds {
                println!("holds");
                for (p, q) in &outcome.relation {
                    println!("{p} simulates {q}");
                }
                EXIT_OK
            } else {
                println!("fails");
                EXIT_NEGATIVE
            }
        }

        Command::Corpus {
            stage: index,
            params,
            emit,
        } => {
            let params_value = match params.as_deref() {
                None => None,
                Some("money") => Some(money_params()),
                Some(other) => {
                    eprintln!("error: unknown parameter set `{other}` (try `money`)");
                    return EXIT_INPUT;
                }
            };
            let built = match stage(index, params_value.as_ref()) {
                Ok(built) => built,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let dir = emit.join("v1");
            if let Err(e) = fs::create_dir_all(&dir) {
                eprintln!("error: cannot create {}: {e}", dir.display());
                return EXIT_INPUT;
            }
            let doc_path = dir.join(format!("stage{index}.rvz"));
            let text = serialize_document(&built.to_document());
            if let Err(e) = fs::write(&doc_path, text) {
                eprintln!("error: cannot write {}: {e}", doc_path.display());
                return EXIT_INPUT;
            }
            println!("wrote {}", doc_path.display());
            if let Ok(traces) = reference_traces(index) {
                for (i, trace) in traces.iter().enumerate() {
                    let suffix = if traces.len() == 1 {
                        String::new()
                    } else {
                        format!("_{i}")
                    };
                    let trace_path = dir.join(format!("stage{index}{suffix}.trace"));
                    if let Err(e) = fs::write(&trace_path, trace.to_string()) {
                        eprintln!("error: cannot write {}: {e}", trace_path.display());
                        return EXIT_INPUT;
                    }
                    println!("wrote {}", trace_path.display());
                }
            }
            EXIT_OK
        }

        Command::ExportDot { doc, automaton } => {
            let doc = match load_document(&doc) {
                Ok(doc) => doc,
                Err(code) => return code,
            };
            match doc.automata.get(&automaton) {
                Some(AutomatonDecl::Plain(a)) => {
                    print!("{}", export_dot_automaton(a));
                    EXIT_OK
                }
                Some(AutomatonDecl::Compact(c)) => {
                    print!("{}", export_dot_compact(c));
                    EXIT_OK
                }
                None => {
                    eprintln!("error: no automaton named `{automaton}`");
                    EXIT_INPUT
                }
            }
        }
    }
}

/// Numbered-menu session: the menu goes to stderr, the chosen trace to
/// stdout once the session ends with `q` (or end of input).
fn run_interactive(system: &System) -> u8 {
    let mut sim = match Simulator::new(system) {
        Ok(sim) => sim,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        eprintln!("state: {}", sim.current());
        if sim.is_deadlocked() {
            eprintln!("deadlock: no enabled transitions");
            break;
        }
        for (i, t) in sim.enabled().iter().enumerate() {
            eprintln!("  {i}) --{}--> {}", t.label, t.target);
        }
        eprint!("choice (index or q): ");
        let _ = io::stderr().flush();
        let line = match lines.next() {
            Some(Ok(line)) => line,
            _ => break,
        };
        let choice = line.trim();
        if choice == "q" {
            break;
        }
        match choice.parse::<usize>() {
            Ok(index) => {
                if let Err(e) = sim.step(index) {
                    eprintln!("{e}");
                }
            }
            Err(_) => eprintln!("enter a transition index or q"),
        }
    }
    print!("{}", sim.into_trace());
    EXIT_OK
}
