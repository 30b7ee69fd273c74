//! `oival`: batch front end for suites, selection demos, builds and relation checks.
//!
//! Exit codes: 0 pass, 1 invariant violation or failed run, 2 usage or parse error.

mod canon;
mod demo;
mod gen;
mod plan;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use oival::seqcore::{parse_seq, relate, Outcome, Rel};
use serde_json::json;

use demo::{run_demo, DemoConfig, Inputs, Procedure};
use plan::{read_plan, run_hitting, run_scale, Plan};
use suites::{run_suite, SuiteConfig};

/// Bad input: unreadable plans, malformed JSON or specs, unknown names.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "oival", version, about = "Interval-omission workbench: suites, selection demos, builds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a seeded invariant suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a selection procedure on a sample plan and covers; writes a JSON trace.
    Demo {
        #[arg(long, value_enum)]
        procedure: Procedure,
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        covers: PathBuf,
        #[arg(long, default_value_t = 1000)]
        horizon: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a demo trace from its embedded inputs and compare bytes.
    Replay { trace: PathBuf },
    /// Build a scale, tower or hitting plan.
    Construct {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's horizon.
        #[arg(long)]
        horizon: Option<u64>,
        /// Overrides the plan's witness schedule length.
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a relation between two sequence specs up to a horizon.
    Rel { rel: String, a: String, b: String, horizon: u64 },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn usage(msg: String) -> anyhow::Error {
    UsageError(msg).into()
}

/// Returns whether the run passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Verify { suite, seed, horizon, rounds, out } => {
            let report = run_suite(&suite, SuiteConfig { seed, horizon, rounds })?;
            emit(&canon::pretty(&report)?, out.as_ref())?;
            eprintln!(
                "suite {}: {} ({} cases, {} checks)",
                report.suite,
                if report.passed { "pass" } else { "FAIL" },
                report.cases,
                report.checks
            );
            for c in &report.counterexamples {
                eprintln!("  counterexample [{}]: {}", c.inputs.join(" ; "), c.detail);
            }
            Ok(report.passed)
        }
        Cmd::Demo { procedure, sample, covers, horizon, seed, out } => {
            let inputs = demo::read_inputs(&sample, &covers)?;
            let trace = run_demo(&DemoConfig { procedure, horizon, seed }, &inputs)?;
            emit(&canon::pretty(&trace)?, out.as_ref())?;
            eprintln!("{} demo: {}", procedure.name(), trace.verdict);
            Ok(trace.certified())
        }
        Cmd::Replay { trace } => {
            let text = std::fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", trace.display())))?;
            let field = |k: &str| v.get(k).cloned().ok_or_else(|| usage(format!("trace has no {k:?}")));
            let config: DemoConfig = serde_json::from_value(field("config")?).map_err(|e| usage(format!("config: {e}")))?;
            let inputs: Inputs = serde_json::from_value(field("inputs")?).map_err(|e| usage(format!("inputs: {e}")))?;
            let again = canon::pretty(&run_demo(&config, &inputs)?)?;
            let same = again == text;
            eprintln!("replay: {}", if same { "identical" } else { "DIFFERS" });
            Ok(same)
        }
        Cmd::Construct { plan, horizon, rounds, seed, out } => {
            let mut p = read_plan(&plan)?;
            match &mut p {
                Plan::Scale(s) => {
                    s.horizon = horizon.unwrap_or(s.horizon);
                    s.rounds = rounds.unwrap_or(s.rounds);
                }
                Plan::Hitting(h) => {
                    h.horizon = horizon.unwrap_or(h.horizon);
                    h.base.rounds = rounds.unwrap_or(h.base.rounds);
                }
            }
            let digest = canon::digest(&json!({ "plan": p, "seed": seed }))?;
            let (output, valid) = match &p {
                Plan::Scale(s) => {
                    let o = run_scale(s)?;
                    let valid = o.valid;
                    (canon::to_value(&o)?, valid)
                }
                Plan::Hitting(h) => {
                    let b = run_hitting(h)?;
                    (canon::to_value(&b.output)?, b.output.valid)
                }
            };
            let doc = json!({ "plan": p, "seed": seed, "inputs_digest": digest, "output": output, "valid": valid });
            emit(&canon::pretty(&doc)?, out.as_ref())?;
            eprintln!("construct: {}", if valid { "valid" } else { "INVALID" });
            Ok(valid)
        }
        Cmd::Rel { rel, a, b, horizon } => {
            let r: Rel = rel.parse().map_err(|e| usage(format!("{e}")))?;
            let sa = parse_seq(&a).map_err(|e| usage(format!("{a:?}: {e}")))?;
            let sb = parse_seq(&b).map_err(|e| usage(format!("{b:?}: {e}")))?;
            let v = relate(r, &sa, &sb, horizon)?;
            let word = match v.outcome {
                Outcome::HoldsWithWitnesses(_) => "Holds",
                Outcome::FailsAt(_) => "Fails",
                Outcome::UnknownUpTo(_) => "Unknown",
            };
            let doc = json!({ "rel": r, "a": sa.to_string(), "b": sb.to_string(), "verdict": word, "detail": v });
            print!("{}", canon::pretty(&doc)?);
            eprintln!("{r}({sa}, {sb}) up to {horizon}: {word}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<UsageError>().is_some()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
