//! Command-line front end. [`run`] returns the exit code together with
//! the standard output and error text so it can be driven in-process.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentReport};
use crate::filtration::{exists_immersion_morphism, filtration_metric, is_immersed, Decision, Filtration};
use crate::io;
use crate::partition::{psi_conditional_atomicity, sigma_metric, Partition, ProbeSequence};
use crate::process::{self, paper_example_suite};
use crate::rational::{self, fmt_decimal, fmt_exact};
use crate::space::ProbSpace;

pub const EXIT_SCHEMA: i32 = 64;
pub const EXIT_PRECONDITION: i32 = 65;

#[derive(Debug, Parser)]
#[command(
    name = "lrspace",
    version,
    about = "Exact invariants, metrics and experiments for finite Lebesgue-Rokhlin spaces"
)]
struct Cli {
    /// Materialize nonatomic parts into 2^r equal atoms.
    #[arg(long, global = true, value_name = "r")]
    resolution: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Probes::Canonical)]
    probes: Probes,
    #[arg(long, global = true, default_value_t = 0, value_name = "n")]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Probes {
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rokhlin invariant of a space.
    Canon { space: PathBuf },
    /// Isomorphism of two spaces, morphisms or filtrations.
    Iso { a: PathBuf, b: PathBuf },
    /// Whether the first filtration is immersed into the second.
    Immersed {
        e: PathBuf,
        f: PathBuf,
        /// Search for an atom permutation carrying the first into an immersion.
        #[arg(long)]
        up_to_iso: bool,
    },
    /// Whether a process is a martingale for a filtration.
    Martingale { filtration: PathBuf, process: PathBuf },
    /// Probe metric between two partitions or two filtrations.
    Metric { a: PathBuf, b: PathBuf },
    /// Conditional atomicity of the second partition given the first.
    Psi { e1: PathBuf, e2: PathBuf },
    /// Emit a process tree with its natural filtration.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        #[arg(long, short = 'n', default_value_t = 4)]
        steps: usize,
        /// Success probability of the counting process.
        #[arg(long, default_value = "1/2")]
        p: String,
    },
    /// Run the counting, walk and slowed-down example suite.
    PaperExamples,
    /// Convergence experiments.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        /// Coin count for independent-copies.
        #[arg(long, default_value_t = 8)]
        m: u32,
        /// Refinement depth for psi-refinement.
        #[arg(long, default_value_t = 8)]
        depth: u32,
        /// Seed partition (psi-refinement) or target partition (orbit-density).
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Trial count for orbit-density.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Uniform ambient size for a random orbit-density target.
        #[arg(long, default_value_t = 64)]
        atoms: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenerateKind {
    Walk,
    Counting,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentKind {
    IndependentCopies,
    PsiRefinement,
    OrbitDensity,
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }
}

pub fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Schema(_) => EXIT_SCHEMA,
        _ => EXIT_PRECONDITION,
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(0, text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let output = cli.output.clone();
    let mut outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: exit_code_of(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    if let Some(path) = output {
        if let Err(e) = std::fs::write(&path, &outcome.stdout) {
            return Outcome {
                code: EXIT_PRECONDITION,
                stdout: String::new(),
                stderr: format!("error: {}: {e}\n", path.display()),
            };
        }
        outcome.stdout.clear();
    }
    outcome
}

fn decision_outcome(d: Decision, mut body: Value) -> Outcome {
    body["decision"] = json!(d.as_str());
    Outcome::ok(d.exit_code(), io::render(&body))
}

fn read_partition(path: &Path, resolution: Option<u32>) -> Result<Partition> {
    io::partition_from_json(&io::read_document(path)?, None, resolution)
}

fn read_filtration(path: &Path, resolution: Option<u32>) -> Result<Filtration> {
    io::filtration_from_json(&io::read_document(path)?, resolution)
}

/// Second partition read on the ambient of the first when it has none.
fn read_partition_pair(a: &Path, b: &Path, resolution: Option<u32>) -> Result<(Partition, Partition)> {
    let e = read_partition(a, resolution)?;
    let f = io::partition_from_json(&io::read_document(b)?, Some(e.ambient()), resolution)?;
    Ok((e, f))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let res = cli.resolution;
    match &cli.command {
        Command::Canon { space } => {
            let s = io::space_from_json(&io::read_document(space)?)?;
            let inv = s.rokhlin_invariant();
            let mut body = json!({"invariant": io::invariant_to_json(&inv)});
            if let Some(r) = res {
                let ambient = Arc::new(ProbSpace::uniform(1 << r));
                let t = inv.canonical_transversal_partition(&ambient)?;
                body["transversal"] = io::partition_to_json(&t.partition);
                body["continuum_blocks"] = json!(t.continuum_blocks);
            }
            Ok(Outcome::ok(0, io::render(&body)))
        }
        Command::Iso { a, b } => {
            let (da, db) = (io::read_document(a)?, io::read_document(b)?);
            let kind = document_kind(&da)?;
            if kind != document_kind(&db)? {
                return Err(Error::Schema("iso: documents are of different kinds".into()));
            }
            let iso = match kind {
                "space" => {
                    let (x, y) = (io::space_from_json(&da)?, io::space_from_json(&db)?);
                    x.is_isomorphic(&y)
                }
                "morphism" => io::morphism_from_json(&da)?.is_isomorphic(&io::morphism_from_json(&db)?),
                _ => io::filtration_from_json(&da, res)?.is_isomorphic(&io::filtration_from_json(&db, res)?)?,
            };
            Ok(decision_outcome(iso.into(), json!({"kind": kind})))
        }
        Command::Immersed { e, f, up_to_iso } => {
            let (x, y) = (read_filtration(e, res)?, read_filtration(f, res)?);
            if *up_to_iso {
                let d = exists_immersion_morphism(&y, &x)?;
                return Ok(decision_outcome(d, json!({"up_to_iso": true})));
            }
            let r = is_immersed(&x, &y)?;
            let witness = r.witness.map(|(s, t)| json!({"s": s, "t": t}));
            Ok(decision_outcome(r.immersed.into(), json!({"witness": witness})))
        }
        Command::Martingale { filtration, process } => {
            let f = read_filtration(filtration, res)?;
            let values = io::process_from_json(&io::read_document(process)?)?;
            let v = f.martingale_violation(&values)?;
            let witness = v.map(|(s, t)| json!({"s": s, "t": t}));
            Ok(decision_outcome(v.is_none().into(), json!({"first_violation": witness})))
        }
        Command::Metric { a, b } => {
            let da = io::read_document(a)?;
            let d = if document_kind(&da)? == "filtration" {
                let (x, y) = (io::filtration_from_json(&da, res)?, read_filtration(b, res)?);
                filtration_metric(&x, &y, &ProbeSequence::canonical(x.ambient().clone())?)?
            } else {
                let (e, f) = read_partition_pair(a, b, res)?;
                sigma_metric(&e, &f, &ProbeSequence::canonical(e.ambient().clone())?)?
            };
            Ok(Outcome::ok(0, value_output(&d, cli.format)))
        }
        Command::Psi { e1, e2 } => {
            let (e, f) = read_partition_pair(e1, e2, res)?;
            let psi = psi_conditional_atomicity(&e, &f)?;
            Ok(Outcome::ok(0, value_output(&psi, cli.format)))
        }
        Command::Generate { kind, steps, p } => {
            let (name, tree, p) = match kind {
                GenerateKind::Walk => ("walk", process::random_walk(*steps)?, None),
                GenerateKind::Counting => {
                    let p = rational::parse(p).map_err(|_| Error::Schema(format!("--p: malformed fraction {p:?}")))?;
                    ("counting", process::bernoulli_counting(*steps, &p)?, Some(p))
                }
            };
            let body = json!({
                "kind": name,
                "steps": steps,
                "p": p.as_ref().map(io::rational_to_json),
                "filtration": io::filtration_to_json(&tree.natural_filtration()),
                "process": io::process_to_json(tree.values()),
            });
            Ok(Outcome::ok(0, io::render(&body)))
        }
        Command::PaperExamples => {
            let suite = paper_example_suite();
            let block = io::render(&suite.to_json());
            let text = match cli.format {
                Some(Format::Json) => block,
                _ => format!("{}\nresult:\n{block}", suite.render_text()),
            };
            Ok(Outcome::ok(0, text))
        }
        Command::Experiment { kind, m, depth, partition, trials, atoms } => {
            let report = run_experiment(*kind, *m, *depth, partition.as_deref(), *trials, *atoms, cli.seed, res)?;
            let text = match cli.format {
                Some(Format::Json) => io::render(&report.to_json()),
                _ => report.to_csv(),
            };
            Ok(Outcome::ok(0, text))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_experiment(
    kind: ExperimentKind,
    m: u32,
    depth: u32,
    partition: Option<&Path>,
    trials: u64,
    atoms: usize,
    seed: u64,
    res: Option<u32>,
) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::IndependentCopies => experiments::independent_copies_experiment(m),
        ExperimentKind::PsiRefinement => {
            let e = match partition {
                Some(p) => read_partition(p, res)?,
                None => Partition::discrete(Arc::new(ProbSpace::uniform(2))),
            };
            experiments::psi_refinement_experiment(&e, depth)
        }
        ExperimentKind::OrbitDensity => {
            let e = match partition {
                Some(p) => read_partition(p, res)?,
                None => {
                    if atoms < 2 {
                        return Err(Error::OutOfRange("--atoms must be at least 2".into()));
                    }
                    let space = Arc::new(ProbSpace::uniform(atoms));
                    // target drawn from the stream just past the trials
                    experiments::random_partition(&space, 8, &mut experiments::trial_rng(seed, u64::MAX))
                }
            };
            let mut report = experiments::orbit_density_experiment(&e, trials, seed)?;
            if partition.is_none() {
                report.parameters.push(("target".into(), "random, stream 2^64-1".into()));
            }
            Ok(report)
        }
    }
}

fn value_output(q: &rational::Rational, format: Option<Format>) -> String {
    match format {
        Some(Format::Json) => io::render(&io::value_json(q)),
        Some(Format::Csv) => format!("exact,approx\n{},{}\n", fmt_exact(q), fmt_decimal(q)),
        _ => format!("{}\napprox {}\n", fmt_exact(q), fmt_decimal(q)),
    }
}

fn document_kind(v: &Value) -> Result<&'static str> {
    let m = v.as_object().ok_or_else(|| Error::Schema("expected a JSON object".into()))?;
    if m.contains_key("map") {
        Ok("morphism")
    } else if m.contains_key("stages") || m.contains_key("filtration") {
        Ok("filtration")
    } else if m.contains_key("atoms") {
        Ok("space")
    } else if m.contains_key("blocks") {
        Ok("partition")
    } else {
        Err(Error::Schema("unrecognized document".into()))
    }
}
