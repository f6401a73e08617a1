//! Command-line front end for the optimizers, oracles, instance tools and
//! experiment harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input or replay mismatch,
//! 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use empmo::harness::{self, Execution, HarnessError, RunSpec, StartMode, Target};
use empmo::instances::{generate_planted, write_instance, InstanceError, InstanceRef, PlantedSpec};
use empmo::oracles;
use empmo::pseudoboolean::{ProblemKind, PseudoBooleanProblem};
use empmo::shortestpath::SpRunConfig;

#[derive(Parser)]
#[command(
    name = "empmo",
    version,
    about = "Evolutionary multi-party multi-objective optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer once and write its CSVs.
    Run(RunArgs),
    /// Expand a sweep file and run every configuration and seed.
    Sweep(SweepArgs),
    /// Print the exact Pareto sets of a small instance.
    Oracle(OracleArgs),
    /// Generate a planted path instance.
    Gen(GenArgs),
    /// Check a path instance file.
    Validate { file: PathBuf },
    /// Re-run one row of a summary CSV and compare it with the original.
    Replay { summary: PathBuf, run_id: String },
}

#[derive(Args)]
struct OutDir {
    /// Directory for CSV output.
    #[arg(long, env = "EMPMO_OUT_DIR", default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// semo, empmo-simple, empmo-random, empmo-payoff, empmo-simple-sp,
    /// empmo-cons-sp or demo-sp.
    #[arg(long)]
    algorithm: String,
    /// Pseudo-Boolean problem (bpaoaz, aoaz, aorz, aofz).
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "random")]
    start: String,
    #[arg(long)]
    phi: Option<f64>,
    /// Path instance: fixture, planted:n=..,seed=.. or a file.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    eps1: f64,
    #[arg(long, default_value_t = 1.0)]
    eps2: f64,
    /// Defaults to twice eps2.
    #[arg(long)]
    eps2max: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluations (pseudo-Boolean) or generations (paths).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = SpRunConfig::DEFAULT_CADENCE)]
    cadence: u64,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct OracleArgs {
    /// Pseudo-Boolean problem; requires --n.
    #[arg(long, conflicts_with = "instance")]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Path instance.
    #[arg(long)]
    instance: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    jitter: u64,
    #[arg(long, default_value_t = 3)]
    hover: usize,
    #[arg(long, default_value_t = 3)]
    knn: usize,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Invalid(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
        Command::Gen(a) => gen(a),
        Command::Validate { file } => validate(&file),
        Command::Replay { summary, run_id } => replay(&summary, &run_id),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let algorithm: harness::AlgorithmId = a.algorithm.parse()?;
    let spec = match algorithm {
        harness::AlgorithmId::Pb(_) => {
            let kind: ProblemKind = a
                .problem
                .ok_or_else(|| invalid("--problem is required"))?
                .parse()
                .map_err(invalid)?;
            RunSpec {
                algorithm,
                target: Target::PseudoBoolean {
                    kind,
                    n: a.n.ok_or_else(|| invalid("--n is required"))?,
                    start: a.start.parse::<StartMode>()?,
                },
                phi: a.phi,
                eps: None,
                seed: a.seed,
                budget: a.budget.unwrap_or(empmo::pseudoboolean::StopRule::DEFAULT_BUDGET),
                cadence: a.cadence,
            }
        }
        harness::AlgorithmId::Sp(_) => RunSpec {
            algorithm,
            target: Target::Graph(a.instance.ok_or_else(|| invalid("--instance is required"))?.parse()?),
            phi: None,
            eps: Some((a.eps1, a.eps2, a.eps2max.unwrap_or(2.0 * a.eps2))),
            seed: a.seed,
            budget: a.budget.unwrap_or(100_000),
            cadence: a.cadence,
        },
    };
    let outcome = harness::execute(&spec);
    if !outcome.row.error.is_empty() {
        return Err(Failure::Invalid(outcome.row.error));
    }
    let files = harness::write_outputs(
        &a.out.out_dir,
        &outcome.row.run_id.clone(),
        std::slice::from_ref(&outcome),
    )?;
    println!("{}", harness::SummaryRow::HEADER.join(","));
    println!("{}", outcome.row.fields().join(","));
    eprintln!("wrote {}", files.summary.display());
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let text =
        std::fs::read_to_string(&a.config).map_err(|e| Failure::Runtime(format!("{}: {e}", a.config.display())))?;
    let specs = harness::parse_sweep(&text)?;
    let execution = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel { jobs: a.jobs }
    };
    let outcomes = harness::run_batch(&specs, execution);
    let stem = a.config.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let files = harness::write_outputs(&a.out.out_dir, stem, &outcomes)?;
    let failed = outcomes.iter().filter(|o| !o.row.error.is_empty()).count();
    println!("{} runs, {} failed", outcomes.len(), failed);
    for p in [&files.summary, &files.metrics, &files.aggregate, &files.slopes] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), Failure> {
    match (a.problem, a.instance) {
        (Some(p), None) => {
            let kind: ProblemKind = p.parse().map_err(invalid)?;
            let problem =
                PseudoBooleanProblem::new(kind, a.n.ok_or_else(|| invalid("--n is required"))?).map_err(invalid)?;
            let catalog = oracles::brute_force_pseudoboolean(&problem).map_err(invalid)?;
            print!("{}", oracles::pseudoboolean_report(&problem, &catalog));
        }
        (None, Some(i)) => {
            let g = i.parse::<InstanceRef>()?.load()?;
            print!("{}", oracles::exact_path_catalog(&g).map_err(invalid)?.report());
        }
        _ => return Err(invalid("give either --problem with --n, or --instance")),
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let spec = PlantedSpec {
        jitter: a.jitter,
        hover_points: a.hover,
        neighbours: a.knn,
        ..PlantedSpec::new(a.n, a.seed)
    };
    let inst = generate_planted(&spec)?;
    let text = write_instance(&inst.graph, &[spec.reference()]);
    match a.output {
        Some(p) => harness::write_atomic(&p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn validate(file: &Path) -> Result<(), Failure> {
    let g = InstanceRef::File(file.to_path_buf()).load()?;
    println!(
        "ok: {} vertices, {} edges, party dimensions {:?}",
        g.n(),
        g.edges().len(),
        g.party_dims()
    );
    Ok(())
}

fn replay(summary: &Path, run_id: &str) -> Result<(), Failure> {
    let rows = harness::read_summary_csv(summary)?;
    let r = harness::replay(&rows, run_id)?;
    if r.identical() {
        println!("identical: {}", r.replayed.canonical());
        Ok(())
    } else {
        println!("original: {}", r.original.canonical());
        println!("replayed: {}", r.replayed.canonical());
        Err(Failure::Invalid(format!("run {run_id} did not reproduce")))
    }
}
