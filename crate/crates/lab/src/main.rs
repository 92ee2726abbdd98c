use std::path::PathBuf;
use std::process::ExitCode;

use bfamily_lab::manifest::{parse_manifest, AnalyzeSpec, ExperimentKind};
use bfamily_lab::runner::{analyze_file, execute};
use bfamily_lab::{LabError, LabResult};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bfamily", version, about = "Experiments on the b-family m_t + u m_x + b u_x m = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate initial data and write diagnostics.
    Simulate(RunArgs),
    /// Run the frequency-comb experiment and its Riccati comparison.
    Inflate(RunArgs),
    /// Print Sobolev and Besov norms of a snapshot.
    Analyze(AnalyzeArgs),
    /// Run a manifest over a list of parameter values.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the manifest's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Records per unit time; overrides `solver.cadence`.
    #[arg(long)]
    cadence: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Snapshot file (alternative to --manifest).
    snapshot: Option<PathBuf>,
    #[arg(long, conflicts_with = "snapshot")]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Smoothness indices.
    #[arg(long, value_delimiter = ',', default_value = "1.5")]
    s: Vec<f64>,
    /// Besov sequence exponents (`inf` allowed).
    #[arg(long, value_delimiter = ',', default_value = "2,inf")]
    q: Vec<f64>,
}

fn run_manifest(args: &RunArgs, expected: ExperimentKind) -> LabResult<()> {
    let mut m = parse_manifest(&args.manifest)?;
    if m.kind != expected {
        return Err(LabError::Config(format!(
            "manifest kind is \"{}\" but the subcommand is \"{}\"",
            m.kind.as_str(),
            expected.as_str()
        )));
    }
    if let Some(out) = &args.out {
        m.out = out.clone();
    }
    if let Some(c) = args.cadence {
        m.solver.cadence = c;
    }
    for o in execute(&m, args.jobs)? {
        println!(
            "{}: {} at t = {} after {} steps -> {}",
            o.summary.name,
            o.summary.verdict.as_str(),
            o.summary.verdict_time,
            o.summary.steps,
            o.dir.display()
        );
    }
    Ok(())
}

fn run_analyze(args: &AnalyzeArgs) -> LabResult<()> {
    match (&args.snapshot, &args.manifest) {
        (Some(path), None) => {
            let spec = AnalyzeSpec { s: args.s.clone(), q: args.q.clone() };
            print!("{}", analyze_file(path, &spec)?);
            Ok(())
        }
        (None, Some(path)) => {
            let mut m = parse_manifest(path)?;
            if m.kind != ExperimentKind::Analyze {
                return Err(LabError::Config(format!("manifest kind is \"{}\", not \"analyze\"", m.kind.as_str())));
            }
            if let Some(out) = &args.out {
                m.out = out.clone();
            }
            for o in execute(&m, 1)? {
                print!("{}", o.table.unwrap_or_default());
            }
            Ok(())
        }
        _ => Err(LabError::Config("analyze takes a snapshot path or --manifest".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run_manifest(a, ExperimentKind::Simulate),
        Command::Inflate(a) => run_manifest(a, ExperimentKind::Inflate),
        Command::Sweep(a) => run_manifest(a, ExperimentKind::Sweep),
        Command::Analyze(a) => run_analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bfamily: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
