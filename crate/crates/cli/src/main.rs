//! `iia`: lower bounds and adversarial families for testing IIA on a
//! collection of choice sets.

mod adversary;
mod bounds;
mod checks;
mod instance;
mod report;
mod structure;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::report::{write, Failure, Format, Report, EXIT_INPUT, EXIT_VERIFY};

#[derive(Parser, Debug)]
#[command(name = "iia", version, about = "Minimax lower bounds for testing IIA on a collection of choice sets")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output path. `decompose` writes the decomposition file there and
    /// `adversary` a directory of orientation files; other commands write their report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Incidence graph summary: sizes, connectivity, parity.
    Graph(structure::GraphArgs),
    /// Cycle decomposition with |σ|, μ and α.
    Decompose(structure::DecomposeArgs),
    /// Closed-form lower bounds on the minimax risk.
    Bounds(bounds::BoundsArgs),
    /// Orientations and perturbed systems with their certified separation.
    Adversary(adversary::AdversaryArgs),
    /// Numerical checks on small instances; exits 4 when a check fails.
    Verify(checks::VerifyArgs),
    /// Monte-Carlo risk of the registered tests against the mixture alternative.
    Simulate(checks::SimulateArgs),
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::input(format!("--jobs: {e}")))?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Graph(a) => structure::graph(a),
        Command::Decompose(a) => structure::decompose(a, cli.seed, out),
        Command::Bounds(a) => bounds::bounds(a, cli.seed),
        Command::Adversary(a) => adversary::adversary(a, cli.seed, out),
        Command::Verify(a) => checks::verify(a, cli.seed),
        Command::Simulate(a) => checks::simulate(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let rendered = report.render(cli.format);
    let writes_report = !matches!(cli.command, Command::Decompose(_) | Command::Adversary(_));
    match (&cli.out, writes_report) {
        (Some(path), true) => {
            if let Err(f) = write(path, &rendered) {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
        }
        _ => {
            let _ = std::io::stdout().write_all(rendered.as_bytes());
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
