use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use saari_cli::{run, Command, Options};
use saari_core::genericity::Verdict;

#[derive(Parser)]
#[command(
    name = "saari",
    version,
    about = "Lie-derivative towers, relative equilibria and genericity experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate the tower of Lie derivatives at `point`.
    Tower(Common),
    /// Numerical rank of the tower's Jacobian with respect to a jet.
    Rank(Common),
    /// Integrate from `point` and write the trajectory CSV.
    Simulate(Common),
    /// Compute a relative equilibrium.
    Releq(Common),
    /// Scan the tower over sampled points.
    Scan(Common),
    /// Scan perturbed copies of the subject over several trials.
    PerturbExperiment(Common),
    /// Decide whether a trajectory keeps its moment of inertia constant.
    Classify(Common),
    /// Refine the figure-eight orbit, integrate one period and classify it.
    Figure8Demo(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configuration's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON report (overrides `output.report`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with 1 unless the Jacobian has full rank (`rank` only).
    #[arg(long)]
    expect_submersion: bool,
    /// Exit with 1 unless the verdict matches (`classify`, `figure8-demo`).
    #[arg(long, value_enum)]
    expect: Option<ExpectedVerdict>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpectedVerdict {
    RelativeEquilibrium,
    Equilibrium,
    NonConstantF,
    Inconclusive,
}

impl From<ExpectedVerdict> for Verdict {
    fn from(v: ExpectedVerdict) -> Self {
        match v {
            ExpectedVerdict::RelativeEquilibrium => Verdict::RelativeEquilibrium,
            ExpectedVerdict::Equilibrium => Verdict::Equilibrium,
            ExpectedVerdict::NonConstantF => Verdict::NonConstantF,
            ExpectedVerdict::Inconclusive => Verdict::Inconclusive,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Sub::Tower(a) => (Command::Tower, a),
        Sub::Rank(a) => (Command::Rank, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Releq(a) => (Command::Releq, a),
        Sub::Scan(a) => (Command::Scan, a),
        Sub::PerturbExperiment(a) => (Command::PerturbExperiment, a),
        Sub::Classify(a) => (Command::Classify, a),
        Sub::Figure8Demo(a) => (Command::Figure8Demo, a),
    };
    let opts = Options {
        config: args.config,
        seed: args.seed,
        out: args.out,
        expect_submersion: args.expect_submersion,
        expect: args.expect.map(Verdict::from),
    };
    match run(command, &opts) {
        Ok(outcome) => {
            print!("{}", outcome.json);
            if let Some(m) = outcome.message {
                eprintln!("saari {}: {m}", command.name());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("saari {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
