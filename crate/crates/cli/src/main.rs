use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use limitlab_cli::{run, Experiment, SUBCOMMANDS};

#[derive(Parser)]
#[command(name = "limitlab", version, about = "Experiments on limit sets of Kleinian groups")]
#[command(arg_required_else_help = true, after_help = format!("Subcommands: {SUBCOMMANDS}"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generators, word ball and displacements
    Group(Common),
    /// Sampled limit set as CSV and PGM raster
    Limitset(Common),
    /// Critical exponent by orbit counting
    Delta(Common),
    /// Truncated Patterson-Sullivan measure and transport checks
    Psmeasure(Common),
    /// KMS and equivariance defects
    Kms(Common),
    /// Finite K-cycles
    Kcycle {
        #[command(subcommand)]
        kind: Kcycle,
    },
    /// Schatten and Janson-Wolff summability thresholds
    Summability(Common),
    /// Boundary conjugacy between two groups
    Conjugacy(Common),
}

#[derive(Subcommand)]
enum Kcycle {
    Cantor(Common),
    Circle(Common),
    Sphere(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, common) = match cli.command {
        Command::Group(c) => (Experiment::Group, c),
        Command::Limitset(c) => (Experiment::Limitset, c),
        Command::Delta(c) => (Experiment::Delta, c),
        Command::Psmeasure(c) => (Experiment::Psmeasure, c),
        Command::Kms(c) => (Experiment::Kms, c),
        Command::Kcycle { kind: Kcycle::Cantor(c) } => (Experiment::KcycleCantor, c),
        Command::Kcycle { kind: Kcycle::Circle(c) } => (Experiment::KcycleCircle, c),
        Command::Kcycle { kind: Kcycle::Sphere(c) } => (Experiment::KcycleSphere, c),
        Command::Summability(c) => (Experiment::Summability, c),
        Command::Conjugacy(c) => (Experiment::Conjugacy, c),
    };
    let level = if common.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = common.workers {
        if n == 0 {
            eprintln!("usage error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("i/o error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(exp, &common.config, &common.out) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
