//! `trine`: tables and invariant checks for the lifted trine ensemble.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trine_core::reports::{run, Command, Fault, OutputFormat, RunConfig};
use trine_core::TrineError;

#[derive(Parser)]
#[command(name = "trine", version, about = "Accessible information of the lifted trine states")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal azimuth of the symmetric basis against the lift.
    ThetaCurve(Common),
    /// Information of the symmetric basis at 3 degree azimuth steps.
    ThetaFamily(Common),
    /// Basis curves and the accessible information on [0, gamma1].
    Envelope(Common),
    /// Optimal measurement at a single lift.
    Povm(Common),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct Common {
    /// Lift for `povm`.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    /// Azimuth search tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Key-value file caching gamma1.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Test hook: scale the first weight of the checked POVM.
    #[arg(long, hide = true)]
    inject_fault: Option<f64>,
}

fn exit_code(err: &TrineError) -> u8 {
    match err {
        TrineError::Io { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::ThetaCurve(a) => (Command::ThetaCurve, a),
        Cmd::ThetaFamily(a) => (Command::ThetaFamily, a),
        Cmd::Envelope(a) => (Command::Envelope, a),
        Cmd::Povm(a) => (Command::Povm, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("trine: {e}");
            return ExitCode::from(2);
        }
    }

    let mut config = RunConfig::new(command, args.out);
    config.alpha = args.alpha;
    config.alpha_min = args.alpha_min;
    config.alpha_max = args.alpha_max;
    config.alpha_step = args.alpha_step;
    config.tol = args.tol;
    config.seed = args.seed;
    config.format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Jsonl => OutputFormat::JsonLines,
    };
    config.gamma1_cache = args.cache;
    config.fault = args.inject_fault.map(Fault::ScaleWeight);

    match run(&config) {
        Ok(outcome) => {
            if command == Command::Verify {
                print!("{}", outcome.contents);
            }
            eprintln!("wrote {}", outcome.path.display());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("trine: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
