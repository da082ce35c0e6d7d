use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mpemba::cli::config::Overrides;

/// Quantum Mpemba effect simulator: symmetry restoration in U(1) random
/// circuits and anisotropic spin chains.
#[derive(Parser)]
#[command(name = "mpemba", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key = value config file.
    Run {
        /// Path to the config file.
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's ensemble size.
        #[arg(long)]
        realizations: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn init_threads() {
    // MPEMBA_THREADS caps parallelism; 0 or unset means automatic
    if let Ok(v) = std::env::var("MPEMBA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                faer::set_global_parallelism(faer::Par::rayon(n));
            }
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, realizations, output } => {
            let overrides = Overrides { seed, realizations, output_dir: output };
            match mpemba::cli::run_config_file(&config, &overrides) {
                Ok(summary) => {
                    println!("{summary}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
    }
}
