//! `omk` — scenario runner for the driven-cavity polariton engine.
//!
//! Exit codes: 0 success, 1 solver failure, 2 configuration error.

mod runner;
mod scenario;

use clap::{Parser, Subcommand};
use omk_core::Error;
use scenario::Scenario;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "omk", version, about = "Driven optomechanical cavity: sweeps, spectra, oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSV tables plus a JSON summary.
    Run {
        /// Scenario file (flat `key = value` lines).
        scenario: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads for sweep points (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Run the scenario twice and require byte-identical tables.
        #[arg(long)]
        seed_check: bool,
    },
    /// Parse and validate a scenario file without running it.
    Validate {
        scenario: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<(Scenario, String), Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let sc = Scenario::parse(&text)?;
    Ok((sc, text))
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => match load(&scenario) {
            Ok((sc, _)) => {
                println!("ok: {} scenario, solver {}", sc.kind.name(), sc.solver.name());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("omk: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run { scenario, out, workers, seed_check } => {
            if workers > 0 {
                if let Err(e) =
                    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()
                {
                    eprintln!("omk: worker pool: {e}");
                    return ExitCode::from(2);
                }
            }
            let (sc, echo) = match load(&scenario) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("omk: {e}");
                    return ExitCode::from(2);
                }
            };
            let artifacts = match runner::run(&sc, &echo) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("omk: {e}");
                    return exit_for(&e);
                }
            };
            if seed_check {
                match runner::run(&sc, &echo) {
                    Ok(second) => {
                        for ((n1, c1), (n2, c2)) in artifacts.files.iter().zip(&second.files) {
                            if n1 != n2 || c1 != c2 {
                                eprintln!("omk: seed-check failed: {} differs between runs", n1.display());
                                return ExitCode::from(1);
                            }
                        }
                        println!("seed-check: outputs byte-identical across two runs");
                    }
                    Err(e) => {
                        eprintln!("omk: seed-check rerun failed: {e}");
                        return exit_for(&e);
                    }
                }
            }
            match artifacts.write(&out) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("omk: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
