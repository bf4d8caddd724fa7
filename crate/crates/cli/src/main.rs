use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use phi4_cli::{run_file, Command, RunOptions};

/// Lattice φ⁴ experiments: exact spectra, counter terms, critical fits and VQE.
#[derive(Parser)]
#[command(name = "phi4", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output_dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let options = RunOptions {
        out: args.out,
        seed: args.seed,
        threads: args.threads,
    };
    match run_file(args.command, &args.config, &options) {
        Ok(report) => {
            println!("{}", report.summary);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("phi4 {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
