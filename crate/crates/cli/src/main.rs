use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod config;
mod error;
mod experiments;
mod runner;
mod table;

/// Batch runner for oscillator decoherence experiments.
#[derive(Debug, Parser)]
#[command(name = "zerotemp", version, about)]
struct Args {
    /// Experiment configuration (JSON), or a metadata sidecar from a previous run.
    #[arg(long)]
    config: PathBuf,

    /// Directory that receives the CSV and its metadata.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for sweeps and parallel kernels.
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }

    let result = config::load(&args.config).and_then(|cfg| runner::run(&cfg, &args.out_dir));
    match result {
        Ok((csv, meta)) => {
            log::info!("wrote {} and {}", csv.display(), meta.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
