use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use berry_core::cli::{self, EXIT_CONFIG};
use clap::Parser;

/// Berry-phase simulator for degenerate entangled pairs.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// CSV output path (overrides `output_path` in the config)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write gnuplot columns to this path
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("berry-sim: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", args.config.display())),
    };
    let config = match cli::parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let outcome = match cli::run(&config) {
        Ok(o) => o,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    print!("{}", cli::summary(&config, &outcome));

    let out = args.out.or_else(|| config.output_path.as_ref().map(PathBuf::from));
    if let Some(path) = out {
        if let Err(e) = fs::write(&path, cli::to_csv(&outcome.records)) {
            return fail(EXIT_CONFIG, format!("{}: {e}", path.display()));
        }
    }
    if let Some(path) = args.plot {
        if let Err(e) = fs::write(&path, cli::emit_plot_data(&outcome.records)) {
            return fail(EXIT_CONFIG, format!("{}: {e}", path.display()));
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
