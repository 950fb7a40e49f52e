use std::path::PathBuf;
use std::process::ExitCode;

use bessel_mp::{configure_threads, load_config, run, Mode};
use clap::Parser;

/// Critical points of (I-Δ)^α u + λVu = f(x,u) + μξ|u|^{p-2}u on a periodic box.
#[derive(Parser, Debug)]
#[command(name = "bessel-mp", version)]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// key=value or JSON config file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let config = match load_config(&cli.config, cli.mode, cli.seed, cli.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(report) => {
            for s in &report.stages {
                let mark = if s.pass { "ok    " } else { "FAILED" };
                match &s.error {
                    Some(e) => eprintln!("{mark} {:<28} {:>9.3}s  {e}", s.name, s.seconds),
                    None => eprintln!("{mark} {:<28} {:>9.3}s", s.name, s.seconds),
                }
            }
            eprintln!("report: {}", config.out.join("report.json").display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
