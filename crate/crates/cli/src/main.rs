//! `bbnf`: batch front-end for the bouncing-ball normal form toolkit.

mod config;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Flags, Task};
use tasks::Failure;

#[derive(Parser, Debug)]
#[command(name = "bbnf", version, about = "Normal forms, inversion and spectra for bouncing-ball orbits")]
struct Cli {
    #[arg(value_enum)]
    task: Task,
    /// TOML run configuration; its keys override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Normal-form order.
    #[arg(long)]
    order: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long)]
    seed: Option<u64>,
    /// Domain jet a0,a1,... (upper boundary 1 + a0 x² + a1 x⁴ + …).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    jet: Option<Vec<f64>>,
    /// Ellipse semi-axes a,b (bouncing ball along the y-axis).
    #[arg(long, value_delimiter = ',')]
    ellipse: Option<Vec<f64>>,
    /// Normal-form coefficients b0,b1,... to invert.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    b: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let flags = Flags { out: cli.out, order: cli.order, seed: cli.seed, jet: cli.jet, ellipse: cli.ellipse, b: cli.b };
    let cfg = match config::load(cli.task, &flags, cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    match tasks::run(&cfg) {
        Ok(rep) => {
            if let Err(e) = report::write(&cfg, &rep) {
                eprintln!("error: writing {}: {e}", cfg.out.display());
                return ExitCode::from(1);
            }
            println!("{}", rep.summary);
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(m)) => {
            eprintln!("error: invalid input: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: numerical failure: {m}");
            ExitCode::from(1)
        }
    }
}
