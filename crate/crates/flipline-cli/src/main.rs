use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use flipline_cli::{configure_threads, parse_with, run, write_outputs, CliError, Command, FigureId, Overrides};

#[derive(Debug, Parser)]
#[command(name = "flipline", version, about = "Phase-flip rates of a quantum parametric oscillator")]
struct Args {
    /// What to compute
    #[arg(value_enum)]
    command: Command,
    /// Figure to draw (figure command only)
    #[arg(value_enum)]
    figure: Option<FigureId>,
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long = "alpha-d", allow_hyphen_values = true)]
    alpha_d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(args: Args) -> Result<Vec<PathBuf>, CliError> {
    configure_threads(std::env::var("FLIPLINE_THREADS").ok().as_deref())?;
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => "{}".to_string(),
    };
    let ov = Overrides {
        command: Some(args.command),
        figure_id: args.figure,
        mu: args.mu,
        alpha_d: args.alpha_d,
        lambda: args.lambda,
        kappa: args.kappa,
        out: args.out,
    };
    let cfg = parse_with(&text, &ov)?;
    let outputs = run(&cfg)?;
    write_outputs(&cfg.output_dir, &outputs)
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
