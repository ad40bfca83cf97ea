use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use panfuse::cli;

#[derive(Parser)]
#[command(name = "panfuse", version, about = "Hyperspectral pan-sharpening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config file's directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Degrade a reference cube into a hyperspectral/panchromatic pair.
    Simulate(Common),
    /// Fuse a hyperspectral/panchromatic pair.
    Sharpen(Common),
    /// Score an estimate.
    Evaluate(Common),
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let result = match &args.command {
        Command::Simulate(c) => cli::cmd_simulate(&c.config, c.out.as_deref()).map(|o| {
            println!("wrote {} and {}", o.x.display(), o.p.display());
        }),
        Command::Sharpen(c) => cli::cmd_sharpen(&c.config, c.out.as_deref()).map(|o| {
            let last = o.report.last();
            println!(
                "{} iterations, relative primal residual {:.3e}; wrote {}",
                o.report.iterations,
                last.map_or(0.0, |r| r.relative_primal),
                o.estimate.display()
            );
        }),
        Command::Evaluate(c) => cli::cmd_evaluate(&c.config, c.out.as_deref()).map(|o| {
            print!("{}", o.report.to_text());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("panfuse: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
