use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::Format;

#[derive(Parser, Debug)]
#[command(name = "resonance", version, about = "Resonator constructions and large values of zeta")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Append a JSON line describing the run to this file.
    #[arg(long, global = true)]
    run_log: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a resonator set and write it as JSON.
    Construct(commands::ConstructArgs),
    /// Resonance ratio of a Gál set or a saved set.
    Ratio(commands::RatioArgs),
    /// Moment certificate with a scanned witness.
    Certify(commands::CertifyArgs),
    /// Maximise |zeta| or |D_M| over an interval.
    Scan(commands::ScanArgs),
    /// Asymptotic predictions as a table.
    Bounds(commands::BoundsArgs),
    /// Run the gate suite.
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = commands::Context::new(&cli.global).and_then(|ctx| match cli.command {
        Command::Construct(a) => commands::construct(&ctx, a),
        Command::Ratio(a) => commands::ratio(&ctx, a),
        Command::Certify(a) => commands::certify(&ctx, a),
        Command::Scan(a) => commands::scan(&ctx, a),
        Command::Bounds(a) => commands::bounds(&ctx, a),
        Command::Verify(a) => commands::verify(&ctx, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
