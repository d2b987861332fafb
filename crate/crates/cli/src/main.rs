//! `qrng`: simulate the entangled-photon bit source, extract and unbias
//! bits, and run the randomness suite.

mod commands;
mod error;
mod manifest;
mod physics;

use clap::{Parser, Subcommand};
use commands::{ber, generate, replay, scan, test, unbias};
use error::CliResult;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qrng", version, about = "Simulated two-photon quantum random number generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coincidence rates versus interferometer delay, with a dip fit.
    ScanDelay(scan::ScanArgs),
    /// Bit error rate versus counting clock frequency.
    BerScan(ber::BerArgs),
    /// Generate random bits with inline purity monitoring.
    Generate(generate::GenerateArgs),
    /// Von Neumann unbiasing of a bit file.
    Unbias(unbias::UnbiasArgs),
    /// Run the randomness test suite on a bit file.
    Test(test::TestArgs),
    /// Re-run a manifest and compare output digests.
    Replay(replay::ReplayArgs),
}

fn dispatch(command: Command) -> CliResult<()> {
    let manifest = match command {
        Command::ScanDelay(a) => scan::run(a)?,
        Command::BerScan(a) => ber::run(a)?,
        Command::Generate(a) => generate::run(a)?,
        Command::Unbias(a) => unbias::run(a)?,
        Command::Test(a) => test::run(a)?,
        Command::Replay(a) => return replay::run(a),
    };
    commands::verdict(&manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::from(error::EXIT_OK),
        Err(e) => {
            eprintln!("qrng: {e}");
            e.exit_code()
        }
    }
}
