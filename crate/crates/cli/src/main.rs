use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wpc_lab::{execute, RunRequest};

/// Seeded experiments over wirelessly powered communication models.
///
/// Every subcommand writes `<out>/<experiment>.csv`: `#`-prefixed metadata
/// (tool, resolved parameters, wall clock), a header row, then data rows that
/// are byte-identical across runs with the same configuration and seed.
#[derive(Parser)]
#[command(name = "wpc-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multisine DC gain over a single carrier at a diode harvester.
    Waveform(RunArgs),
    /// Near-far separation of a strong power signal from weak data streams.
    Decouple(RunArgs),
    /// Energy-rate frontier of a duty-cycled passive reflector.
    Backscatter(RunArgs),
    /// Retrodirective beamforming gain audited against random weights.
    Retro(RunArgs),
    /// Hotspot decay and cross-user leakage of a dense spherical array.
    UaHotspot(RunArgs),
    /// Blind mobile localization from array observation profiles.
    UaLocate(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Waveform(_) => "waveform",
            Command::Decouple(_) => "decouple",
            Command::Backscatter(_) => "backscatter",
            Command::Retro(_) => "retro",
            Command::UaHotspot(_) => "ua-hotspot",
            Command::UaLocate(_) => "ua-locate",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Waveform(a)
            | Command::Decouple(a)
            | Command::Backscatter(a)
            | Command::Retro(a)
            | Command::UaHotspot(a)
            | Command::UaLocate(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines; `#` starts a comment.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed for every random stream in the run.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Directory receiving the result CSV.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Monte Carlo trial count, for experiments that define `trials`.
    #[arg(long, value_name = "N")]
    trials: Option<u64>,

    /// Override one parameter as KEY=VALUE; may be repeated.
    #[arg(long, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();
    let request = RunRequest {
        config: args.config.clone(),
        seed: args.seed,
        out: args.out.clone(),
        trials: args.trials,
        set: args.set.clone(),
    };
    match execute(cli.command.name(), &request) {
        Ok(report) => {
            println!(
                "{}: wrote {} ({} rows)",
                report.experiment,
                report.path.display(),
                report.rows
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("wpc-lab: {err}");
            err.exit_code()
        }
    }
}
