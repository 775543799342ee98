use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qfidelity::teleport::Preprocessing;
use qfidelity_cli::commands::{cmd_analyze, cmd_bloch_image, cmd_family, cmd_fstar, cmd_normal_form, cmd_random};
use qfidelity_cli::error::{CliError, CliResult, EXIT_OK};
use qfidelity_cli::statefile::read_state;
use qfidelity_cli::verify::{self, VerifyOptions, DEFAULT_STATES};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qfidelity", version, about = "Singlet fraction, filtering and teleportation for two-qubit states")]
struct Cli {
    /// Tolerance used when validating input state files.
    #[arg(long, global = true, default_value_t = 1e-10)]
    validation_tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lu,
    Locc,
    Slocc,
}

impl From<Mode> for Preprocessing {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Lu => Preprocessing::Lu,
            Mode::Locc => Preprocessing::Locc,
            Mode::Slocc => Preprocessing::Slocc,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Singlet fraction, concurrence, negativity and teleportation fidelity.
    Analyze { input: PathBuf },

    /// Optimal fidelity under trace-preserving LOCC, with filter and dual certificate.
    Fstar {
        input: PathBuf,
        #[arg(long, default_value_t = qfidelity::fstar::DEFAULT_TOL)]
        tol: f64,
    },

    /// Bell-diagonal normal form under local filtering.
    NormalForm {
        input: PathBuf,
        #[arg(long, default_value_t = qfidelity::normal_form::DEFAULT_TOL)]
        tol: f64,
    },

    /// Image of the Bloch sphere under the teleportation channel, as CSV.
    BlochImage {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "lu")]
        mode: Mode,
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; the summary goes next to it with a .json extension.
        #[arg(long)]
        out: PathBuf,
    },

    /// Hilbert–Schmidt random states written as state files.
    Random {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
        rank: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },

    /// The family F|ψ+⟩⟨ψ+| + (1−F)|01⟩⟨01| and its closed-form optimum.
    Family {
        f: f64,
        /// Also write the state to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Run the property suites on seeded random states.
    Verify {
        #[arg(short, long = "n-states", default_value_t = DEFAULT_STATES)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_transpose_bug: bool,
    },
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn run(cli: Cli) -> CliResult<()> {
    let vtol = cli.validation_tol;
    match cli.command {
        Command::Analyze { input } => print_json(&cmd_analyze(&read_state(&input, vtol)?)?),
        Command::Fstar { input, tol } => print_json(&cmd_fstar(&read_state(&input, vtol)?, tol)?),
        Command::NormalForm { input, tol } => print_json(&cmd_normal_form(&read_state(&input, vtol)?, tol)?),
        Command::BlochImage { input, mode, n, seed, out } => {
            print_json(&cmd_bloch_image(&read_state(&input, vtol)?, mode.into(), n, seed, &out)?)
        }
        Command::Random { count, rank, seed, out } => print_json(&cmd_random(count, rank.into(), seed, &out)?),
        Command::Family { f, out } => print_json(&cmd_family(f, out.as_deref())?),
        Command::Verify { n, seed, inject_transpose_bug } => {
            let report = verify::run(VerifyOptions {
                n_states: n,
                seed,
                inject_transpose_bug,
            });
            print_json(&report);
            if !report.passed {
                return Err(CliError::VerifyFailed(report.failed_suites().join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
