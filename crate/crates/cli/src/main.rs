//! `bentring`: deflection sweeps, extrema, average reflection angles,
//! reproduction of the proton measurements and oracle checks.
//!
//! Exit codes: 0 success, 1 invalid input, 2 verification or reproduction
//! failure, 3 I/O failure. Failures print one `error: <kind>: <reason>` line
//! on stderr.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Format, ModeArg, SweepArgs};
use input::Input;

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn report(&self) -> String {
        let (kind, msg) = match self {
            Failure::Invalid(m) => ("invalid_input", m),
            Failure::Verification(m) => ("verification_failed", m),
            Failure::Io(m) => ("io", m),
        };
        format!("error: {kind}: {}", msg.replace('\n', " "))
    }
}

impl From<bentring_core::Error> for Failure {
    fn from(e: bentring_core::Error) -> Self {
        use bentring_core::Error;
        match e {
            Error::Quadrature { .. } | Error::Orbiting { .. } => {
                Failure::Verification(e.to_string())
            }
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bentring",
    version,
    about = "Deflection of charged particles by a bent crystal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deflection function on a uniform impact-parameter grid
    Sweep {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0.0)]
        bmin: f64,
        #[arg(long, default_value_t = 1.1)]
        bmax: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Small)]
        mode: ModeArg,
        /// Add the critical impact parameters to the grid
        #[arg(long)]
        refine: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// One-ring extreme half-deflections
    Extrema {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Average volume-reflection angles
    Average {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Recompute the predictions for the proton measurements
    Reproduce {
        /// JSON list of cases replacing the built-in ones
        #[arg(long, value_name = "PATH")]
        cases: Option<PathBuf>,
        /// Machine-readable output; a table is printed otherwise
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compare the closed form against the ray tracer
    OracleCheck {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0.0)]
        bmin: f64,
        #[arg(long, default_value_t = 1.1)]
        bmax: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// `small` reports the small-angle deviation without failing
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Reflection and no-orbiting conditions
    Condition {
        #[command(flatten)]
        input: Input,
        /// Sample points per shell for the orbiting check
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sweep {
            input,
            bmin,
            bmax,
            samples,
            mode,
            refine,
            format,
            out,
        } => {
            let args = SweepArgs {
                b_min: bmin,
                b_max: bmax,
                samples,
                mode,
                refine,
            };
            commands::sweep_cmd(&input, &args, format, out.as_deref())
        }
        Command::Extrema { input, format, out } => {
            commands::extrema_cmd(&input, format, out.as_deref())
        }
        Command::Average { input, format, out } => {
            commands::average_cmd(&input, format, out.as_deref())
        }
        Command::Reproduce { cases, format, out } => {
            commands::reproduce_cmd(cases.as_ref(), format, out.as_deref())
        }
        Command::OracleCheck {
            input,
            bmin,
            bmax,
            samples,
            mode,
            format,
            out,
        } => commands::oracle_check_cmd(&input, bmin, bmax, samples, mode, format, out.as_deref()),
        Command::Condition {
            input,
            samples,
            format,
            out,
        } => commands::condition_cmd(&input, samples, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let line = first
                .lines()
                .next()
                .unwrap_or("bad arguments")
                .trim_start_matches("error: ");
            let failure = Failure::Invalid(line.to_string());
            eprintln!("{}", failure.report());
            return ExitCode::from(failure.code());
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.report());
            ExitCode::from(failure.code())
        }
    }
}
