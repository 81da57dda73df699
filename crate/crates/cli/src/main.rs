//! `oscimin`: compute the sharp constant of the inequality
//! `int u''^2 - int u'' u^2 >= I int u^4` by shooting, tabulate both
//! quotient schemes, emit the minimizer, and verify the result.
//!
//! Exit codes: 0 when every requested check passed, 1 when a check failed,
//! 2 on usage, file, or solver errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use oscimin_core::IntegratorConfig;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "oscimin", version, about)]
struct Cli {
    /// Relative integration tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    rel_tol: f64,

    /// Absolute integration tolerance
    #[arg(long, global = true, default_value_t = 1e-12)]
    abs_tol: f64,

    /// Integration horizon
    #[arg(long, global = true, default_value_t = 50.0)]
    x_max: f64,

    /// Amplitude at which a trajectory counts as blown up
    #[arg(long, global = true, default_value_t = 1e8)]
    blowup_threshold: f64,

    /// Bracket width at which the root solve stops
    #[arg(long, global = true, default_value_t = 1e-6)]
    root_tol: f64,

    /// Multiplier bracket for the root solve
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"],
          default_values_t = [0.141, 0.249])]
    bracket: Vec<f64>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the sharp constant and check it against every oracle
    FindInfimum,
    /// Tabulate both quotient schemes across a multiplier range
    Sweep {
        /// First multiplier
        #[arg(long, default_value_t = 0.142)]
        from: f64,
        /// Last multiplier (inclusive)
        #[arg(long, default_value_t = 0.248)]
        to: f64,
        /// Multiplier increment
        #[arg(long, default_value_t = 0.002)]
        step: f64,
    },
    /// Emit the minimizer over one full period
    Profile {
        /// Number of samples across [-T, T]
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
    /// Run the full verification suite
    Verify,
    /// Evaluate the quotient on a CSV file of (x, u) samples
    Q {
        /// Input file; the first two columns are read as x and u
        file: PathBuf,
        /// Use periodic difference stencils
        #[arg(long)]
        periodic: bool,
    },
}

/// Everything a subcommand needs beyond its own flags.
pub struct RunConfig {
    pub integrator: IntegratorConfig,
    pub root_tol: f64,
    pub bracket: (f64, f64),
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let integrator = IntegratorConfig {
        rel_tol: cli.rel_tol,
        abs_tol: cli.abs_tol,
        x_max: cli.x_max,
        blowup_threshold: cli.blowup_threshold,
        ..IntegratorConfig::default()
    };
    integrator.validate()?;
    if !(cli.root_tol.is_finite() && cli.root_tol > 0.0) {
        bail!("root tolerance must be positive, got {}", cli.root_tol);
    }
    let (lo, hi) = (cli.bracket[0], cli.bracket[1]);
    if !(lo < hi) {
        bail!("bracket must satisfy LO < HI, got {lo} {hi}");
    }
    Ok(RunConfig {
        integrator,
        root_tol: cli.root_tol,
        bracket: (lo, hi),
        format: cli.format,
        out: cli.out.clone(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = run_config(&cli).and_then(|cfg| match cli.command {
        Command::FindInfimum => commands::find_infimum(&cfg),
        Command::Sweep { from, to, step } => commands::sweep(&cfg, from, to, step),
        Command::Profile { samples } => commands::profile(&cfg, samples),
        Command::Verify => commands::verify(&cfg),
        Command::Q { ref file, periodic } => commands::quotient(&cfg, file, periodic),
    });
    match run {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
