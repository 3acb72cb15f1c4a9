//! `qcc`: run weak-value scenarios, verify interferometer circuits and sweep
//! pointer couplings from the command line.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or parse error,
//! 3 numeric failure (null post-selection, pointer off the grid).

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use render::Format;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "qcc",
    version,
    about = "Weak-value and interferometer circuit simulator"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    pub format: Format,

    /// Comparison tolerance for weak values and fidelities.
    #[arg(long, env = "QCC_TOLERANCE", default_value_t = DEFAULT_TOLERANCE, global = true, value_parser = parse_tolerance)]
    pub tolerance: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in scenarios.
    ScenarioList,

    /// Compute a scenario's weak-value table and check it against the expected values.
    ScenarioRun {
        /// original_cheshire, two_property_three_path, n_path, qutrit_two_property or qudit.
        name: String,
        /// Number of paths for n_path.
        #[arg(long)]
        n: Option<usize>,
        /// Qudit dimension for qudit.
        #[arg(long)]
        d: Option<usize>,
    },

    /// Parse and run a circuit file; optionally compare with a reference state.
    ///
    /// With an `input` line the circuit output is compared to --expect.
    /// Without one, --expect is the target of the --detector projector.
    /// Shipped fixture names (e.g. photon_prep.qcc) resolve even when no such
    /// file exists in the working directory.
    CircuitVerify {
        file: PathBuf,
        /// Reference state: eq28, eq33, eq35 or eq36.
        #[arg(long)]
        expect: Option<String>,
        /// Detector whose effective post-selection projector is reported.
        #[arg(long)]
        detector: Option<String>,
    },

    /// Pointer readout error against the exact weak value over several couplings.
    PointerSweep {
        /// Scenario name, as for scenario-run.
        scenario: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Observable label (ASCII aliases Pi and s accepted); all rows when omitted.
        #[arg(long)]
        observable: Option<String>,
        /// Couplings in units of sigma, strictly descending.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025])]
        g: Vec<f64>,
        /// Pointer width.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },

    /// Prepare with one circuit, post-select with another, read the weak value off the pointer.
    EndToEnd {
        /// Preparation circuit (needs an `input` line).
        #[arg(long)]
        prep: PathBuf,
        /// Post-selection circuit.
        #[arg(long)]
        postsel: PathBuf,
        #[arg(long, default_value = "D3")]
        detector: String,
        /// `Pi<k>`, `Pi<k>sx^<factor>` (also written with Π and σ) or `identity`;
        /// the factor is a name (pol, oam, spin, energy) or a property number from 1.
        #[arg(long)]
        observable: String,
        /// Coupling in units of sigma.
        #[arg(long, default_value_t = 0.01)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Print the conditional pointer density as `x,density` CSV instead of the record.
        #[arg(long)]
        density: bool,
    },
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(format!("tolerance must be positive and finite, got {s}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("qcc: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
