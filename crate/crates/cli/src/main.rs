//! `nanorod` — simulate dielectric nanorod transits through a standing-wave
//! cavity field, synthesize the scattered-light signal, and recover the
//! kinematics from the trace.

use clap::{Parser, Subcommand};
use nanorod_cli::{commands, sweep};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nanorod",
    version,
    about = "Nanorod cavity-transit simulation, signal synthesis, and trace analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a transit and write trajectory.csv + summary.json.
    Simulate {
        /// Run configuration (flat key = value file).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the integration step (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Record a seed in the provenance (randomized studies).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the scattering signal along a stored trajectory.
    Synth {
        /// trajectory.csv produced by `simulate` (sidecar expected next to it).
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sampling rate (Hz); defaults to synthesis.sample_rate from the config.
        #[arg(long)]
        sample_rate: Option<f64>,
        /// Detector-side offset y (m); attenuates via the beam profile.
        #[arg(long)]
        y_offset: Option<f64>,
    },
    /// Recover kinematics from a signal trace.
    Analyze {
        /// signal.csv produced by `synth` (sidecar expected next to it).
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Maxima threshold for rate tracking, as a fraction of the peak.
        #[arg(long)]
        min_prominence: Option<f64>,
    },
    /// Run a Cartesian parameter sweep of simulations.
    Sweep {
        /// Sweep description file (base config + axes).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker pool size; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// simulate + synth + analyze in one output directory.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        sample_rate: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), commands::AppError> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            dt,
            seed,
        } => commands::cmd_simulate(&config, &out, dt, seed),
        Command::Synth {
            trajectory,
            out,
            sample_rate,
            y_offset,
        } => commands::cmd_synth(&trajectory, &out, sample_rate, y_offset),
        Command::Analyze {
            signal,
            out,
            min_prominence,
        } => commands::cmd_analyze(&signal, &out, min_prominence),
        Command::Sweep { spec, out, jobs } => {
            let spec = sweep::parse_sweep_spec(&spec)?;
            sweep::run_sweep(&spec, &out, jobs).map(|_| ())
        }
        Command::Pipeline {
            config,
            out,
            dt,
            sample_rate,
            seed,
        } => commands::cmd_pipeline(&config, &out, dt, sample_rate, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
