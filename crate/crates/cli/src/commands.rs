//! Subcommand implementations. Each stage writes its artifacts next to each
//! other in the output directory so the next stage (or a rerun) can pick
//! them up from disk; the pipeline command is exactly the three stages
//! chained through those files.

use crate::config::RunConfig;
use crate::io::{self, KinematicsRecord, Provenance, SignalSidecar, SummaryRecord, TrajectorySidecar};
use nanorod_core::analysis::{
    extract_kinematics, fit_envelope, instantaneous_rotation_rate, reconstruct_axial_trajectory,
    rotation_average,
};
use nanorod_core::dynamics::{simulate, SimulationError, Trajectory};
use nanorod_core::scattering::{synthesize_signal, SignalTrace};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum AppError {
    /// Bad invocation or configuration: exit status 2.
    Usage(String),
    /// Failure while running: exit status 1.
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) | AppError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for AppError {}

fn sim_error(e: SimulationError) -> AppError {
    match e {
        SimulationError::IntegrationBlowup { .. } | SimulationError::TrajectoryTooShort => {
            AppError::Runtime(e.to_string())
        }
        other => AppError::Usage(other.to_string()),
    }
}

pub fn load_run_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::parse(&text)
        .map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir)
        .map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |e| AppError::Runtime(format!("cannot write {}: {e}", path.display()))
}

/// Simulate one config into `out/`: trajectory.csv, trajectory.json,
/// summary.json. Returns the summary for callers that aggregate.
pub fn simulate_to_dir(config: &RunConfig, out: &Path) -> Result<SummaryRecord, AppError> {
    ensure_dir(out)?;
    let spec = config
        .to_transit_spec()
        .map_err(|e| AppError::Usage(e.to_string()))?;
    let sim_config = spec.build().map_err(sim_error)?;
    let traj = simulate(&sim_config).map_err(sim_error)?;
    let summary = nanorod_core::dynamics::transit_summary(&traj).map_err(sim_error)?;

    let provenance = Provenance::of(config);
    let record = SummaryRecord::from_summary(&summary, provenance.clone());

    let csv = out.join("trajectory.csv");
    io::write_trajectory_csv(&csv, &traj).map_err(write_err(&csv))?;
    let sidecar_path = out.join("trajectory.json");
    let sidecar = TrajectorySidecar {
        config_text: config.serialize(),
        dt: sim_config.dt,
        t_start: sim_config.t_start,
        t_end: sim_config.t_end,
        provenance: provenance.clone(),
    };
    io::write_json(&sidecar_path, &sidecar).map_err(write_err(&sidecar_path))?;
    let summary_path = out.join("summary.json");
    io::write_json(&summary_path, &record).map_err(write_err(&summary_path))?;
    Ok(record)
}

pub fn cmd_simulate(
    config_path: &Path,
    out: &Path,
    dt: Option<f64>,
    seed: Option<u64>,
) -> Result<(), AppError> {
    let mut config = load_run_config(config_path)?;
    if let Some(dt) = dt {
        config.dt = Some(dt);
    }
    if let Some(seed) = seed {
        config.seed = Some(seed);
    }
    let record = simulate_to_dir(&config, out)?;
    println!(
        "simulate: v_z {} -> {} m/s (ratio {}), f_rot {} -> {} Hz (ratio {}), channelled = {}, hops = {}",
        io::sig4(record.v_z_in),
        io::sig4(record.v_z_out),
        io::sig4(record.v_z_ratio),
        io::sig4(record.f_rot_in),
        io::sig4(record.f_rot_out),
        io::sig4(record.f_rot_ratio),
        record.channelled,
        record.antinode_hops,
    );
    if let Some(f) = record.trap_frequency {
        println!("simulate: trap frequency {} Hz", io::sig4(f));
    }
    Ok(())
}

fn sidecar_path_for(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Load a trajectory written by `simulate`: CSV rows plus the sidecar that
/// restores the configuration, re-validated against the row grid.
pub fn load_trajectory(csv: &Path) -> Result<(Trajectory, RunConfig), AppError> {
    let states = io::read_trajectory_csv(csv).map_err(AppError::Usage)?;
    let sidecar_file = sidecar_path_for(csv);
    let text = fs::read_to_string(&sidecar_file).map_err(|e| {
        AppError::Usage(format!("cannot read sidecar {}: {e}", sidecar_file.display()))
    })?;
    let sidecar: TrajectorySidecar = serde_json::from_str(&text).map_err(|e| {
        AppError::Usage(format!("{}: invalid sidecar: {e}", sidecar_file.display()))
    })?;
    let run_config = RunConfig::parse(&sidecar.config_text)
        .map_err(|e| AppError::Runtime(format!("sidecar config does not parse: {e}")))?;
    let spec = run_config
        .to_transit_spec()
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    let mut sim_config = spec.build().map_err(sim_error)?;
    sim_config.dt = sidecar.dt;
    sim_config.t_start = sidecar.t_start;
    sim_config.t_end = sidecar.t_end;

    let expect_rows =
        (((sidecar.t_end - sidecar.t_start) / sidecar.dt).round() as usize) + 1;
    let grid_ok = states.len() == expect_rows
        && (states[0].t - sidecar.t_start).abs() <= 1e-6 * sidecar.dt
        && (states[states.len() - 1].t - sidecar.t_end).abs() <= 1e-6 * sidecar.dt;
    if !grid_ok {
        return Err(AppError::Usage(format!(
            "{}: rows do not match the sidecar grid",
            csv.display()
        )));
    }
    Ok((
        Trajectory {
            config: sim_config,
            states,
        },
        run_config,
    ))
}

pub fn cmd_synth(
    trajectory_csv: &Path,
    out: &Path,
    sample_rate: Option<f64>,
    y_offset: Option<f64>,
) -> Result<(), AppError> {
    ensure_dir(out)?;
    let (traj, run_config) = load_trajectory(trajectory_csv)?;
    let fs_hz = sample_rate.unwrap_or(run_config.sample_rate);
    let y = y_offset.unwrap_or(run_config.y_offset);
    let trace = synthesize_signal(&traj, fs_hz, y)
        .map_err(|e| AppError::Usage(e.to_string()))?;

    let csv = out.join("signal.csv");
    io::write_signal_csv(&csv, &trace).map_err(write_err(&csv))?;
    let sidecar_path = out.join("signal.json");
    let sidecar = SignalSidecar {
        sample_rate: trace.sample_rate,
        t0: trace.t0,
        config_text: run_config.serialize(),
        provenance: Provenance::of(&run_config),
    };
    io::write_json(&sidecar_path, &sidecar).map_err(write_err(&sidecar_path))?;
    println!(
        "synth: {} samples at {} Hz",
        trace.len(),
        io::sig4(trace.sample_rate)
    );
    Ok(())
}

/// Load a signal trace and the run config preserved in its sidecar.
pub fn load_signal(csv: &Path) -> Result<(SignalTrace, RunConfig), AppError> {
    let trace = io::read_signal_csv(csv).map_err(AppError::Usage)?;
    let sidecar_file = sidecar_path_for(csv);
    let text = fs::read_to_string(&sidecar_file).map_err(|e| {
        AppError::Usage(format!("cannot read sidecar {}: {e}", sidecar_file.display()))
    })?;
    let sidecar: SignalSidecar = serde_json::from_str(&text).map_err(|e| {
        AppError::Usage(format!("{}: invalid sidecar: {e}", sidecar_file.display()))
    })?;
    let run_config = RunConfig::parse(&sidecar.config_text)
        .map_err(|e| AppError::Runtime(format!("sidecar config does not parse: {e}")))?;
    Ok((trace, run_config))
}

pub fn cmd_analyze(
    signal_csv: &Path,
    out: &Path,
    min_prominence: Option<f64>,
) -> Result<(), AppError> {
    ensure_dir(out)?;
    let (trace, run_config) = load_signal(signal_csv)?;
    let cavity = nanorod_core::optics::CavityParams::new(
        run_config.wavelength,
        run_config.waist,
        run_config.field_amplitude,
    )
    .map_err(|e| AppError::Usage(e.to_string()))?;
    let prominence = min_prominence.unwrap_or(run_config.min_prominence);

    let mut warnings: Vec<String> = Vec::new();
    let estimate = extract_kinematics(&trace, &cavity)
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    if estimate.v_z.is_none() {
        warnings.push("no translation line found: v_z absent".into());
    }
    if estimate.f_rot.is_none() {
        warnings.push("no rotation line found: f_rot absent".into());
    }
    if estimate.v_x.is_none() {
        warnings.push("envelope fit failed: v_x absent".into());
    }

    // Rotation-averaged trace for the trajectory reconstruction; without a
    // rotation line the raw trace already carries the slow modulation.
    let averaged = match estimate.f_rot {
        Some(f_rot) => match rotation_average(&trace, f_rot.value) {
            Ok(avg) => avg,
            Err(e) => {
                warnings.push(format!("rotation averaging failed: {e}"));
                trace.clone()
            }
        },
        None => trace.clone(),
    };
    match fit_envelope(&trace, &cavity) {
        Ok(fit) => match reconstruct_axial_trajectory(&averaged, &fit, &cavity) {
            Ok(rec) => {
                if rec.model_mismatch {
                    warnings.push(
                        "reconstruction: normalized modulation repeatedly left [-0.05, 1.05]; \
                         cos²(kz)·envelope model may not describe this trace"
                            .into(),
                    );
                }
                let path = out.join("reconstruction.csv");
                io::write_reconstruction_csv(&path, &rec).map_err(write_err(&path))?;
            }
            Err(e) => warnings.push(format!("reconstruction skipped: {e}")),
        },
        Err(e) => warnings.push(format!("reconstruction skipped (no envelope fit): {e}")),
    }

    match instantaneous_rotation_rate(&trace, prominence) {
        Ok(series) => {
            let path = out.join("rates.csv");
            io::write_rates_csv(&path, &series).map_err(write_err(&path))?;
        }
        Err(e) => warnings.push(format!("rate tracking skipped: {e}")),
    }

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let record =
        KinematicsRecord::from_estimate(&estimate, warnings, Provenance::of(&run_config));
    let path = out.join("kinematics.json");
    io::write_json(&path, &record).map_err(write_err(&path))?;

    let show = |name: &str, m: Option<io::MeasurementRecord>| match m {
        Some(m) => println!("analyze: {name} = {} ± {}", io::sig4(m.value), io::sig4(m.sigma)),
        None => println!("analyze: {name} absent"),
    };
    show("v_x [m/s]", record.v_x.clone());
    show("v_z [m/s]", record.v_z.clone());
    show("f_rot [Hz]", record.f_rot.clone());
    Ok(())
}

pub fn cmd_pipeline(
    config_path: &Path,
    out: &Path,
    dt: Option<f64>,
    sample_rate: Option<f64>,
    seed: Option<u64>,
) -> Result<(), AppError> {
    cmd_simulate(config_path, out, dt, seed)?;
    cmd_synth(&out.join("trajectory.csv"), out, sample_rate, None)?;
    cmd_analyze(&out.join("signal.csv"), out, None)
}
