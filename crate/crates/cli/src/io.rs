//! File formats: CSV for time series (17 significant digits, lossless for
//! f64) and JSON records with provenance for everything else.

use crate::config::RunConfig;
use nanorod_core::analysis::{AxialReconstruction, KinematicsEstimate, RotationRateSeries};
use nanorod_core::dynamics::{RodState, Trajectory, TransitSummary};
use nanorod_core::scattering::SignalTrace;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hash of the canonical config serialization; stable under reformatting of
/// the input file.
pub fn config_hash(config: &RunConfig) -> String {
    let digest = Sha256::digest(config.serialize().as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub config_sha256: String,
    pub tool_version: String,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        Provenance {
            config_sha256: config_hash(config),
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

fn full(v: f64) -> String {
    // 17 significant digits: lossless round trip for f64.
    format!("{v:.16e}")
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> std::io::Result<()> {
    let mut out = String::with_capacity(traj.states.len() * 96);
    out.push_str("t,z,z_dot,phi,phi_dot,envelope\n");
    for s in &traj.states {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            full(s.t),
            full(s.z),
            full(s.z_dot),
            full(s.phi),
            full(s.phi_dot),
            full(traj.envelope_at(s.t))
        );
    }
    fs::write(path, out)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<RodState>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t,z,z_dot,phi,phi_dot,envelope" => {}
        _ => return Err(format!("{}: missing trajectory header", path.display())),
    }
    let mut states = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(format!("{}:{}: expected 6 columns", path.display(), i + 1));
        }
        let mut values = [0.0f64; 6];
        for (j, field) in fields.iter().enumerate() {
            values[j] = field
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("{}:{}: bad number `{field}`", path.display(), i + 1))?;
        }
        states.push(RodState {
            t: values[0],
            z: values[1],
            z_dot: values[2],
            phi: values[3],
            phi_dot: values[4],
        });
    }
    if states.len() < 2 {
        return Err(format!("{}: trajectory needs at least 2 rows", path.display()));
    }
    Ok(states)
}

/// Sidecar carrying everything needed to continue the pipeline from a CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectorySidecar {
    pub config_text: String,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalSidecar {
    pub sample_rate: f64,
    pub t0: f64,
    pub config_text: String,
    pub provenance: Provenance,
}

pub fn write_signal_csv(path: &Path, trace: &SignalTrace) -> std::io::Result<()> {
    let mut out = String::with_capacity(trace.len() * 48);
    out.push_str("t,s_n\n");
    for (i, &s) in trace.samples.iter().enumerate() {
        let _ = writeln!(out, "{},{}", full(trace.time_at(i)), full(s));
    }
    fs::write(path, out)
}

/// Read a `t,s_n` trace; the sample rate is recovered from the (verified
/// uniform) time spacing.
pub fn read_signal_csv(path: &Path) -> Result<SignalTrace, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t,s_n" => {}
        _ => return Err(format!("{}: missing `t,s_n` header", path.display())),
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let Some((t, s)) = line.split_once(',') else {
            return Err(format!("{}:{}: expected 2 columns", path.display(), i + 1));
        };
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("{}:{}: bad number `{v}`", path.display(), i + 1))
        };
        times.push(parse(t)?);
        samples.push(parse(s)?);
    }
    if samples.len() < 2 {
        return Err(format!("{}: signal needs at least 2 rows", path.display()));
    }
    let n = times.len();
    let span = times[n - 1] - times[0];
    if !(span > 0.0) {
        return Err(format!("{}: time stamps must increase", path.display()));
    }
    let dt = span / (n - 1) as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(format!("{}: time spacing is not uniform", path.display()));
        }
    }
    Ok(SignalTrace {
        sample_rate: 1.0 / dt,
        t0: times[0],
        samples,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinematicsRecord {
    pub v_x: Option<MeasurementRecord>,
    pub v_z: Option<MeasurementRecord>,
    pub f_rot: Option<MeasurementRecord>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl KinematicsRecord {
    pub fn from_estimate(
        est: &KinematicsEstimate,
        warnings: Vec<String>,
        provenance: Provenance,
    ) -> Self {
        let conv = |m: Option<nanorod_core::analysis::Measurement>| {
            m.map(|m| MeasurementRecord {
                value: m.value,
                sigma: m.sigma,
            })
        };
        KinematicsRecord {
            v_x: conv(est.v_x),
            v_z: conv(est.v_z),
            f_rot: conv(est.f_rot),
            warnings,
            provenance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub v_z_in: f64,
    pub v_z_out: f64,
    pub f_rot_in: f64,
    pub f_rot_out: f64,
    pub v_z_ratio: f64,
    pub f_rot_ratio: f64,
    pub channelled: bool,
    pub antinode_hops: u32,
    pub trap_frequency: Option<f64>,
    pub provenance: Provenance,
}

impl SummaryRecord {
    pub fn from_summary(s: &TransitSummary, provenance: Provenance) -> Self {
        SummaryRecord {
            v_z_in: s.v_z_in,
            v_z_out: s.v_z_out,
            f_rot_in: s.f_rot_in,
            f_rot_out: s.f_rot_out,
            v_z_ratio: s.v_z_out / s.v_z_in,
            f_rot_ratio: s.f_rot_out / s.f_rot_in,
            channelled: s.channelled,
            antinode_hops: s.antinode_hops,
            trap_frequency: s.trap_frequency,
            provenance,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable record");
    text.push('\n');
    fs::write(path, text)
}

pub fn write_reconstruction_csv(path: &Path, rec: &AxialReconstruction) -> std::io::Result<()> {
    let mut out = String::with_capacity(rec.times.len() * 48);
    out.push_str("t,z\n");
    for (t, z) in rec.times.iter().zip(&rec.z) {
        let _ = writeln!(out, "{},{}", full(*t), full(*z));
    }
    fs::write(path, out)
}

pub fn write_rates_csv(path: &Path, series: &RotationRateSeries) -> std::io::Result<()> {
    let mut out = String::with_capacity(series.times.len() * 48);
    out.push_str("t,f_rot\n");
    for (t, f) in series.times.iter().zip(&series.rates) {
        let _ = writeln!(out, "{},{}", full(*t), full(*f));
    }
    fs::write(path, out)
}

/// Format with 4 significant digits for console reporting.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-3..=5).contains(&exponent) {
        let decimals = (3 - exponent).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.3e}")
    }
}
