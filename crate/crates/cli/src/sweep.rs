//! Batch sweeps: a base config plus value lists on dotted parameter paths,
//! run over a bounded worker pool into one manifest.

use crate::commands::{simulate_to_dir, AppError};
use crate::config::RunConfig;
use crate::io::{self, SummaryRecord};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: RunConfig,
    /// Axes in file order; values kept verbatim so overrides parse exactly
    /// like hand-written configs.
    pub axes: Vec<(String, Vec<String>)>,
    pub cap: usize,
}

impl SweepSpec {
    pub fn total_runs(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product::<usize>().max(1)
    }
}

/// Parse a sweep file:
///
/// ```text
/// base = s2.cfg
/// cap = 10000
/// sweep.cavity.field_amplitude = 2e6, 4e6, 6e6, 8e6
/// ```
pub fn parse_sweep_spec(path: &Path) -> Result<SweepSpec, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read sweep spec {}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut base: Option<RunConfig> = None;
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    let mut cap = DEFAULT_CAP;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(AppError::Usage(format!(
                "{}:{line_no}: expected `key = value`",
                path.display()
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "base" {
            let base_path = dir.join(value);
            base = Some(crate::commands::load_run_config(&base_path)?);
        } else if key == "cap" {
            cap = value.parse().map_err(|_| {
                AppError::Usage(format!("{}:{line_no}: cap must be an integer", path.display()))
            })?;
        } else if let Some(param) = key.strip_prefix("sweep.") {
            if axes.iter().any(|(p, _)| p == param) {
                return Err(AppError::Usage(format!(
                    "{}:{line_no}: duplicate sweep axis `{param}`",
                    path.display()
                )));
            }
            let values: Vec<String> = value
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(AppError::Usage(format!(
                    "{}:{line_no}: axis `{param}` has no values",
                    path.display()
                )));
            }
            axes.push((param.to_string(), values));
        } else {
            return Err(AppError::Usage(format!(
                "{}:{line_no}: unknown key `{key}`",
                path.display()
            )));
        }
    }

    let base = base.ok_or_else(|| {
        AppError::Usage(format!("{}: missing `base = <config path>`", path.display()))
    })?;
    Ok(SweepSpec { base, axes, cap })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisRecord {
    pub path: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamRecord {
    pub path: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub dir: String,
    pub params: Vec<ParamRecord>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channelled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antinode_hops: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trap_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_z_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_rot_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub base_config_sha256: String,
    pub tool_version: String,
    pub axes: Vec<AxisRecord>,
    pub runs: Vec<RunRecord>,
}

/// Parameter assignments of combination `index` in row-major order (last
/// axis fastest).
fn combination(spec: &SweepSpec, index: usize) -> Vec<(String, String)> {
    let mut out = Vec::with_capacity(spec.axes.len());
    let mut rem = index;
    for (path, values) in spec.axes.iter().rev() {
        let v = rem % values.len();
        rem /= values.len();
        out.push((path.clone(), values[v].clone()));
    }
    out.reverse();
    out
}

fn run_one(spec: &SweepSpec, index: usize, out_root: &Path) -> RunRecord {
    let params = combination(spec, index);
    let dir_rel = format!("runs/{index:04}");
    let dir = out_root.join(&dir_rel);
    let mut record = RunRecord {
        index,
        dir: dir_rel,
        params: params
            .iter()
            .map(|(path, value)| ParamRecord {
                path: path.clone(),
                value: value.clone(),
            })
            .collect(),
        status: "ok".into(),
        error: None,
        channelled: None,
        antinode_hops: None,
        trap_frequency: None,
        v_z_ratio: None,
        f_rot_ratio: None,
    };

    let mut config = spec.base.clone();
    for (path, value) in &params {
        if let Err(e) = config.set_key(path, value) {
            record.status = "error".into();
            record.error = Some(e.to_string());
            return record;
        }
    }
    match simulate_to_dir(&config, &dir) {
        Ok(summary) => {
            let SummaryRecord {
                channelled,
                antinode_hops,
                trap_frequency,
                v_z_ratio,
                f_rot_ratio,
                ..
            } = summary;
            record.channelled = Some(channelled);
            record.antinode_hops = Some(antinode_hops);
            record.trap_frequency = trap_frequency;
            record.v_z_ratio = Some(v_z_ratio);
            record.f_rot_ratio = Some(f_rot_ratio);
        }
        Err(e) => {
            record.status = "error".into();
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Run every combination over `jobs` workers; the manifest lists each run
/// exactly once, in combination order, independent of scheduling.
pub fn run_sweep(spec: &SweepSpec, out_root: &Path, jobs: Option<usize>) -> Result<PathBuf, AppError> {
    let total = spec.total_runs();
    if total > spec.cap {
        return Err(AppError::Usage(format!(
            "sweep would launch {total} runs, above the cap of {}",
            spec.cap
        )));
    }
    fs::create_dir_all(out_root)
        .map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", out_root.display())))?;

    let jobs = jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let cursor = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; total]);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(total) {
            scope.spawn(|| loop {
                let index = cursor.fetch_add(1, Ordering::Relaxed);
                if index >= total {
                    break;
                }
                let record = run_one(spec, index, out_root);
                slots.lock().unwrap()[index] = Some(record);
            });
        }
    });

    let runs: Vec<RunRecord> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every combination produced a record"))
        .collect();
    let failures = runs.iter().filter(|r| r.status == "error").count();
    let manifest = Manifest {
        base_config_sha256: io::config_hash(&spec.base),
        tool_version: io::TOOL_VERSION.to_string(),
        axes: spec
            .axes
            .iter()
            .map(|(path, values)| AxisRecord {
                path: path.clone(),
                values: values.clone(),
            })
            .collect(),
        runs,
    };
    let path = out_root.join("manifest.json");
    io::write_json(&path, &manifest)
        .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    println!("sweep: {total} runs ({failures} failed), manifest at {}", path.display());
    Ok(path)
}
