//! Flat `key = value` run configuration with dotted parameter paths.
//!
//! The format is diff-friendly and sweepable: every parameter is addressable
//! by its path (e.g. `cavity.field_amplitude`), `#` starts a comment, and
//! serialization is canonical so configs round-trip losslessly.

use nanorod_core::dynamics::{ParticleKind, TransitSpec};
use nanorod_core::optics::{CavityParams, Material, RodGeometry};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

/// Axial starting position, kept in the form the config used so the file
/// round-trips exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxialPosition {
    /// `initial.z` in meters.
    Meters(f64),
    /// `initial.kz` in radians of optical phase (z = kz/k).
    Phase(f64),
}

/// Initial rotation, either `initial.phi_dot` (rad/s) or `initial.f_rot` (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialRotation {
    PhiDot(f64),
    FRot(f64),
}

/// One full pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub particle: ParticleKind,
    pub wavelength: f64,
    pub waist: f64,
    pub field_amplitude: f64,
    pub rod_length: f64,
    pub rod_diameter: f64,
    pub epsilon_r: f64,
    pub density: f64,
    pub v_x: f64,
    pub initial_z: AxialPosition,
    pub initial_v_z: f64,
    pub initial_phi: f64,
    pub initial_rotation: InitialRotation,
    /// Time the initial state holds at; absent = window start.
    pub initial_t: Option<f64>,
    pub dt: Option<f64>,
    pub half_span: Option<f64>,
    pub sample_rate: f64,
    pub y_offset: f64,
    pub min_prominence: f64,
    pub output_dir: Option<String>,
    /// Recorded for provenance of randomized study runs; the pipeline itself
    /// is deterministic.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut builder = Builder::default();
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
                return Err(err(Some(line_no), format!("expected `key = value`, got `{line}`")));
            };
            builder.set(key.trim(), value.trim(), Some(line_no))?;
        }
        builder.finish()
    }

    /// Apply a single `path = value` override (sweep axes use this).
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let mut builder = Builder::from_config(self);
        builder.set(key, value, None)?;
        *self = builder.finish()?;
        Ok(())
    }

    /// Canonical serialization; `parse` of the output reproduces the config
    /// exactly (floats print in shortest round-trip form).
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push(
            "particle",
            match self.particle {
                ParticleKind::Rod => "rod".into(),
                ParticleKind::Sphere => "sphere".into(),
            },
        );
        push("cavity.wavelength", fmt_f64(self.wavelength));
        push("cavity.waist", fmt_f64(self.waist));
        push("cavity.field_amplitude", fmt_f64(self.field_amplitude));
        push("rod.length", fmt_f64(self.rod_length));
        push("rod.diameter", fmt_f64(self.rod_diameter));
        push("material.epsilon_r", fmt_f64(self.epsilon_r));
        push("material.density", fmt_f64(self.density));
        push("transit.v_x", fmt_f64(self.v_x));
        match self.initial_z {
            AxialPosition::Meters(z) => push("initial.z", fmt_f64(z)),
            AxialPosition::Phase(kz) => push("initial.kz", fmt_f64(kz)),
        }
        push("initial.v_z", fmt_f64(self.initial_v_z));
        push("initial.phi", fmt_f64(self.initial_phi));
        match self.initial_rotation {
            InitialRotation::PhiDot(w) => push("initial.phi_dot", fmt_f64(w)),
            InitialRotation::FRot(f) => push("initial.f_rot", fmt_f64(f)),
        }
        if let Some(t) = self.initial_t {
            push("initial.t", fmt_f64(t));
        }
        if let Some(dt) = self.dt {
            push("sim.dt", fmt_f64(dt));
        }
        if let Some(h) = self.half_span {
            push("sim.half_span", fmt_f64(h));
        }
        push("synthesis.sample_rate", fmt_f64(self.sample_rate));
        push("synthesis.y_offset", fmt_f64(self.y_offset));
        push("analysis.min_prominence", fmt_f64(self.min_prominence));
        if let Some(dir) = &self.output_dir {
            push("output.dir", dir.clone());
        }
        if let Some(seed) = self.seed {
            push("seed", seed.to_string());
        }
        out
    }

    /// Map onto the core transit description.
    pub fn to_transit_spec(&self) -> Result<TransitSpec, ConfigError> {
        let cavity = CavityParams::new(self.wavelength, self.waist, self.field_amplitude)
            .map_err(|e| err(None, e.to_string()))?;
        let geometry = RodGeometry::new(self.rod_length, self.rod_diameter)
            .map_err(|e| err(None, e.to_string()))?;
        let material = Material::new(self.epsilon_r, self.density)
            .map_err(|e| err(None, e.to_string()))?;
        let initial_z = match self.initial_z {
            AxialPosition::Meters(z) => z,
            AxialPosition::Phase(kz) => kz / cavity.wave_number(),
        };
        let initial_phi_dot = match self.initial_rotation {
            InitialRotation::PhiDot(w) => w,
            InitialRotation::FRot(f) => 2.0 * std::f64::consts::PI * f,
        };
        Ok(TransitSpec {
            cavity,
            geometry,
            material,
            particle_kind: self.particle,
            v_x: self.v_x,
            initial_z,
            initial_z_dot: self.initial_v_z,
            initial_phi: self.initial_phi,
            initial_phi_dot,
            initial_t: self.initial_t,
            dt: self.dt,
            half_span: self.half_span,
        })
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that parses back to the same f64.
    format!("{v}")
}

#[derive(Default)]
struct Builder {
    particle: Option<ParticleKind>,
    wavelength: Option<f64>,
    waist: Option<f64>,
    field_amplitude: Option<f64>,
    rod_length: Option<f64>,
    rod_diameter: Option<f64>,
    epsilon_r: Option<f64>,
    density: Option<f64>,
    v_x: Option<f64>,
    initial_z: Option<AxialPosition>,
    initial_v_z: Option<f64>,
    initial_phi: Option<f64>,
    initial_rotation: Option<InitialRotation>,
    initial_t: Option<f64>,
    dt: Option<f64>,
    half_span: Option<f64>,
    sample_rate: Option<f64>,
    y_offset: Option<f64>,
    min_prominence: Option<f64>,
    output_dir: Option<String>,
    seed: Option<u64>,
}

impl Builder {
    fn from_config(c: &RunConfig) -> Self {
        Builder {
            particle: Some(c.particle),
            wavelength: Some(c.wavelength),
            waist: Some(c.waist),
            field_amplitude: Some(c.field_amplitude),
            rod_length: Some(c.rod_length),
            rod_diameter: Some(c.rod_diameter),
            epsilon_r: Some(c.epsilon_r),
            density: Some(c.density),
            v_x: Some(c.v_x),
            initial_z: Some(c.initial_z),
            initial_v_z: Some(c.initial_v_z),
            initial_phi: Some(c.initial_phi),
            initial_rotation: Some(c.initial_rotation),
            initial_t: c.initial_t,
            dt: c.dt,
            half_span: c.half_span,
            sample_rate: Some(c.sample_rate),
            y_offset: Some(c.y_offset),
            min_prominence: Some(c.min_prominence),
            output_dir: c.output_dir.clone(),
            seed: c.seed,
        }
    }

    fn set(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let f = |value: &str| -> Result<f64, ConfigError> {
            value
                .parse::<f64>()
                .map_err(|_| err(line, format!("`{value}` is not a number (key `{key}`)")))
        };
        match key {
            "particle" => {
                self.particle = Some(match value {
                    "rod" => ParticleKind::Rod,
                    "sphere" => ParticleKind::Sphere,
                    other => {
                        return Err(err(
                            line,
                            format!("particle must be `rod` or `sphere`, got `{other}`"),
                        ))
                    }
                })
            }
            "cavity.wavelength" => self.wavelength = Some(f(value)?),
            "cavity.waist" => self.waist = Some(f(value)?),
            "cavity.field_amplitude" => self.field_amplitude = Some(f(value)?),
            "rod.length" => self.rod_length = Some(f(value)?),
            "rod.diameter" => self.rod_diameter = Some(f(value)?),
            "material.epsilon_r" => self.epsilon_r = Some(f(value)?),
            "material.density" => self.density = Some(f(value)?),
            "transit.v_x" => self.v_x = Some(f(value)?),
            "initial.z" => self.initial_z = Some(AxialPosition::Meters(f(value)?)),
            "initial.kz" => self.initial_z = Some(AxialPosition::Phase(f(value)?)),
            "initial.v_z" => self.initial_v_z = Some(f(value)?),
            "initial.phi" => self.initial_phi = Some(f(value)?),
            "initial.phi_dot" => self.initial_rotation = Some(InitialRotation::PhiDot(f(value)?)),
            "initial.f_rot" => self.initial_rotation = Some(InitialRotation::FRot(f(value)?)),
            "initial.t" => self.initial_t = Some(f(value)?),
            "sim.dt" => self.dt = Some(f(value)?),
            "sim.half_span" => self.half_span = Some(f(value)?),
            "synthesis.sample_rate" => self.sample_rate = Some(f(value)?),
            "synthesis.y_offset" => self.y_offset = Some(f(value)?),
            "analysis.min_prominence" => self.min_prominence = Some(f(value)?),
            "output.dir" => self.output_dir = Some(value.to_string()),
            "seed" => {
                self.seed = Some(value.parse::<u64>().map_err(|_| {
                    err(line, format!("`{value}` is not a non-negative integer (key `seed`)"))
                })?)
            }
            unknown => return Err(err(line, format!("unknown key `{unknown}`"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, ConfigError> {
        let mut missing = Vec::new();
        macro_rules! require {
            ($field:ident, $name:literal) => {
                match self.$field {
                    Some(v) => Some(v),
                    None => {
                        missing.push($name);
                        None
                    }
                }
            };
        }
        let wavelength = require!(wavelength, "cavity.wavelength");
        let waist = require!(waist, "cavity.waist");
        let field_amplitude = require!(field_amplitude, "cavity.field_amplitude");
        let rod_length = require!(rod_length, "rod.length");
        let rod_diameter = require!(rod_diameter, "rod.diameter");
        let epsilon_r = require!(epsilon_r, "material.epsilon_r");
        let density = require!(density, "material.density");
        let v_x = require!(v_x, "transit.v_x");
        let initial_z = require!(initial_z, "initial.z or initial.kz");
        let initial_v_z = require!(initial_v_z, "initial.v_z");
        let initial_phi = require!(initial_phi, "initial.phi");
        let initial_rotation = require!(initial_rotation, "initial.phi_dot or initial.f_rot");
        let sample_rate = require!(sample_rate, "synthesis.sample_rate");
        if !missing.is_empty() {
            return Err(err(None, format!("missing required keys: {}", missing.join(", "))));
        }
        Ok(RunConfig {
            particle: self.particle.unwrap_or(ParticleKind::Rod),
            wavelength: wavelength.unwrap(),
            waist: waist.unwrap(),
            field_amplitude: field_amplitude.unwrap(),
            rod_length: rod_length.unwrap(),
            rod_diameter: rod_diameter.unwrap(),
            epsilon_r: epsilon_r.unwrap(),
            density: density.unwrap(),
            v_x: v_x.unwrap(),
            initial_z: initial_z.unwrap(),
            initial_v_z: initial_v_z.unwrap(),
            initial_phi: initial_phi.unwrap(),
            initial_rotation: initial_rotation.unwrap(),
            initial_t: self.initial_t,
            dt: self.dt,
            half_span: self.half_span,
            sample_rate: sample_rate.unwrap(),
            y_offset: self.y_offset.unwrap_or(0.0),
            min_prominence: self.min_prominence.unwrap_or(0.05),
            output_dir: self.output_dir,
            seed: self.seed,
        })
    }
}
