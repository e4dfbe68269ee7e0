//! Planar transit dynamics: fixed-step RK4 integration of the coupled
//! center-of-mass and rotation equations through the Gaussian beam envelope,
//! plus channelling classification and transit summaries.
//!
//! The rod moves along the cavity axis z and rotates in the plane
//! perpendicular to it, n = (cos φ, sin φ, 0). The vertical transit enters
//! only through the intensity envelope exp(−2 (v_x t)² / w₀²), with the
//! beam-center crossing at t = 0. Off-axis transits are represented by a
//! reduced field amplitude, never by an explicit transverse coordinate.

use crate::analysis;
use crate::math;
use crate::optics::{
    self, BodyProperties, CavityParams, Material, OpticsError, Polarizability, RodGeometry,
};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationError {
    Optics(OpticsError),
    InvalidConfig(&'static str),
    /// The integrator produced a non-finite state at time `t`.
    IntegrationBlowup { t: f64 },
    /// The envelope is not negligible (< 1e-3) at the trajectory ends.
    EnvelopeNotNegligible { envelope: f64 },
    /// The trajectory has too few samples for the requested statistic.
    TrajectoryTooShort,
}

impl fmt::Display for SimulationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulationError::Optics(e) => write!(f, "{e}"),
            SimulationError::InvalidConfig(what) => write!(f, "invalid config: {what}"),
            SimulationError::IntegrationBlowup { t } => {
                write!(f, "integration produced a non-finite state at t = {t:e} s")
            }
            SimulationError::EnvelopeNotNegligible { envelope } => write!(
                f,
                "envelope {envelope:e} at a trajectory end exceeds 1e-3; span does not cover the transit"
            ),
            SimulationError::TrajectoryTooShort => write!(f, "trajectory too short"),
        }
    }
}

impl core::error::Error for SimulationError {}

impl From<OpticsError> for SimulationError {
    fn from(e: OpticsError) -> Self {
        SimulationError::Optics(e)
    }
}

/// Which scatterer the equations of motion describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleKind {
    /// Anisotropic needle: coupled z and φ dynamics.
    Rod,
    /// Same-mass sphere: scalar polarizability, no torque.
    Sphere,
}

/// Phase-space sample of the planar rotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodState {
    /// Time (s); beam-center crossing is t = 0.
    pub t: f64,
    /// Axial position (m).
    pub z: f64,
    /// Axial velocity (m/s).
    pub z_dot: f64,
    /// Orientation angle (rad), unwrapped: the winding number carries the
    /// rotation count.
    pub phi: f64,
    /// Angular velocity (rad/s).
    pub phi_dot: f64,
}

impl RodState {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.z.is_finite()
            && self.z_dot.is_finite()
            && self.phi.is_finite()
            && self.phi_dot.is_finite()
    }
}

/// Complete description of one transit simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub cavity: CavityParams,
    pub geometry: RodGeometry,
    pub material: Material,
    pub particle_kind: ParticleKind,
    /// Vertical transit velocity through the waist (m/s).
    pub v_x: f64,
    /// State at `initial.t`; integration runs backward to `t_start` and
    /// forward to `t_end` from here.
    pub initial: RodState,
    /// Fixed integration step (s).
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
}

/// Declarative description of a transit run; [`TransitSpec::build`] fills in
/// the defaults (span, step, anchoring) and validates.
#[derive(Debug, Clone)]
pub struct TransitSpec {
    pub cavity: CavityParams,
    pub geometry: RodGeometry,
    pub material: Material,
    pub particle_kind: ParticleKind,
    pub v_x: f64,
    pub initial_z: f64,
    pub initial_z_dot: f64,
    pub initial_phi: f64,
    pub initial_phi_dot: f64,
    /// Time at which the initial state holds. `None` anchors it at the
    /// window start, matching initial values quoted "at the start of the
    /// transit".
    pub initial_t: Option<f64>,
    /// Integration step; `None` selects the default
    /// 1/(200 · max(f_rot, f_trap, f_libration, f_transit)).
    pub dt: Option<f64>,
    /// Half-width of the simulated window; `None` selects 10 w₀ / v_x,
    /// which covers the full envelope.
    pub half_span: Option<f64>,
}

impl TransitSpec {
    pub fn build(self) -> Result<SimulationConfig, SimulationError> {
        if !(self.v_x > 0.0) || !self.v_x.is_finite() {
            return Err(SimulationError::InvalidConfig("v_x must be > 0"));
        }
        let pol = optics::needle_polarizability(&self.geometry, &self.material)?;
        let body = BodyProperties::from_rod(&self.geometry, &self.material);
        let dt = match self.dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => dt,
            Some(_) => return Err(SimulationError::InvalidConfig("dt must be > 0")),
            None => default_time_step(
                &self.cavity,
                &pol,
                &body,
                self.initial_phi_dot,
                self.initial_z_dot,
                10.0 * self.cavity.waist / self.v_x,
            ),
        };
        let half = match self.half_span {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(_) => return Err(SimulationError::InvalidConfig("half_span must be > 0")),
            None => 10.0 * self.cavity.waist / self.v_x,
        };
        // Grid anchored at the beam center: bounds snap outward to multiples
        // of dt so t = 0 is always a sample.
        let n_half = math::round(math::floor(half / dt - 1e-9)) as i64 + 1;
        let t_start = -(n_half as f64) * dt;
        let t_end = (n_half as f64) * dt;
        let initial_t = match self.initial_t {
            None => t_start,
            Some(t) => {
                let j = math::round((t - t_start) / dt);
                if j < 0.0 || j > 2.0 * n_half as f64 {
                    return Err(SimulationError::InvalidConfig(
                        "initial.t outside the simulated window",
                    ));
                }
                t_start + j * dt
            }
        };
        let config = SimulationConfig {
            cavity: self.cavity,
            geometry: self.geometry,
            material: self.material,
            particle_kind: self.particle_kind,
            v_x: self.v_x,
            initial: RodState {
                t: initial_t,
                z: self.initial_z,
                z_dot: self.initial_z_dot,
                phi: self.initial_phi,
                phi_dot: self.initial_phi_dot,
            },
            dt,
            t_start,
            t_end,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Default step: 1/(200 f_max) with f_max the largest of the initial
/// rotation rate, the analytic antinode trap frequency (at α∥), the
/// small-angle libration frequency, and the node-crossing frequency of the
/// initial axial velocity.
pub fn default_time_step(
    cavity: &CavityParams,
    pol: &Polarizability,
    body: &BodyProperties,
    phi_dot0: f64,
    z_dot0: f64,
    half_span: f64,
) -> f64 {
    let f_rot = math::abs(phi_dot0) / (2.0 * PI);
    let f_trap = optics::axial_trap_frequency(cavity, pol.parallel, body);
    let f_lib = optics::libration_frequency(cavity, pol, body);
    let f_transit = math::abs(z_dot0) * cavity.wave_number() / PI;
    let f_max = f_rot.max(f_trap).max(f_lib).max(f_transit);
    if f_max > 0.0 {
        1.0 / (200.0 * f_max)
    } else {
        half_span / 10_000.0
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimulationError::InvalidConfig("dt must be > 0"));
        }
        if !(self.t_end > self.t_start) {
            return Err(SimulationError::InvalidConfig("t_end must exceed t_start"));
        }
        if !(self.v_x > 0.0) || !self.v_x.is_finite() {
            return Err(SimulationError::InvalidConfig("v_x must be > 0"));
        }
        if !self.initial.is_finite() {
            return Err(SimulationError::InvalidConfig("initial state must be finite"));
        }
        if self.initial.t < self.t_start - 1e-9 * self.dt
            || self.initial.t > self.t_end + 1e-9 * self.dt
        {
            return Err(SimulationError::InvalidConfig("initial.t outside [t_start, t_end]"));
        }
        let back = (self.initial.t - self.t_start) / self.dt;
        let fwd = (self.t_end - self.initial.t) / self.dt;
        if math::abs(back - math::round(back)) > 1e-6 || math::abs(fwd - math::round(fwd)) > 1e-6 {
            return Err(SimulationError::InvalidConfig(
                "span must be an integer number of steps around initial.t",
            ));
        }
        if self.geometry.diameter >= self.cavity.wavelength / 2.0 {
            return Err(SimulationError::InvalidConfig(
                "diameter must be below wavelength/2 for the sub-wavelength treatment",
            ));
        }
        Ok(())
    }

    /// Intensity envelope exp(−2 (v_x t)² / w₀²) at time `t`.
    pub fn envelope_at(&self, t: f64) -> f64 {
        let u = self.v_x * t / self.cavity.waist;
        math::exp(-2.0 * u * u)
    }
}

/// Precomputed force coefficients for the integration loop.
struct ForceModel {
    /// E₀² k α⊥ / 4M (rod) or E₀² k α_sph / 4M (sphere).
    c_axial_base: f64,
    /// E₀² k (α∥−α⊥) / 4M; zero for the sphere.
    c_axial_aniso: f64,
    /// E₀² (α∥−α⊥) / 4Θ; zero for the sphere.
    c_torque: f64,
    k: f64,
    /// 2 v_x² / w₀².
    env_rate: f64,
}

impl ForceModel {
    fn new(config: &SimulationConfig) -> Result<Self, SimulationError> {
        let pol = optics::needle_polarizability(&config.geometry, &config.material)?;
        let body = BodyProperties::from_rod(&config.geometry, &config.material);
        let k = config.cavity.wave_number();
        let e2 = config.cavity.field_amplitude * config.cavity.field_amplitude;
        let u = config.v_x / config.cavity.waist;
        let model = match config.particle_kind {
            ParticleKind::Rod => ForceModel {
                c_axial_base: e2 * k * pol.perpendicular / (4.0 * body.mass()),
                c_axial_aniso: e2 * k * pol.anisotropy() / (4.0 * body.mass()),
                c_torque: e2 * pol.anisotropy() / (4.0 * body.inertia()),
                k,
                env_rate: 2.0 * u * u,
            },
            ParticleKind::Sphere => {
                let alpha = optics::sphere_polarizability(config.geometry.volume(), &config.material);
                ForceModel {
                    c_axial_base: e2 * k * alpha / (4.0 * body.mass()),
                    c_axial_aniso: 0.0,
                    c_torque: 0.0,
                    k,
                    env_rate: 2.0 * u * u,
                }
            }
        };
        Ok(model)
    }

    /// d/dt (z, ż, φ, φ̇) at time t.
    #[inline]
    fn derivative(&self, t: f64, s: &[f64; 4]) -> [f64; 4] {
        let env = math::exp(-self.env_rate * t * t);
        let c_phi = math::cos(s[2]);
        let bracket = self.c_axial_base + self.c_axial_aniso * c_phi * c_phi;
        let a_z = -bracket * math::sin(2.0 * self.k * s[0]) * env;
        let c_z = math::cos(self.k * s[0]);
        let a_phi = -self.c_torque * math::sin(2.0 * s[2]) * c_z * c_z * env;
        [s[1], a_z, s[3], a_phi]
    }

    /// One classical RK4 step of signed size `dt` from time `t`.
    #[inline]
    fn rk4(&self, t: f64, s: &[f64; 4], dt: f64) -> [f64; 4] {
        let k1 = self.derivative(t, s);
        let s2 = [
            s[0] + 0.5 * dt * k1[0],
            s[1] + 0.5 * dt * k1[1],
            s[2] + 0.5 * dt * k1[2],
            s[3] + 0.5 * dt * k1[3],
        ];
        let k2 = self.derivative(t + 0.5 * dt, &s2);
        let s3 = [
            s[0] + 0.5 * dt * k2[0],
            s[1] + 0.5 * dt * k2[1],
            s[2] + 0.5 * dt * k2[2],
            s[3] + 0.5 * dt * k2[3],
        ];
        let k3 = self.derivative(t + 0.5 * dt, &s3);
        let s4 = [
            s[0] + dt * k3[0],
            s[1] + dt * k3[1],
            s[2] + dt * k3[2],
            s[3] + dt * k3[3],
        ];
        let k4 = self.derivative(t + dt, &s4);
        [
            s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            s[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            s[3] + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
        ]
    }
}

/// Advance `state` by one step of `config.dt` (negative `dt_signed` steps
/// backward). Deterministic: identical inputs give bit-identical output.
pub fn step_by(
    state: &RodState,
    config: &SimulationConfig,
    dt_signed: f64,
) -> Result<RodState, SimulationError> {
    let model = ForceModel::new(config)?;
    let s = model.rk4(state.t, &[state.z, state.z_dot, state.phi, state.phi_dot], dt_signed);
    let next = RodState {
        t: state.t + dt_signed,
        z: s[0],
        z_dot: s[1],
        phi: s[2],
        phi_dot: s[3],
    };
    if !next.is_finite() {
        return Err(SimulationError::IntegrationBlowup { t: next.t });
    }
    Ok(next)
}

/// Advance `state` by one forward step of `config.dt`.
pub fn step(state: &RodState, config: &SimulationConfig) -> Result<RodState, SimulationError> {
    step_by(state, config, config.dt)
}

/// Uniformly sampled transit trajectory with its config snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: SimulationConfig,
    /// Samples at t_start + i·dt, strictly increasing.
    pub states: Vec<RodState>,
}

impl Trajectory {
    /// Cubic Hermite interpolation of (z, φ) between samples, using the
    /// stored velocities as slopes; `t` is clamped to the sampled span.
    pub fn state_at(&self, t: f64) -> RodState {
        let n = self.states.len();
        let dt = self.config.dt;
        let pos = (t - self.config.t_start) / dt;
        let i = if pos <= 0.0 {
            0
        } else if pos >= (n - 2) as f64 {
            n - 2
        } else {
            math::floor(pos) as usize
        };
        let a = &self.states[i];
        let b = &self.states[i + 1];
        let s = ((t - a.t) / dt).clamp(0.0, 1.0);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let interp = |p0: f64, v0: f64, p1: f64, v1: f64| {
            h00 * p0 + h10 * dt * v0 + h01 * p1 + h11 * dt * v1
        };
        // Derivative of the Hermite basis for the velocities.
        let d00 = 6.0 * s * (s - 1.0) / dt;
        let d10 = (1.0 - s) * (1.0 - 3.0 * s);
        let d01 = -6.0 * s * (s - 1.0) / dt;
        let d11 = s * (3.0 * s - 2.0);
        let dinterp = |p0: f64, v0: f64, p1: f64, v1: f64| {
            d00 * p0 + d10 * v0 + d01 * p1 + d11 * v1
        };
        RodState {
            t,
            z: interp(a.z, a.z_dot, b.z, b.z_dot),
            z_dot: dinterp(a.z, a.z_dot, b.z, b.z_dot),
            phi: interp(a.phi, a.phi_dot, b.phi, b.phi_dot),
            phi_dot: dinterp(a.phi, a.phi_dot, b.phi, b.phi_dot),
        }
    }

    pub fn envelope_at(&self, t: f64) -> f64 {
        self.config.envelope_at(t)
    }
}

/// Integrate the configured transit: backward from `initial.t` to `t_start`
/// and forward to `t_end`, producing one uniformly spaced trajectory.
///
/// Sphere mode drops the torque equation and replaces the orientation
/// bracket by the sphere's scalar polarizability; φ then advances freely.
pub fn simulate(config: &SimulationConfig) -> Result<Trajectory, SimulationError> {
    config.validate()?;
    let model = ForceModel::new(config)?;
    let n_back = math::round((config.initial.t - config.t_start) / config.dt) as usize;
    let n_fwd = math::round((config.t_end - config.initial.t) / config.dt) as usize;

    let mut states = Vec::with_capacity(n_back + n_fwd + 1);
    let s0 = [
        config.initial.z,
        config.initial.z_dot,
        config.initial.phi,
        config.initial.phi_dot,
    ];

    // Backward leg, reversed into place afterwards.
    let mut s = s0;
    for i in 1..=n_back {
        // Times from the grid formula, not accumulation, so each run of the
        // same config lands on bit-identical sample times.
        let t_here = config.initial.t - (i as f64 - 1.0) * config.dt;
        s = model.rk4(t_here, &s, -config.dt);
        let t_next = config.initial.t - i as f64 * config.dt;
        let state = RodState {
            t: t_next,
            z: s[0],
            z_dot: s[1],
            phi: s[2],
            phi_dot: s[3],
        };
        if !state.is_finite() {
            return Err(SimulationError::IntegrationBlowup { t: t_next });
        }
        states.push(state);
    }
    states.reverse();
    states.push(RodState {
        t: config.initial.t,
        ..config.initial
    });

    let mut s = s0;
    for i in 1..=n_fwd {
        let t_here = config.initial.t + (i as f64 - 1.0) * config.dt;
        s = model.rk4(t_here, &s, config.dt);
        let t_next = config.initial.t + i as f64 * config.dt;
        let state = RodState {
            t: t_next,
            z: s[0],
            z_dot: s[1],
            phi: s[2],
            phi_dot: s[3],
        };
        if !state.is_finite() {
            return Err(SimulationError::IntegrationBlowup { t: t_next });
        }
        states.push(state);
    }

    Ok(Trajectory {
        config: config.clone(),
        states,
    })
}

/// Total mechanical energy M ż²/2 + Θ φ̇²/2 + U(z, φ) with the envelope
/// frozen at the given value. Conserved by the dynamics only when the
/// envelope is held fixed.
pub fn total_energy(
    state: &RodState,
    config: &SimulationConfig,
    frozen_envelope: f64,
) -> Result<f64, SimulationError> {
    let body = BodyProperties::from_rod(&config.geometry, &config.material);
    let kinetic = 0.5 * body.mass() * state.z_dot * state.z_dot
        + 0.5 * body.inertia() * state.phi_dot * state.phi_dot;
    let potential = match config.particle_kind {
        ParticleKind::Rod => {
            let pol = optics::needle_polarizability(&config.geometry, &config.material)?;
            optics::optical_potential(state.z, state.phi, frozen_envelope, &config.cavity, &pol)
        }
        ParticleKind::Sphere => {
            let alpha = optics::sphere_polarizability(config.geometry.volume(), &config.material);
            optics::isotropic_potential(state.z, frozen_envelope, &config.cavity, alpha)
        }
    };
    Ok(kinetic + potential)
}

/// Channelling verdict over the envelope > 0.5 window.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannellingReport {
    /// True iff z stays within ±λ/8 of a single antinode throughout the
    /// envelope > 0.5 window.
    pub channelled: bool,
    /// Number of nearest-antinode index changes while envelope > 0.5.
    pub antinode_hops: u32,
    /// Dominant z-oscillation frequency in the window (Hz), when the rod
    /// stayed in one well and the window is long enough for a spectral
    /// estimate.
    pub trap_frequency: Option<f64>,
    /// Why `trap_frequency` is absent.
    pub trap_frequency_reason: Option<&'static str>,
}

/// Classify transverse channelling: the rod counts as channelled when it
/// stays within ±λ/8 of one antinode for the whole contiguous window where
/// the envelope exceeds 0.5.
pub fn classify_channelling(traj: &Trajectory) -> ChannellingReport {
    let k = traj.config.cavity.wave_number();
    let window: Vec<&RodState> = traj
        .states
        .iter()
        .filter(|s| traj.envelope_at(s.t) > 0.5)
        .collect();
    if window.is_empty() {
        return ChannellingReport {
            channelled: false,
            antinode_hops: 0,
            trap_frequency: None,
            trap_frequency_reason: Some("no samples with envelope > 0.5"),
        };
    }
    let antinode_index = |z: f64| math::round(k * z / PI) as i64;
    let m0 = antinode_index(window[0].z);
    let mut hops = 0u32;
    let mut prev = m0;
    let mut within = true;
    for s in &window {
        let m = antinode_index(s.z);
        if m != prev {
            hops += 1;
            prev = m;
        }
        if math::abs(k * s.z - m0 as f64 * PI) > PI / 4.0 {
            within = false;
        }
    }

    let (trap_frequency, reason) = if hops > 0 {
        (None, Some("antinode changes in the window"))
    } else if window.len() < 64 {
        (None, Some("window too short for a spectral estimate"))
    } else {
        let mean = window.iter().map(|s| s.z).sum::<f64>() / window.len() as f64;
        let detrended: Vec<f64> = window.iter().map(|s| s.z - mean).collect();
        match analysis::dominant_frequency(&detrended, 1.0 / traj.config.dt) {
            Some(peak) => (Some(peak.frequency), None),
            None => (None, Some("no dominant oscillation peak")),
        }
    };

    ChannellingReport {
        channelled: within,
        antinode_hops: hops,
        trap_frequency,
        trap_frequency_reason: reason,
    }
}

/// Before/after comparison of a transit.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitSummary {
    /// Axial velocity at the first/last sample (m/s).
    pub v_z_in: f64,
    pub v_z_out: f64,
    /// Rotation rate |φ̇|/2π at the first/last sample (Hz).
    pub f_rot_in: f64,
    pub f_rot_out: f64,
    pub channelled: bool,
    pub antinode_hops: u32,
    pub trap_frequency: Option<f64>,
}

/// Read in/out kinematics off the trajectory ends; requires the envelope to
/// be negligible (< 1e-3) there so the readings are asymptotic.
pub fn transit_summary(traj: &Trajectory) -> Result<TransitSummary, SimulationError> {
    let first = traj.states.first().ok_or(SimulationError::TrajectoryTooShort)?;
    let last = traj.states.last().ok_or(SimulationError::TrajectoryTooShort)?;
    for s in [first, last] {
        let env = traj.envelope_at(s.t);
        if env >= 1e-3 {
            return Err(SimulationError::EnvelopeNotNegligible { envelope: env });
        }
    }
    let report = classify_channelling(traj);
    Ok(TransitSummary {
        v_z_in: first.z_dot,
        v_z_out: last.z_dot,
        f_rot_in: math::abs(first.phi_dot) / (2.0 * PI),
        f_rot_out: math::abs(last.phi_dot) / (2.0 * PI),
        channelled: report.channelled,
        antinode_hops: report.antinode_hops,
        trap_frequency: report.trap_frequency,
    })
}
