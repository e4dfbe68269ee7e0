//! Scattered-light intensity of a dielectric needle in the standing wave and
//! synthesis of normalized detector traces along simulated trajectories.
//!
//! Geometry is the experiment's: cavity axis e_z, polarization e_x, detection
//! along e_y (perpendicular to both). The proportionality constant of the
//! intensity is fixed to 1; every consumer works with normalized signals.

use crate::dynamics::{ParticleKind, Trajectory};
use crate::math;
use crate::optics::{CavityParams, Material, RodGeometry};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ScatterError {
    /// Orientation vector has (near-)zero length.
    DegenerateOrientation,
    /// Requested sampling rate is below the Nyquist guard for the fastest
    /// expected modulation.
    Aliasing { sample_rate: f64, required: f64 },
    /// Normalization impossible: non-positive reference or all-zero signal.
    Normalization(&'static str),
    /// Trace/series length mismatch or too short.
    BadSeries(&'static str),
}

impl fmt::Display for ScatterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScatterError::DegenerateOrientation => write!(f, "orientation vector has zero length"),
            ScatterError::Aliasing {
                sample_rate,
                required,
            } => write!(
                f,
                "sample rate {sample_rate:e} Hz below the Nyquist guard {required:e} Hz (20x the fastest modulation)"
            ),
            ScatterError::Normalization(what) => write!(f, "normalization error: {what}"),
            ScatterError::BadSeries(what) => write!(f, "bad series: {what}"),
        }
    }
}

impl core::error::Error for ScatterError {}

/// Unit vector along the rod axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    n: [f64; 3],
}

impl Orientation {
    /// Normalizes the given direction; rejects vectors shorter than 1e-12.
    pub fn new(direction: [f64; 3]) -> Result<Self, ScatterError> {
        let len = math::hypot3(direction[0], direction[1], direction[2]);
        if !(len > 1e-12) || !len.is_finite() {
            return Err(ScatterError::DegenerateOrientation);
        }
        Ok(Self {
            n: [direction[0] / len, direction[1] / len, direction[2] / len],
        })
    }

    /// Rod rotating in the plane perpendicular to the cavity axis:
    /// n = (cos φ, sin φ, 0).
    pub fn planar(phi: f64) -> Self {
        Self {
            n: [math::cos(phi), math::sin(phi), 0.0],
        }
    }

    pub fn vector(&self) -> [f64; 3] {
        self.n
    }
}

/// Everything the intensity formula needs for one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterScene {
    /// Center-of-mass position (m); x is the vertical transit direction,
    /// y the detection direction, z the cavity axis.
    pub position: [f64; 3],
    pub orientation: Orientation,
    pub cavity: CavityParams,
    pub geometry: RodGeometry,
    pub material: Material,
}

/// Relative scattered intensity into the detection direction:
///
/// I ∝ k⁴D⁴L² ((ε_r−1)/(ε_r+1))² |e_y × u_int|²
///     [S₊² + 2 cos(2kz) S₊S₋ + S₋²] e^{−2(x²+y²)/w₀²},
///
/// with S± = sinc(n·(e_z ± e_y) kL/2) and the internal-field direction
/// u_int = 2 e_x + (ε_r−1)(n·e_x) n. The prefactor is kept so the value is
/// the full bracketed expression with proportionality constant 1.
pub fn scattering_intensity(scene: &ScatterScene) -> f64 {
    let k = scene.cavity.wave_number();
    let [x, y, z] = scene.position;
    let n = scene.orientation.vector();
    let eps = scene.material.epsilon_r;

    let half_kl = k * scene.geometry.length / 2.0;
    let s_plus = math::sinc((n[2] + n[1]) * half_kl);
    let s_minus = math::sinc((n[2] - n[1]) * half_kl);
    let standing = s_plus * s_plus
        + 2.0 * math::cos(2.0 * k * z) * s_plus * s_minus
        + s_minus * s_minus;

    // u_int = 2 e_x + (eps−1)(n·e_x) n; |e_y × u|² = u_x² + u_z².
    let scale = (eps - 1.0) * n[0];
    let u_x = 2.0 + scale * n[0];
    let u_z = scale * n[2];
    let cross = u_x * u_x + u_z * u_z;

    let d = scene.geometry.diameter;
    let l = scene.geometry.length;
    let contrast = (eps - 1.0) / (eps + 1.0);
    let prefactor = k * k * k * k * d * d * d * d * l * l * contrast * contrast;

    let w0 = scene.cavity.waist;
    let envelope = math::exp(-2.0 * (x * x + y * y) / (w0 * w0));

    prefactor * cross * standing * envelope
}

/// Isotropic sub-wavelength scatterer at the same position: the standing
/// wave bracket collapses to 4 cos²(kz) (S± = 1) and the internal field
/// stays along the polarization.
fn isotropic_intensity(position: [f64; 3], cavity: &CavityParams) -> f64 {
    let k = cavity.wave_number();
    let [x, y, z] = position;
    let c = math::cos(k * z);
    let w0 = cavity.waist;
    4.0 * c * c * math::exp(-2.0 * (x * x + y * y) / (w0 * w0))
}

/// Uniformly sampled scattering trace. After normalization all samples are
/// in [0, 1] with maximum exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    /// Sampling rate (Hz).
    pub sample_rate: f64,
    /// Time of the first sample (s).
    pub t0: f64,
    pub samples: Vec<f64>,
}

impl SignalTrace {
    pub fn time_at(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reference intensity for normalization: the simultaneously recorded
/// intra-cavity intensity, either constant or sampled alongside the signal.
#[derive(Debug, Clone, Copy)]
pub enum CavityIntensity<'a> {
    Constant(f64),
    Series(&'a [f64]),
}

/// Normalize a raw scattering record: S_N = (I_S/I_C) / max(I_S/I_C).
pub fn normalize_signal(
    sample_rate: f64,
    t0: f64,
    raw: &[f64],
    cavity_intensity: CavityIntensity<'_>,
) -> Result<SignalTrace, ScatterError> {
    if raw.is_empty() {
        return Err(ScatterError::BadSeries("empty signal"));
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(ScatterError::BadSeries("sample_rate must be > 0"));
    }
    let mut ratio = Vec::with_capacity(raw.len());
    match cavity_intensity {
        CavityIntensity::Constant(ic) => {
            if !(ic > 0.0) {
                return Err(ScatterError::Normalization("non-positive cavity intensity"));
            }
            ratio.extend(raw.iter().map(|&s| s / ic));
        }
        CavityIntensity::Series(ic) => {
            if ic.len() != raw.len() {
                return Err(ScatterError::BadSeries(
                    "cavity intensity series length differs from the signal",
                ));
            }
            for (&s, &c) in raw.iter().zip(ic) {
                if !(c > 0.0) {
                    return Err(ScatterError::Normalization("non-positive cavity intensity"));
                }
                ratio.push(s / c);
            }
        }
    }
    let max = ratio.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !(max > 0.0) || !max.is_finite() {
        return Err(ScatterError::Normalization("signal maximum is not positive"));
    }
    for v in &mut ratio {
        *v /= max;
    }
    Ok(SignalTrace {
        sample_rate,
        t0,
        samples: ratio,
    })
}

/// Safety factor of the sampling guard: the rate must exceed 20x the fastest
/// expected modulation frequency.
pub const NYQUIST_GUARD: f64 = 20.0;

/// Largest modulation frequency expected from a trajectory: ν_rot = |φ̇|/π
/// from the π-periodic orientation dependence and ν_trans = |ż| k/π from
/// node crossings.
pub fn max_modulation_frequency(traj: &Trajectory) -> f64 {
    let k = traj.config.cavity.wave_number();
    let mut f_max: f64 = 0.0;
    for s in &traj.states {
        let f_rot = match traj.config.particle_kind {
            ParticleKind::Rod => math::abs(s.phi_dot) / core::f64::consts::PI,
            ParticleKind::Sphere => 0.0,
        };
        let f_trans = math::abs(s.z_dot) * k / core::f64::consts::PI;
        f_max = f_max.max(f_rot).max(f_trans);
    }
    f_max
}

/// Evaluate the scattering intensity along a trajectory on a uniform grid
/// and normalize the result.
///
/// Positions follow the transit model: x = v_x t, y = y_offset, z = z(t),
/// n = (cos φ, sin φ, 0); states between integrator samples are cubic
/// Hermite interpolants. Sphere trajectories use the isotropic intensity.
pub fn synthesize_signal(
    traj: &Trajectory,
    sample_rate: f64,
    y_offset: f64,
) -> Result<SignalTrace, ScatterError> {
    if traj.states.len() < 2 {
        return Err(ScatterError::BadSeries("trajectory has fewer than 2 samples"));
    }
    let required = NYQUIST_GUARD * max_modulation_frequency(traj);
    if sample_rate < required {
        return Err(ScatterError::Aliasing {
            sample_rate,
            required,
        });
    }

    let t0 = traj.config.t_start;
    let t1 = traj.config.t_end;
    let count = (math::floor((t1 - t0) * sample_rate)) as usize + 1;
    let mut raw = Vec::with_capacity(count);
    for i in 0..count {
        let t = t0 + i as f64 / sample_rate;
        let state = traj.state_at(t);
        let position = [traj.config.v_x * t, y_offset, state.z];
        let intensity = match traj.config.particle_kind {
            ParticleKind::Rod => scattering_intensity(&ScatterScene {
                position,
                orientation: Orientation::planar(state.phi),
                cavity: traj.config.cavity,
                geometry: traj.config.geometry,
                material: traj.config.material,
            }),
            ParticleKind::Sphere => isotropic_intensity(position, &traj.config.cavity),
        };
        raw.push(intensity);
    }
    normalize_signal(sample_rate, t0, &raw, CavityIntensity::Constant(1.0))
}
