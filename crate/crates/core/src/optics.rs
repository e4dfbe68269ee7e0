//! Static optics: particle properties, needle-limit polarizabilities, the
//! standing-wave cavity field, and the instantaneous force/torque/potential
//! entering the planar equations of motion.
//!
//! Conventions: the cavity axis is z with antinodes at z = mπ/k, the field
//! polarization axis is x, and φ is the angle between the rod axis and the
//! polarization. All quantities are SI.

use crate::constants::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::math;
use core::f64::consts::PI;
use core::fmt;

/// Minimum aspect ratio for the needle-limit polarizability to be used.
pub const MIN_NEEDLE_ASPECT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum OpticsError {
    /// A geometric or material parameter violates its domain.
    InvalidParameter(&'static str),
    /// Aspect ratio below [`MIN_NEEDLE_ASPECT`]; the needle limit does not apply.
    AspectRatioTooSmall { aspect: f64 },
}

impl fmt::Display for OpticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpticsError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            OpticsError::AspectRatioTooSmall { aspect } => write!(
                f,
                "aspect ratio {aspect:.2} below {MIN_NEEDLE_ASPECT} required for the needle limit"
            ),
        }
    }
}

impl core::error::Error for OpticsError {}

/// Cylindrical rod dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodGeometry {
    /// Rod length (m).
    pub length: f64,
    /// Rod diameter (m).
    pub diameter: f64,
}

impl RodGeometry {
    pub fn new(length: f64, diameter: f64) -> Result<Self, OpticsError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(OpticsError::InvalidParameter("length must be > 0"));
        }
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(OpticsError::InvalidParameter("diameter must be > 0"));
        }
        Ok(Self { length, diameter })
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.length / self.diameter
    }

    /// Cylinder volume π (D/2)² L.
    pub fn volume(&self) -> f64 {
        PI * (self.diameter / 2.0) * (self.diameter / 2.0) * self.length
    }
}

/// Homogeneous dielectric material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Relative permittivity (> 1).
    pub epsilon_r: f64,
    /// Mass density (kg/m³).
    pub density: f64,
}

impl Material {
    pub fn new(epsilon_r: f64, density: f64) -> Result<Self, OpticsError> {
        if !(epsilon_r > 1.0) || !epsilon_r.is_finite() {
            return Err(OpticsError::InvalidParameter("epsilon_r must be > 1"));
        }
        if !(density > 0.0) || !density.is_finite() {
            return Err(OpticsError::InvalidParameter("density must be > 0"));
        }
        Ok(Self { epsilon_r, density })
    }

    /// Crystalline silicon at 1560 nm: ε_r = 12.1 (n ≈ 3.48), ρ = 2329 kg/m³.
    pub const SILICON: Material = Material {
        epsilon_r: 12.1,
        density: 2329.0,
    };
}

/// Mass and transverse moment of inertia, always derived from geometry and
/// material so the Θ = ML²/12 relation cannot be broken by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyProperties {
    mass: f64,
    inertia: f64,
}

impl BodyProperties {
    /// M = ρ π (D/2)² L and Θ = M L²/12.
    pub fn from_rod(geometry: &RodGeometry, material: &Material) -> Self {
        let mass = material.density * geometry.volume();
        Self {
            mass,
            inertia: mass * geometry.length * geometry.length / 12.0,
        }
    }

    /// Mass (kg).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Moment of inertia about a transverse axis through the center (kg·m²).
    pub fn inertia(&self) -> f64 {
        self.inertia
    }
}

/// Induced-dipole polarizability components of the rod (C·m²/V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability {
    /// Response for field parallel to the rod axis.
    pub parallel: f64,
    /// Response for field perpendicular to the rod axis.
    pub perpendicular: f64,
}

impl Polarizability {
    /// Polarizability anisotropy α∥ − α⊥, the source of the aligning torque.
    pub fn anisotropy(&self) -> f64 {
        self.parallel - self.perpendicular
    }

    /// Polarizability volume α/4πε₀ in Å³, the unit used for reporting.
    pub fn volume_angstrom3(alpha: f64) -> f64 {
        alpha / (4.0 * PI * VACUUM_PERMITTIVITY) * 1e30
    }
}

/// Needle-limit polarizability of a thin dielectric cylinder: depolarization
/// factor 0 along the axis and 1/2 transverse, giving
/// α∥ = ε₀V(ε_r − 1) and α⊥ = 2ε₀V(ε_r − 1)/(ε_r + 1).
///
/// Rejects aspect ratios below [`MIN_NEEDLE_ASPECT`] where the thin-ellipsoid
/// approximation degrades.
pub fn needle_polarizability(
    geometry: &RodGeometry,
    material: &Material,
) -> Result<Polarizability, OpticsError> {
    let aspect = geometry.aspect_ratio();
    if aspect < MIN_NEEDLE_ASPECT {
        return Err(OpticsError::AspectRatioTooSmall { aspect });
    }
    let contrast = material.epsilon_r - 1.0;
    let base = VACUUM_PERMITTIVITY * geometry.volume();
    Ok(Polarizability {
        parallel: base * contrast,
        perpendicular: base * 2.0 * contrast / (material.epsilon_r + 1.0),
    })
}

/// Clausius–Mossotti polarizability of a sphere of the given volume,
/// α = 3ε₀V(ε_r − 1)/(ε_r + 2).
pub fn sphere_polarizability(volume: f64, material: &Material) -> f64 {
    3.0 * VACUUM_PERMITTIVITY * volume * (material.epsilon_r - 1.0) / (material.epsilon_r + 2.0)
}

/// Which rotational average of the anisotropic polarizability to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// Average over all rotation axes: α∥/3 + 2α⊥/3.
    Isotropic3d,
    /// Rod rotating in the plane containing the polarization axis:
    /// (α∥ + α⊥)/2.
    Planar,
}

pub fn orientation_averaged_polarizability(pol: &Polarizability, mode: AverageMode) -> f64 {
    match mode {
        AverageMode::Isotropic3d => pol.parallel / 3.0 + 2.0 * pol.perpendicular / 3.0,
        AverageMode::Planar => (pol.parallel + pol.perpendicular) / 2.0,
    }
}

/// Standing-wave field amplitude from the peak intra-cavity intensity,
/// E₀ = √(4 I_C / c ε₀).
pub fn cavity_field_amplitude(intensity: f64) -> f64 {
    math::sqrt(4.0 * intensity / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY))
}

/// Standing-wave cavity field: E(z) = E₀ cos(kz) polarized along x, with a
/// Gaussian transverse profile of waist w₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// Mode waist, the 1/e² intensity radius (m).
    pub waist: f64,
    /// Standing-wave field amplitude at an antinode on the axis (V/m).
    pub field_amplitude: f64,
}

impl CavityParams {
    pub fn new(wavelength: f64, waist: f64, field_amplitude: f64) -> Result<Self, OpticsError> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(OpticsError::InvalidParameter("wavelength must be > 0"));
        }
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(OpticsError::InvalidParameter("waist must be > 0"));
        }
        if !(field_amplitude >= 0.0) || !field_amplitude.is_finite() {
            return Err(OpticsError::InvalidParameter("field_amplitude must be >= 0"));
        }
        Ok(Self {
            wavelength,
            waist,
            field_amplitude,
        })
    }

    /// Wave number k = 2π/λ, always derived.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Orientation-dependent coupling α⊥ + (α∥ − α⊥) cos²φ.
#[inline]
pub fn coupling_bracket(pol: &Polarizability, phi: f64) -> f64 {
    let c = math::cos(phi);
    pol.perpendicular + pol.anisotropy() * c * c
}

/// Axial acceleration of the rod,
/// z̈ = −(E₀² k / 4M) [α⊥ + (α∥−α⊥) cos²φ] sin(2kz) · envelope.
///
/// For ε_r > 1 the bracket is positive and the acceleration points toward
/// the nearest antinode.
pub fn axial_acceleration(
    z: f64,
    phi: f64,
    envelope: f64,
    cavity: &CavityParams,
    pol: &Polarizability,
    body: &BodyProperties,
) -> f64 {
    let k = cavity.wave_number();
    let e2 = cavity.field_amplitude * cavity.field_amplitude;
    -(e2 * k / (4.0 * body.mass())) * coupling_bracket(pol, phi) * math::sin(2.0 * k * z) * envelope
}

/// Angular acceleration of the rod,
/// φ̈ = −(E₀² / 4Θ) (α∥−α⊥) sin(2φ) cos²(kz) · envelope.
///
/// The torque aligns the rod with the polarization axis (restoring toward
/// φ = 0 mod π).
pub fn angular_acceleration(
    z: f64,
    phi: f64,
    envelope: f64,
    cavity: &CavityParams,
    pol: &Polarizability,
    body: &BodyProperties,
) -> f64 {
    let k = cavity.wave_number();
    let e2 = cavity.field_amplitude * cavity.field_amplitude;
    let c = math::cos(k * z);
    -(e2 / (4.0 * body.inertia())) * pol.anisotropy() * math::sin(2.0 * phi) * c * c * envelope
}

/// Optical potential U = −(E₀²/4) [α⊥ + (α∥−α⊥) cos²φ] cos²(kz) · envelope,
/// the antiderivative of both accelerations (−∂U/∂z = M z̈, −∂U/∂φ = Θ φ̈).
pub fn optical_potential(
    z: f64,
    phi: f64,
    envelope: f64,
    cavity: &CavityParams,
    pol: &Polarizability,
) -> f64 {
    let k = cavity.wave_number();
    let e2 = cavity.field_amplitude * cavity.field_amplitude;
    let c = math::cos(k * z);
    -(e2 / 4.0) * coupling_bracket(pol, phi) * c * c * envelope
}

/// Axial acceleration of an isotropic (spherical) scatterer with scalar
/// polarizability: the bracket collapses to α and no torque acts.
pub fn isotropic_axial_acceleration(
    z: f64,
    envelope: f64,
    cavity: &CavityParams,
    alpha: f64,
    body: &BodyProperties,
) -> f64 {
    let k = cavity.wave_number();
    let e2 = cavity.field_amplitude * cavity.field_amplitude;
    -(e2 * k / (4.0 * body.mass())) * alpha * math::sin(2.0 * k * z) * envelope
}

/// Potential of the isotropic scatterer, U = −(E₀²/4) α cos²(kz) · envelope.
pub fn isotropic_potential(z: f64, envelope: f64, cavity: &CavityParams, alpha: f64) -> f64 {
    let k = cavity.wave_number();
    let e2 = cavity.field_amplitude * cavity.field_amplitude;
    let c = math::cos(k * z);
    -(e2 / 4.0) * alpha * c * c * envelope
}

/// Small-oscillation axial trap frequency at an antinode (Hz) for a fixed
/// coupling α: ω² = E₀² k² α / 2M.
pub fn axial_trap_frequency(cavity: &CavityParams, alpha: f64, body: &BodyProperties) -> f64 {
    let k = cavity.wave_number();
    cavity.field_amplitude * k * math::sqrt(alpha / (2.0 * body.mass())) / (2.0 * PI)
}

/// Small-angle libration frequency about the polarization axis at an
/// antinode (Hz): ω² = E₀² (α∥−α⊥) / 2Θ.
pub fn libration_frequency(
    cavity: &CavityParams,
    pol: &Polarizability,
    body: &BodyProperties,
) -> f64 {
    cavity.field_amplitude * math::sqrt(pol.anisotropy() / (2.0 * body.inertia())) / (2.0 * PI)
}
