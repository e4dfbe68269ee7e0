//! Recovery of kinematics from normalized scattering traces.
//!
//! A freely transiting rod modulates its scattered light at two frequencies:
//! ν_trans = 2 v_z/λ from crossing standing-wave nodes and ν_rot = 2 f_rot
//! from the π-periodic orientation dependence. The submodules estimate those
//! lines ([`power_spectrum`], [`prominent_peaks`]), fit the Gaussian transit
//! envelope for v_x ([`fit_envelope`]), average out the fast rotation
//! ([`rotation_average`]), reconstruct the axial trajectory from the
//! averaged modulation ([`reconstruct_axial_trajectory`]), and track the
//! instantaneous rotation rate from scattering-maxima spacing
//! ([`instantaneous_rotation_rate`]).

mod envelope;
mod reconstruct;
mod series;
mod spectrum;

pub use envelope::{fit_envelope, rotation_average, EnvelopeFit};
pub use reconstruct::{
    instantaneous_rotation_rate, reconstruct_axial_trajectory, AxialReconstruction,
    RotationRateSeries,
};
pub use spectrum::{
    dominant_frequency, power_spectrum, power_spectrum_of, prominent_peaks, DominantPair,
    Spectrum, SpectralPeak, SpectralWindow, MIN_SPECTRUM_SAMPLES,
};

use crate::optics::CavityParams;
use crate::scattering::SignalTrace;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// Too few samples for a spectral estimate.
    TooShort { samples: usize, required: usize },
    /// A frequency hint must be positive.
    NonPositiveHint,
    /// The averaging window covers fewer than 4 samples.
    WindowTooShort { samples: usize },
    /// No prominent spectral structure to work with.
    NoPeaks,
    /// The envelope fit did not converge to a meaningful Gaussian.
    FitDiverged(&'static str),
    /// Too few scattering maxima for rate tracking.
    TooFewMaxima { found: usize, required: usize },
    /// Trajectory reconstruction could not proceed.
    Reconstruction(&'static str),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::TooShort { samples, required } => {
                write!(f, "trace has {samples} samples, need at least {required}")
            }
            AnalysisError::NonPositiveHint => write!(f, "frequency hint must be positive"),
            AnalysisError::WindowTooShort { samples } => {
                write!(f, "averaging window of {samples} samples is below the 4-sample minimum")
            }
            AnalysisError::NoPeaks => write!(f, "no prominent spectral peaks"),
            AnalysisError::FitDiverged(what) => write!(f, "envelope fit failed: {what}"),
            AnalysisError::TooFewMaxima { found, required } => {
                write!(f, "found {found} scattering maxima, need at least {required}")
            }
            AnalysisError::Reconstruction(what) => write!(f, "reconstruction failed: {what}"),
        }
    }
}

impl core::error::Error for AnalysisError {}

/// A recovered value with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub sigma: f64,
}

/// Kinematics recovered from one trace. Fields are absent when the trace
/// does not carry the corresponding signature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicsEstimate {
    /// Vertical transit velocity from the envelope fit (m/s).
    pub v_x: Option<Measurement>,
    /// Axial velocity from ν_trans (m/s).
    pub v_z: Option<Measurement>,
    /// Rotation rate from ν_rot (Hz).
    pub f_rot: Option<Measurement>,
}

/// Recover (v_x, v_z, f_rot) from a normalized trace.
///
/// The two most powerful prominent peaks (harmonics of a stronger line
/// rejected) are read as ν_trans (lower) and ν_rot (higher); with a single
/// prominent line, a detectable second harmonic marks it as rotational
/// (the orientation modulation is strongly anharmonic while the cos²(kz)
/// translation tone is pure). Uniform rescaling of the raw trace does not
/// change the estimate since traces are normalized.
pub fn extract_kinematics(
    trace: &SignalTrace,
    cavity: &CavityParams,
) -> Result<KinematicsEstimate, AnalysisError> {
    let spec = power_spectrum(trace, SpectralWindow::Hann)?;
    let peaks = prominent_peaks(&spec);
    let mut estimate = KinematicsEstimate::default();

    match spectrum::dominant_pair(&peaks) {
        DominantPair::Pair { low, high } => {
            estimate.v_z = Some(Measurement {
                value: low.frequency * cavity.wavelength / 2.0,
                sigma: low.sigma_hz * cavity.wavelength / 2.0,
            });
            estimate.f_rot = Some(Measurement {
                value: high.frequency / 2.0,
                sigma: high.sigma_hz / 2.0,
            });
        }
        DominantPair::Single(peak) => {
            // Harmonic presence test: rotational modulation carries power at
            // 2ν_rot, a pure translation tone does not.
            let harmonic_bin = (2.0 * peak.frequency / spec.bin_hz) as usize;
            let lo = harmonic_bin.saturating_sub(2);
            let hi = (harmonic_bin + 3).min(spec.power.len());
            let harmonic_power: f64 = if lo < hi {
                spec.power[lo..hi].iter().fold(0.0, |a, &b| a.max(b))
            } else {
                0.0
            };
            if harmonic_power >= 1e-3 * peak.power {
                estimate.f_rot = Some(Measurement {
                    value: peak.frequency / 2.0,
                    sigma: peak.sigma_hz / 2.0,
                });
            } else {
                estimate.v_z = Some(Measurement {
                    value: peak.frequency * cavity.wavelength / 2.0,
                    sigma: peak.sigma_hz * cavity.wavelength / 2.0,
                });
            }
        }
        DominantPair::None => {}
    }

    if let Ok(fit) = fit_envelope(trace, cavity) {
        estimate.v_x = Some(Measurement {
            value: fit.v_x,
            sigma: fit.sigma_v_x,
        });
    }
    Ok(estimate)
}
