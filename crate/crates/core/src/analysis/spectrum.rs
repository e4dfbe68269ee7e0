//! One-sided power spectra and prominent-peak extraction with sub-bin
//! parabolic interpolation on log power.

use super::AnalysisError;
use crate::fft;
use crate::math;
use crate::scattering::SignalTrace;
use alloc::vec::Vec;

/// Minimum number of samples for a spectral estimate.
pub const MIN_SPECTRUM_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralWindow {
    /// No taper; preserves Parseval equality with the time-domain power.
    Rectangular,
    /// Hann taper for sidelobe suppression when hunting peaks.
    Hann,
}

/// One-sided power spectrum. With the rectangular window the bin powers sum
/// to the time-domain mean-square power of the analyzed samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Frequency spacing between bins (Hz); bin k sits at k·bin_hz, the last
    /// bin at the Nyquist frequency.
    pub bin_hz: f64,
    pub power: Vec<f64>,
    pub window: SpectralWindow,
    /// Number of time samples analyzed (before zero padding).
    pub analyzed_samples: usize,
}

/// Spectrum of a raw uniformly sampled series.
pub fn power_spectrum_of(
    samples: &[f64],
    sample_rate: f64,
    window: SpectralWindow,
) -> Result<Spectrum, AnalysisError> {
    let n = samples.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(AnalysisError::TooShort {
            samples: n,
            required: MIN_SPECTRUM_SAMPLES,
        });
    }
    // Zero-pad to 4x the length (next power of two) for peak interpolation.
    let padded = (4 * n).next_power_of_two();
    let mut windowed = Vec::with_capacity(n);
    match window {
        SpectralWindow::Rectangular => windowed.extend_from_slice(samples),
        SpectralWindow::Hann => {
            let denom = (n - 1) as f64;
            for (i, &s) in samples.iter().enumerate() {
                let w = 0.5 * (1.0 - math::cos(2.0 * core::f64::consts::PI * i as f64 / denom));
                windowed.push(s * w);
            }
        }
    }
    let spectrum = fft::fft_real_padded(&windowed, padded);
    let scale = 1.0 / (padded as f64 * n as f64);
    let half = padded / 2;
    let mut power = Vec::with_capacity(half + 1);
    for (k, c) in spectrum[..=half].iter().enumerate() {
        let coef = if k == 0 || k == half { 1.0 } else { 2.0 };
        power.push(coef * c.norm_sqr() * scale);
    }
    Ok(Spectrum {
        bin_hz: sample_rate / padded as f64,
        power,
        window,
        analyzed_samples: n,
    })
}

/// Spectrum of a normalized signal trace.
pub fn power_spectrum(
    trace: &SignalTrace,
    window: SpectralWindow,
) -> Result<Spectrum, AnalysisError> {
    power_spectrum_of(&trace.samples, trace.sample_rate, window)
}

/// A spectral line with sub-bin frequency from parabolic interpolation of
/// log power and a Gaussian-equivalent width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub frequency: f64,
    /// Power of the hosting bin.
    pub power: f64,
    /// Width from the log-power curvature (exact for Gaussian lines).
    pub sigma_hz: f64,
    pub bin: usize,
}

/// Prominent nonzero-frequency peaks, strongest first.
///
/// A local maximum counts as prominent when its power reaches 10x the median
/// bin power and its monotone lobe carries at least 2% of the total
/// nonzero-frequency power; the second condition rejects the near-flat
/// maxima of structureless (noise) spectra. The monotone lobe descending
/// from the zero-frequency bin is excluded, so the Gaussian transit envelope
/// never counts as a peak.
pub fn prominent_peaks(spec: &Spectrum) -> Vec<SpectralPeak> {
    let p = &spec.power;
    let n = p.len();
    if n < 4 {
        return Vec::new();
    }

    let mut sorted: Vec<f64> = p[1..].to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    let total: f64 = p[1..].iter().sum();
    if !(total > 0.0) {
        return Vec::new();
    }

    // Skip the DC lobe: walk right while power decreases.
    let mut dc_edge = 1;
    while dc_edge + 1 < n && p[dc_edge] <= p[dc_edge - 1] {
        dc_edge += 1;
    }

    let mut peaks = Vec::new();
    for i in (dc_edge.max(1) + 1)..n - 1 {
        if !(p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] >= 10.0 * median) {
            continue;
        }
        let mut lo = i;
        while lo > 1 && p[lo - 1] < p[lo] {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < n && p[hi + 1] < p[hi] {
            hi += 1;
        }
        let lobe: f64 = p[lo..=hi].iter().sum();
        if lobe < 0.02 * total {
            continue;
        }
        peaks.push(interpolate_peak(spec, i));
    }
    // Strongest first; equal powers resolved toward lower frequency.
    peaks.sort_by(|a, b| b.power.total_cmp(&a.power).then(a.bin.cmp(&b.bin)));
    peaks
}

/// Quadratic interpolation on log power around bin `i`.
fn interpolate_peak(spec: &Spectrum, i: usize) -> SpectralPeak {
    let p = &spec.power;
    let tiny = f64::MIN_POSITIVE;
    let l0 = math::ln(p[i - 1].max(tiny));
    let l1 = math::ln(p[i].max(tiny));
    let l2 = math::ln(p[i + 1].max(tiny));
    let curvature = l0 - 2.0 * l1 + l2;
    let (delta, sigma_bins) = if curvature < 0.0 {
        (
            0.5 * (l0 - l2) / curvature,
            math::sqrt(-1.0 / curvature),
        )
    } else {
        (0.0, 1.0)
    };
    SpectralPeak {
        frequency: (i as f64 + delta) * spec.bin_hz,
        power: p[i],
        sigma_hz: sigma_bins * spec.bin_hz,
        bin: i,
    }
}

/// The dominant modulation pair of a trace's peak list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominantPair {
    None,
    Single(SpectralPeak),
    Pair {
        /// Lower-frequency line of the pair (ν_trans for a free transit).
        low: SpectralPeak,
        /// Higher-frequency line (ν_rot).
        high: SpectralPeak,
    },
}

/// Pick the two most powerful peaks, skipping candidates sitting at an
/// integer multiple (2x-4x) of an already accepted stronger line; those are
/// harmonics of the anharmonic rotation modulation, not independent lines.
pub(crate) fn dominant_pair(peaks: &[SpectralPeak]) -> DominantPair {
    let mut accepted: Vec<SpectralPeak> = Vec::with_capacity(2);
    'next: for peak in peaks {
        for a in &accepted {
            for mult in [2.0, 3.0, 4.0] {
                let target = mult * a.frequency;
                if math::abs(peak.frequency - target) < 0.02 * target {
                    continue 'next;
                }
            }
        }
        accepted.push(*peak);
        if accepted.len() == 2 {
            break;
        }
    }
    match accepted.len() {
        0 => DominantPair::None,
        1 => DominantPair::Single(accepted[0]),
        _ => {
            let (a, b) = (accepted[0], accepted[1]);
            if a.frequency <= b.frequency {
                DominantPair::Pair { low: a, high: b }
            } else {
                DominantPair::Pair { low: b, high: a }
            }
        }
    }
}

/// Strongest prominent line of a raw series, falling back to the largest
/// interior bin when the lobe filter rejects everything.
pub fn dominant_frequency(samples: &[f64], sample_rate: f64) -> Option<SpectralPeak> {
    let spec = power_spectrum_of(samples, sample_rate, SpectralWindow::Hann).ok()?;
    if let Some(peak) = prominent_peaks(&spec).first() {
        return Some(*peak);
    }
    let mut best = None::<usize>;
    for i in 2..spec.power.len() - 1 {
        if spec.power[i] > spec.power[i - 1] && spec.power[i] >= spec.power[i + 1] {
            if best.map_or(true, |b| spec.power[i] > spec.power[b]) {
                best = Some(i);
            }
        }
    }
    best.map(|i| interpolate_peak(&spec, i))
}
