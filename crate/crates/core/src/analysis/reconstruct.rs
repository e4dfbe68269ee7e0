//! Axial trajectory reconstruction from the rotation-averaged modulation and
//! instantaneous rotation-rate tracking from scattering-maxima spacing.

use super::envelope::EnvelopeFit;
use super::series::{boxcar_mean, local_maxima, local_minima, merge_maxima, merge_minima};
use super::AnalysisError;
use crate::math;
use crate::optics::CavityParams;
use crate::scattering::SignalTrace;
use alloc::vec::Vec;

/// Axial trajectory recovered from a trace, up to a global sign and an
/// offset by a whole number of half-wavelengths: the intensity only measures
/// |cos(kz)|, so neither is observable.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialReconstruction {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    /// Normalized modulation depth cos²(kz) at each output sample.
    pub modulation: Vec<f64>,
    /// Set when more than 2% of the normalized samples fell outside
    /// [−0.05, 1.05] before clipping: the cos²(kz)·envelope model does not
    /// describe this trace well.
    pub model_mismatch: bool,
}

const TOUCH_HIGH: f64 = 0.96;
const TOUCH_LOW: f64 = 0.04;

/// A detected touch event: the modulation reached 1 (antinode crossing,
/// branch sign flips) or 0 (node crossing, branch flips and the antinode
/// index advances).
#[derive(Debug, Clone, Copy, PartialEq)]
struct TouchEvent {
    index: usize,
    /// true = antinode (m → 1), false = node (m → 0).
    antinode: bool,
}

/// Reconstruct z(t) from the rotation-averaged trace in the region where the
/// fitted envelope exceeds 0.1.
///
/// The averaged trace is normalized against empirical upper and lower fringe
/// envelopes (interpolated through its merged modulation extrema; minima
/// qualify for the lower envelope only when they are near-zero relative to
/// the local upper envelope, so the bounded dips of a channelled segment are
/// not mistaken for node touches). The normalized modulation m ≈ cos²(kz)
/// then unwraps as kz = mπ ± arccos(√m) with the branch decided by touch
/// events; touches of 1 are antinode crossings, touches of 0 node crossings.
/// Same-type neighbors with no real dip between them merge, and a deep
/// excursion between same-type touches inserts the missed opposite event, so
/// the alternation of a free flight is restored even where ripple hid one
/// extremum.
pub fn reconstruct_axial_trajectory(
    averaged: &SignalTrace,
    fit: &EnvelopeFit,
    cavity: &CavityParams,
) -> Result<AxialReconstruction, AnalysisError> {
    let n = averaged.len();
    if n < 8 {
        return Err(AnalysisError::Reconstruction("trace too short"));
    }
    let fs = averaged.sample_rate;
    let window = (math::round(fit.smooth_window * fs) as usize).max(1);
    let smoothed = boxcar_mean(&averaged.samples, window);

    // Work region: envelope > 0.06 for anchor support, output where > 0.1.
    let region = envelope_region(averaged, fit, 0.06)
        .ok_or(AnalysisError::Reconstruction("fitted envelope nowhere above threshold"))?;
    let (lo, hi) = region;
    let y: &[f64] = &smoothed[lo..=hi];
    let m_samples = normalized_modulation(y)?;
    let (m, mismatch) = (m_samples.values, m_samples.mismatch);

    let ms = boxcar_mean(&m, 5);
    let events = detect_touch_events(&m, &ms);

    // Branch integration: kz = mπ + s·θ with θ = arccos(√m) ∈ [0, π/2].
    let mut kz = Vec::with_capacity(m.len());
    let mut sign = 1.0f64;
    let mut index = 0i64;
    let mut next_event = 0usize;
    for (i, &mi) in m.iter().enumerate() {
        while next_event < events.len() && events[next_event].index == i {
            if events[next_event].antinode {
                sign = -sign;
            } else {
                index += if sign > 0.0 { 1 } else { -1 };
                sign = -sign;
            }
            next_event += 1;
        }
        let theta = math::acos(math::sqrt(mi.clamp(0.0, 1.0)));
        kz.push(index as f64 * core::f64::consts::PI + sign * theta);
    }

    let k = cavity.wave_number();
    let mut times = Vec::new();
    let mut z = Vec::new();
    let mut modulation = Vec::new();
    for (i, kzi) in kz.iter().enumerate() {
        let t = averaged.time_at(lo + i);
        if fit.envelope_at(t) > 0.1 {
            times.push(t);
            z.push(kzi / k);
            modulation.push(m[i]);
        }
    }
    if times.is_empty() {
        return Err(AnalysisError::Reconstruction("no samples with envelope > 0.1"));
    }
    Ok(AxialReconstruction {
        times,
        z,
        modulation,
        model_mismatch: mismatch,
    })
}

/// Contiguous sample range where the fitted envelope exceeds `threshold`.
fn envelope_region(
    trace: &SignalTrace,
    fit: &EnvelopeFit,
    threshold: f64,
) -> Option<(usize, usize)> {
    let radius = fit.waist * math::sqrt(math::ln(1.0 / threshold) / 2.0) / fit.v_x;
    let lo_t = fit.t_center - radius;
    let hi_t = fit.t_center + radius;
    let fs = trace.sample_rate;
    let lo = ((lo_t - trace.t0) * fs).max(0.0) as usize;
    let hi_raw = ((hi_t - trace.t0) * fs).min((trace.len() - 1) as f64);
    if hi_raw < lo as f64 {
        return None;
    }
    let hi = hi_raw as usize;
    (hi > lo + 8).then_some((lo, hi))
}

struct NormalizedModulation {
    values: Vec<f64>,
    mismatch: bool,
}

/// Fringe-normalize the smoothed region: interpolate the upper envelope
/// through merged maxima (log-linear) and the lower through near-zero merged
/// minima (linear), then map each sample to (y−lower)/(upper−lower).
fn normalized_modulation(y: &[f64]) -> Result<NormalizedModulation, AnalysisError> {
    let n = y.len();
    let ups = merge_maxima(local_maxima(y), y);
    if ups.len() < 2 {
        return Err(AnalysisError::Reconstruction("fewer than two fringe maxima"));
    }
    let mut upper = Vec::with_capacity(n);
    {
        let xs: Vec<f64> = ups.iter().map(|&i| i as f64).collect();
        let ln_ys: Vec<f64> = ups
            .iter()
            .map(|&i| math::ln(y[i].max(f64::MIN_POSITIVE)))
            .collect();
        for i in 0..n {
            upper.push(math::exp(interp_linear(&xs, &ln_ys, i as f64)));
        }
    }

    let lows: Vec<usize> = merge_minima(local_minima(y), y)
        .into_iter()
        .filter(|&i| y[i] < 0.15 * upper[i])
        .collect();
    let mut lower = Vec::with_capacity(n);
    if lows.len() >= 2 {
        let xs: Vec<f64> = lows.iter().map(|&i| i as f64).collect();
        let ys: Vec<f64> = lows.iter().map(|&i| y[i].max(0.0)).collect();
        for i in 0..n {
            lower.push(interp_linear(&xs, &ys, i as f64).min(0.8 * upper[i]));
        }
    } else {
        lower.resize(n, 0.0);
    }

    let mut values = Vec::with_capacity(n);
    let mut outliers = 0usize;
    for i in 0..n {
        let span = (upper[i] - lower[i]).max(f64::MIN_POSITIVE);
        let r = (y[i] - lower[i]) / span;
        if !(-0.05..=1.05).contains(&r) {
            outliers += 1;
        }
        values.push(r.clamp(0.0, 1.0));
    }
    Ok(NormalizedModulation {
        values,
        mismatch: outliers * 50 > n,
    })
}

/// Piecewise-linear interpolation with flat extrapolation beyond the ends.
fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => ys[i],
        Err(0) => ys[0],
        Err(i) if i == xs.len() => ys[xs.len() - 1],
        Err(i) => {
            let f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + f * (ys[i] - ys[i - 1])
        }
    }
}

/// Touch-event detection: contiguous zones of the smoothed modulation above
/// [`TOUCH_HIGH`] / below [`TOUCH_LOW`] each yield one event at the extreme
/// sample, followed by a merge/insert pass restoring strict node/antinode
/// alternation where the dip depth proves what happened in between.
fn detect_touch_events(m: &[f64], ms: &[f64]) -> Vec<TouchEvent> {
    let n = m.len();
    let mut events: Vec<TouchEvent> = Vec::new();
    let mut state: i8 = if ms[0] >= TOUCH_HIGH {
        1
    } else if ms[0] <= TOUCH_LOW {
        -1
    } else {
        0
    };
    let mut zone_start = 0usize;
    for i in 0..n {
        match state {
            0 => {
                if ms[i] >= TOUCH_HIGH {
                    state = 1;
                    zone_start = i;
                } else if ms[i] <= TOUCH_LOW {
                    state = -1;
                    zone_start = i;
                }
            }
            1 if ms[i] < TOUCH_HIGH => {
                events.push(TouchEvent {
                    index: arg_extreme(m, zone_start, i, true),
                    antinode: true,
                });
                state = 0;
            }
            -1 if ms[i] > TOUCH_LOW => {
                events.push(TouchEvent {
                    index: arg_extreme(m, zone_start, i, false),
                    antinode: false,
                });
                state = 0;
            }
            _ => {}
        }
    }
    // A zone still open at the series end is a real touch too, unless it
    // spans the whole series (no crossing was ever observed).
    if state != 0 && zone_start > 0 {
        events.push(TouchEvent {
            index: arg_extreme(m, zone_start, n, state == 1),
            antinode: state == 1,
        });
    }

    // Merge ripple double-fires and insert missed opposites. Between two
    // antinode touches, a dip below 0.2 can only be a missed node; a dip
    // staying above 0.8 means the zone split on ripple. Dips in between are
    // genuine turning points of a channelled oscillation and stand alone.
    for _ in 0..4 {
        let mut out: Vec<TouchEvent> = Vec::with_capacity(events.len());
        let mut changed = false;
        for ev in &events {
            if let Some(prev) = out.last().copied() {
                if prev.antinode == ev.antinode {
                    let (a, b) = (prev.index.min(ev.index), prev.index.max(ev.index));
                    if ev.antinode {
                        let dip = m[a..=b].iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
                        if dip > 0.8 {
                            if m[ev.index] > m[prev.index] {
                                out.last_mut().unwrap().index = ev.index;
                            }
                            changed = true;
                            continue;
                        }
                        if dip <= 0.2 {
                            out.push(TouchEvent {
                                index: arg_extreme(m, a, b + 1, false),
                                antinode: false,
                            });
                            changed = true;
                        }
                    } else {
                        let rise = m[a..=b].iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
                        if rise < 0.2 {
                            if m[ev.index] < m[prev.index] {
                                out.last_mut().unwrap().index = ev.index;
                            }
                            changed = true;
                            continue;
                        }
                        if rise >= 0.8 {
                            out.push(TouchEvent {
                                index: arg_extreme(m, a, b + 1, true),
                                antinode: true,
                            });
                            changed = true;
                        }
                    }
                }
            }
            out.push(*ev);
        }
        events = out;
        if !changed {
            break;
        }
    }
    events
}

fn arg_extreme(m: &[f64], lo: usize, hi: usize, max: bool) -> usize {
    let hi = hi.max(lo + 1).min(m.len());
    let mut best = lo;
    for i in lo..hi {
        let better = if max { m[i] > m[best] } else { m[i] < m[best] };
        if better {
            best = i;
        }
    }
    best
}

/// Instantaneous rotation rates from the spacing of adjacent scattering
/// maxima, which sit half a rotation period apart.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationRateSeries {
    /// Midpoints of each maxima pair (s), strictly increasing.
    pub times: Vec<f64>,
    /// Rotation rate 1/(2 Δt) of each pair (Hz).
    pub rates: Vec<f64>,
}

/// Track the rotation rate along a trace: local maxima at least
/// `min_prominence` of the global maximum (sub-sample position from
/// parabolic interpolation) are read as alignment flashes at φ ≡ 0 mod π,
/// so adjacent maxima are half a rotation period apart.
pub fn instantaneous_rotation_rate(
    trace: &SignalTrace,
    min_prominence: f64,
) -> Result<RotationRateSeries, AnalysisError> {
    let y = &trace.samples;
    let n = y.len();
    let peak = y.iter().fold(0.0_f64, |a, &b| a.max(b));
    let threshold = min_prominence * peak;
    let mut maxima_times = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= threshold {
            let denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
            let delta = if denom < 0.0 {
                (0.5 * (y[i - 1] - y[i + 1]) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            maxima_times.push(trace.t0 + (i as f64 + delta) / trace.sample_rate);
        }
    }
    if maxima_times.len() < 3 {
        return Err(AnalysisError::TooFewMaxima {
            found: maxima_times.len(),
            required: 3,
        });
    }
    let mut times = Vec::with_capacity(maxima_times.len() - 1);
    let mut rates = Vec::with_capacity(maxima_times.len() - 1);
    for pair in maxima_times.windows(2) {
        let dt = pair[1] - pair[0];
        if dt > 0.0 {
            times.push(0.5 * (pair[0] + pair[1]));
            rates.push(1.0 / (2.0 * dt));
        }
    }
    Ok(RotationRateSeries { times, rates })
}
