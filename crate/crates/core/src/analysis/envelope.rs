//! Rotation averaging and the Gaussian transit-envelope fit.

use super::series::{boxcar_mean, local_maxima, merge_maxima};
use super::spectrum::{self, power_spectrum, DominantPair, SpectralWindow};
use super::AnalysisError;
use crate::math;
use crate::optics::CavityParams;
use crate::scattering::SignalTrace;
use alloc::vec::Vec;

/// Sliding-window mean over one modulation period at ν_rot = 2 f_rot,
/// window = 1/(2 f_rot_hint), on the same sampling grid. Averaging over
/// exactly one period nulls the rotation modulation.
pub fn rotation_average(
    trace: &SignalTrace,
    f_rot_hint: f64,
) -> Result<SignalTrace, AnalysisError> {
    if !(f_rot_hint > 0.0) || !f_rot_hint.is_finite() {
        return Err(AnalysisError::NonPositiveHint);
    }
    let window = math::round(trace.sample_rate / (2.0 * f_rot_hint)) as usize;
    if window < 4 {
        return Err(AnalysisError::WindowTooShort { samples: window });
    }
    Ok(SignalTrace {
        sample_rate: trace.sample_rate,
        t0: trace.t0,
        samples: boxcar_mean(&trace.samples, window),
    })
}

/// Result of fitting A·exp(−2 v_x² (t−t_c)²/w₀²) to the signal envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub amplitude: f64,
    /// Recovered vertical transit velocity (m/s).
    pub v_x: f64,
    /// Beam-center crossing time (s).
    pub t_center: f64,
    /// 1σ uncertainty of v_x from the fit covariance.
    pub sigma_v_x: f64,
    /// Root-mean-square residual of the fitted points.
    pub residual_rms: f64,
    /// Box window (s) used to suppress the fast modulation; reconstruction
    /// reuses it so both stages see the same smoothing.
    pub smooth_window: f64,
    /// Cavity waist the fit was performed against (m).
    pub waist: f64,
}

impl EnvelopeFit {
    /// Fitted intensity envelope at time `t` (unit peak).
    pub fn envelope_at(&self, t: f64) -> f64 {
        let u = self.v_x * (t - self.t_center);
        math::exp(-2.0 * u * u / (self.waist * self.waist))
    }
}

/// Least-squares fit of the Gaussian transit envelope to the rotation-
/// averaged trace, returning v_x given the cavity waist.
///
/// The envelope samples are the upper fringe anchors (merged local maxima)
/// of the smoothed trace: the signal touches cos²(kz) = 1 once per
/// translation or trap period, so those maxima trace A·exp(−2v_x²t²/w₀²)
/// regardless of the modulation underneath — this keeps the fit unbiased
/// for channelled traces too. Traces without modulation (fewer than five
/// anchors) fall back to a direct fit of all samples.
pub fn fit_envelope(
    trace: &SignalTrace,
    cavity: &CavityParams,
) -> Result<EnvelopeFit, AnalysisError> {
    let spec = power_spectrum(trace, SpectralWindow::Hann)?;
    let peaks = spectrum::prominent_peaks(&spec);
    // Smooth away the fastest dominant modulation; without peaks (pure
    // envelope) no smoothing is needed.
    let window = match spectrum::dominant_pair(&peaks) {
        DominantPair::Pair { high, .. } => {
            (math::round(trace.sample_rate / high.frequency) as usize).max(1)
        }
        DominantPair::Single(p) => (math::round(trace.sample_rate / p.frequency) as usize).max(1),
        DominantPair::None => 1,
    };
    let y1 = boxcar_mean(&trace.samples, window);
    // Two more passes quadratically suppress residual ripple before anchor
    // extraction; the fringe maxima survive with their values intact to the
    // accuracy the fit needs.
    let y3 = boxcar_mean(&boxcar_mean(&y1, window), window);

    let anchors = merge_maxima(local_maxima(&y3), &y3);
    let peak_value = y3.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut at = Vec::new();
    let mut ay = Vec::new();
    for &i in &anchors {
        if y3[i] > 0.03 * peak_value {
            at.push(trace.time_at(i));
            ay.push(y3[i]);
        }
    }

    let fit = if at.len() >= 5 {
        let init = log_quadratic_init(&at, &ay)
            .ok_or(AnalysisError::FitDiverged("log-quadratic seed is not a peak"))?;
        gauss_newton(&at, &ay, cavity.waist, init)?
    } else {
        // Direct fit on the lightly smoothed trace.
        let times: Vec<f64> = (0..y1.len()).map(|i| trace.time_at(i)).collect();
        let init = moment_init(&times, &y1, cavity.waist)?;
        gauss_newton(&times, &y1, cavity.waist, init)?
    };

    let (amplitude, v_x, t_center, sigma_v_x, residual_rms) = fit;
    // A credible transit envelope is narrower than the observation window.
    let half_width = cavity.waist / (2.0 * v_x.abs().max(1e-300));
    let span = trace.len() as f64 / trace.sample_rate;
    if !v_x.is_finite() || v_x.abs() <= 0.0 || half_width > span {
        return Err(AnalysisError::FitDiverged("no single dominant envelope lobe"));
    }
    Ok(EnvelopeFit {
        amplitude,
        v_x: math::abs(v_x),
        t_center,
        sigma_v_x,
        residual_rms,
        smooth_window: window as f64 / trace.sample_rate,
        waist: cavity.waist,
    })
}

/// Weighted quadratic fit of ln y over t as the Gauss-Newton seed:
/// ln y = a t² + b t + c with a < 0 maps to (A, v, t_c).
fn log_quadratic_init(t: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let mut s = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        if !(yi > 0.0) {
            continue;
        }
        let w = yi * yi;
        let basis = [ti * ti, ti, 1.0];
        let ly = math::ln(yi);
        for r in 0..3 {
            for c in 0..3 {
                s[r][c] += w * basis[r] * basis[c];
            }
            rhs[r] += w * basis[r] * ly;
        }
    }
    let [a, b, c] = solve3(s, rhs)?;
    if !(a < 0.0) {
        return None;
    }
    let t_c = -b / (2.0 * a);
    let amp = math::exp(c - b * b / (4.0 * a));
    Some((amp, a, t_c)) // `a` converted to v by the caller via the waist
}

fn moment_init(t: &[f64], y: &[f64], waist: f64) -> Result<(f64, f64, f64), AnalysisError> {
    let total: f64 = y.iter().sum();
    if !(total > 0.0) {
        return Err(AnalysisError::FitDiverged("signal has no positive samples"));
    }
    let t_c = t.iter().zip(y).map(|(&ti, &yi)| ti * yi).sum::<f64>() / total;
    let var = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| (ti - t_c) * (ti - t_c) * yi)
        .sum::<f64>()
        / total;
    if !(var > 0.0) {
        return Err(AnalysisError::FitDiverged("degenerate time spread"));
    }
    let v = waist / (2.0 * math::sqrt(var));
    let amp = y.iter().fold(0.0_f64, |a, &b| a.max(b));
    // Express as the log-quadratic coefficient for a uniform interface.
    let a = -2.0 * v * v / (waist * waist);
    Ok((amp, a, t_c))
}

/// Gauss-Newton refinement of (A, v, t_c); returns
/// (A, v, t_c, sigma_v, residual RMS).
fn gauss_newton(
    t: &[f64],
    y: &[f64],
    waist: f64,
    (a0, curv, tc0): (f64, f64, f64),
) -> Result<(f64, f64, f64, f64, f64), AnalysisError> {
    let w2 = waist * waist;
    let mut amp = a0;
    let mut v = waist * math::sqrt(-curv / 2.0);
    let mut t_c = tc0;
    let n = t.len();
    if n < 4 {
        return Err(AnalysisError::FitDiverged("too few envelope points"));
    }

    let mut jtj = [[0.0f64; 3]; 3];
    for _ in 0..80 {
        jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&ti, &yi) in t.iter().zip(y) {
            let tau = ti - t_c;
            let m = amp * math::exp(-2.0 * v * v * tau * tau / w2);
            let j = [
                m / amp,
                -4.0 * v * tau * tau / w2 * m,
                4.0 * v * v * tau / w2 * m,
            ];
            let r = yi - m;
            for row in 0..3 {
                for col in 0..3 {
                    jtj[row][col] += j[row] * j[col];
                }
                jtr[row] += j[row] * r;
            }
        }
        let trace3 = jtj[0][0] + jtj[1][1] + jtj[2][2];
        let mut damped = jtj;
        for (r, item) in damped.iter_mut().enumerate() {
            item[r] += 1e-12 * trace3;
        }
        let Some(delta) = solve3(damped, jtr) else {
            return Err(AnalysisError::FitDiverged("normal equations singular"));
        };
        amp += delta[0];
        v += delta[1];
        t_c += delta[2];
        if !(amp.is_finite() && v.is_finite() && t_c.is_finite()) {
            return Err(AnalysisError::FitDiverged("fit diverged to non-finite parameters"));
        }
        let scale = [amp.abs().max(1e-300), v.abs().max(1e-300), 1e-6];
        let step = delta
            .iter()
            .zip(&scale)
            .map(|(d, s)| math::abs(d / s))
            .fold(0.0, f64::max);
        if step < 1e-12 {
            break;
        }
    }

    let mut ss = 0.0;
    for (&ti, &yi) in t.iter().zip(y) {
        let tau = ti - t_c;
        let m = amp * math::exp(-2.0 * v * v * tau * tau / w2);
        ss += (yi - m) * (yi - m);
    }
    let dof = (n.max(4) - 3) as f64;
    let variance = ss / dof;
    // sigma_v from the (1,1) element of (JᵀJ)⁻¹ scaled by the residual
    // variance.
    let sigma_v = invert3_diag(jtj, 1).map_or(f64::NAN, |g| math::sqrt(variance * g));
    Ok((amp, v, t_c, sigma_v, math::sqrt(ss / n as f64)))
}

/// Solve a 3x3 linear system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if math::abs(a[row][col]) > math::abs(a[pivot][col]) {
                pivot = row;
            }
        }
        if math::abs(a[pivot][col]) < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c2 in col..3 {
                a[row][c2] -= f * a[col][c2];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c2 in row + 1..3 {
            acc -= a[row][c2] * x[c2];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Diagonal element `idx` of the inverse of a symmetric 3x3 matrix.
fn invert3_diag(a: [[f64; 3]; 3], idx: usize) -> Option<f64> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if math::abs(det) < 1e-300 {
        return None;
    }
    let [i, j] = match idx {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let cofactor = a[i][i] * a[j][j] - a[i][j] * a[j][i];
    Some(cofactor / det)
}
