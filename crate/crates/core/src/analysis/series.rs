//! Shared helpers for sampled series: centered box averaging and extrema
//! bookkeeping for fringe envelopes.

use alloc::vec::Vec;

/// Centered sliding mean of width `window` samples; near the edges the
/// window is shifted to stay inside the series, keeping the operator linear.
pub(crate) fn boxcar_mean(samples: &[f64], window: usize) -> Vec<f64> {
    let n = samples.len();
    let w = window.max(1).min(n.max(1));
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &s in samples {
        acc += s;
        prefix.push(acc);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = i.saturating_sub(w / 2);
        let b = (a + w).min(n);
        a = b.saturating_sub(w);
        out.push((prefix[b] - prefix[a]) / (b - a) as f64);
    }
    out
}

/// Indices of strict local maxima; plateaus report their midpoint.
pub(crate) fn local_maxima(y: &[f64]) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[j] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[j] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

pub(crate) fn local_minima(y: &[f64]) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] < y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[j] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] > y[j] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Merge neighboring maxima whose inter-dip stays above 90% of the smaller
/// peak: those belong to one modulation crest (residual ripple), not two.
pub(crate) fn merge_maxima(indices: Vec<usize>, y: &[f64]) -> Vec<usize> {
    let mut acc: Vec<usize> = Vec::with_capacity(indices.len());
    for i in indices {
        if let Some(&p) = acc.last() {
            let (lo, hi) = (p.min(i), p.max(i));
            let dip = y[lo..=hi].iter().fold(f64::INFINITY, |a, &b| a.min(b));
            if dip > 0.9 * y[p].min(y[i]) {
                if y[i] > y[p] {
                    *acc.last_mut().unwrap() = i;
                }
                continue;
            }
        }
        acc.push(i);
    }
    acc
}

/// Merge neighboring minima separated by an insignificant rise.
pub(crate) fn merge_minima(indices: Vec<usize>, y: &[f64]) -> Vec<usize> {
    let mut acc: Vec<usize> = Vec::with_capacity(indices.len());
    for i in indices {
        if let Some(&p) = acc.last() {
            let (lo, hi) = (p.min(i), p.max(i));
            let rise = y[lo..=hi].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let reference = y[p].abs().max(y[i].abs()).max(1e-300);
            if rise < y[p].min(y[i]) + 0.1 * reference {
                if y[i] < y[p] {
                    *acc.last_mut().unwrap() = i;
                }
                continue;
            }
        }
        acc.push(i);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxcar_is_linear_and_mean_preserving() {
        let x = [1.0, 2.0, 0.5, 3.0, 1.5, 2.5, 0.0, 1.0];
        let y = [0.2, -1.0, 0.8, 0.3, 0.9, -0.4, 0.1, 0.6];
        let a = 1.7;
        let b = -0.6;
        let combo: Vec<f64> = x.iter().zip(&y).map(|(&u, &v)| a * u + b * v).collect();
        let lhs = boxcar_mean(&combo, 3);
        let bx = boxcar_mean(&x, 3);
        let by = boxcar_mean(&y, 3);
        for i in 0..x.len() {
            assert!((lhs[i] - (a * bx[i] + b * by[i])).abs() < 1e-14);
        }
        let flat = boxcar_mean(&[2.0; 10], 4);
        assert!(flat.iter().all(|&v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn extrema_detection() {
        let y = [0.0, 1.0, 0.0, 2.0, 2.0, 0.0, -1.0, 0.5];
        assert_eq!(local_maxima(&y), vec![1, 3]);
        assert_eq!(local_minima(&y), vec![2, 6]);
    }

    #[test]
    fn ripple_maxima_merge() {
        // Two close crests separated by a shallow dip collapse to one.
        let y = [0.0, 1.0, 0.96, 0.99, 0.0];
        assert_eq!(merge_maxima(local_maxima(&y), &y), vec![1]);
        // A deep dip keeps them distinct.
        let y2 = [0.0, 1.0, 0.3, 0.99, 0.0];
        assert_eq!(merge_maxima(local_maxima(&y2), &y2), vec![1, 3]);
    }
}
