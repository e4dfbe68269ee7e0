//! Minimal power-of-two FFT for the spectral estimators.
//!
//! Iterative radix-2 decimation-in-time with twiddles computed per butterfly
//! from sin/cos; accuracy is what the spectral Parseval checks demand
//! (relative 1e-10 against direct summation) at the trace lengths involved
//! (tens of thousands of samples).

use crate::math;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// In-place forward DFT (negative-exponent convention). `buf.len()` must be
/// a power of two.
pub(crate) fn fft_in_place(buf: &mut [Complex]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n < 2 {
        return;
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // Direct trig per twiddle keeps rounding independent of n.
                let w = Complex::new(math::cos(ang * k as f64), math::sin(ang * k as f64));
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Forward DFT of a real sequence zero-padded to `padded_len` (a power of
/// two); returns the full complex spectrum.
pub(crate) fn fft_real_padded(samples: &[f64], padded_len: usize) -> Vec<Complex> {
    debug_assert!(padded_len.is_power_of_two() && padded_len >= samples.len());
    let mut buf = Vec::with_capacity(padded_len);
    buf.extend(samples.iter().map(|&x| Complex::new(x, 0.0)));
    buf.resize(padded_len, Complex::default());
    fft_in_place(&mut buf);
    buf
}
