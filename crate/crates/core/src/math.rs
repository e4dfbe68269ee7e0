//! Thin wrappers over `libm` so the crate stays `no_std`.

pub(crate) use libm::{cos, exp, fabs as abs, log as ln, sin, sqrt};

pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub(crate) fn acos(x: f64) -> f64 {
    libm::acos(x)
}

/// Unnormalized sinc, sin(u)/u with sinc(0) = 1.
pub(crate) fn sinc(u: f64) -> f64 {
    if abs(u) < 1e-8 {
        // sin(u)/u = 1 - u^2/6 + O(u^4); below 1e-8 the quadratic term is
        // beneath f64 resolution.
        1.0
    } else {
        sin(u) / u
    }
}

pub(crate) fn hypot3(x: f64, y: f64, z: f64) -> f64 {
    sqrt(x * x + y * y + z * z)
}
