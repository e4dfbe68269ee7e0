//! Physical constants (SI, CODATA 2018).

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Atomic mass unit (kg).
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
