//! Core physics and signal analysis for dielectric nanorods transiting a
//! standing-wave cavity field.
//!
//! The crate covers four layers:
//!
//! * [`optics`] — static quantities: needle-limit polarizabilities, cavity
//!   field description, and the instantaneous optical force, torque, and
//!   potential acting on a rod in the standing wave.
//! * [`dynamics`] — fixed-step RK4 integration of the planar equations of
//!   motion through the Gaussian beam envelope, plus channelling
//!   classification and transit summaries.
//! * [`scattering`] — the scattered-light intensity of a dielectric needle
//!   in the standing wave and synthesis of normalized detector traces along
//!   simulated trajectories.
//! * [`analysis`] — recovery of kinematics from scattering traces: power
//!   spectra, peak extraction, envelope fits, rotation averaging, axial
//!   trajectory reconstruction, and instantaneous rotation-rate tracking.
//!
//! The crate is `no_std` (with `alloc`); float math goes through `libm` so
//! results do not depend on the host's libm.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod constants;
pub mod dynamics;
mod fft;
mod math;
pub mod optics;
pub mod scattering;
