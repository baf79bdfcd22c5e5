//! Design, simulation, and calibration toolkit for impedance-transformed
//! Josephson parametric amplifiers.
//!
//! The library is organized around the workflow of such a device:
//!
//! * [`taper`] synthesizes a Klopfenstein impedance profile and realizes it
//!   as a coplanar-waveguide geometry (center-trace width vs. position at a
//!   fixed gap).
//! * [`network`] treats the taper as a cascade of uniform transmission-line
//!   segments: ABCD algebra, S-parameters with mixed port references,
//!   Touchstone export, and the complex environment impedance seen by the
//!   resonator through the taper.
//! * [`paramp`] models the flux-pumped nonlinear resonator: flux tuning,
//!   pump coupling, parametric gain in the rotating-wave lumped model and in
//!   the embedded model with a frequency-dependent environment.
//! * [`noise`] provides SNR-improvement and noise-temperature arithmetic for
//!   the two-stage amplification chain, quantum-limit references, and
//!   intracavity photon power.
//! * [`calibrate`] extracts device parameters from measured (or synthetic)
//!   data: tuning-curve and reflection-resonance fits, Stark/dephasing
//!   photon calibration, attenuation fits, and 1-dB compression points.
//!
//! Frequency sweeps are data-parallel; the default `parallel` feature runs
//! them on a rayon pool, and disabling it falls back to sequential iteration
//! with identical results.

// Validation uses `!(x > 0.0)` so NaN inputs are rejected together with
// out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod error;
mod exec;
pub mod network;
pub mod noise;
pub mod optimize;
pub mod paramp;
pub mod special;
pub mod taper;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant (J s), exact by definition.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Boltzmann constant (J/K), exact by definition.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Elementary charge (C), exact by definition.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Magnetic flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Render a value with 12 significant digits in scientific notation; the
/// fixed width keeps every exported file byte-deterministic.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Round to 12 significant digits (used before JSON serialization so
/// summaries carry the same precision as the CSV interchange files).
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format_sig12(x).parse().unwrap_or(x)
}
