//! Truncated nonlinear energy-harvesting model for wireless power transfer.
//!
//! The rectifier output current `I` and the received RF power `Q` are tied by
//! the implicit diode relation
//!
//! ```text
//! exp(R_L I / (n v_t)) (I + I_s) = rho(Q) = sum_{j=0}^{n_o/2} alpha_j Q^j
//! ```
//!
//! and the harvested DC power is `P_dc = I^2 R_L`. The crate provides
//!
//! * [`rectifier`]: model construction and the implicit solve (closed form via
//!   [`lambert`]),
//! * [`waveforms`]: even-moment factors of the input signal,
//! * [`calculus`]: analytic derivatives and numerical convexity certificates,
//! * [`positioning`]: max-min transmitter placement by successive inner
//!   approximation, with an exhaustive grid search as reference.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and the
//! parallel grid driver live in the companion `wpt` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod calculus;
mod error;
pub mod lambert;
mod math;
pub mod positioning;
pub mod rectifier;
pub mod waveforms;

pub use error::{Error, Result};
pub use rectifier::{HarvestModel, RectifierParams};
pub use waveforms::{Waveform, WaveformKind};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    math::powf(10.0, (dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * math::log10(watts) + 30.0
}
