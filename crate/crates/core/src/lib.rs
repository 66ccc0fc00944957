//! Design and evaluation of electric-field kick waveforms that drive
//! Rydberg-enabled geometric-phase gates in linear trapped-ion crystals.
//!
//! The crate is organised bottom-up:
//!
//! * [`trap`]: bare and polarizability-shifted secular frequencies.
//! * [`crystal`]: equilibrium positions and state-dependent normal modes.
//! * [`dynamics`]: phase-space displacements, geometric phases, gate reports.
//! * [`kick`]: the discrete four-kick scheme and its distortion model.
//! * [`optimizer`]: null-space waveform synthesis (slices and Fourier).
//! * [`feasibility`]: field/excursion limits and principal-quantum-number scaling.
//! * [`pair_scan`]: all-to-all gate study over every ion pair of a crystal.

pub mod constants;
pub mod crystal;
pub mod dynamics;
pub mod error;
pub mod feasibility;
pub mod integrals;
pub mod kick;
pub mod numeric;
pub mod optimizer;
pub mod pair_scan;
pub mod scenario;
mod span;
pub mod trap;
pub mod waveform;

pub use error::{Error, Result};
