//! Simulation and analysis toolkit for hybrid nuclear-electronic donor spin
//! qubits in silicon.
//!
//! * [`spin`]: spin operators, the donor Hamiltonian and its labelled
//!   eigenstructure.
//! * [`doublet`]: closed-form constant-m doublet analytics.
//! * [`spectroscopy`]: transition frequencies, resonance fields, matrix
//!   elements, spectra and frequency–field maps.
//! * [`bath`]: pair-correlation (CCE-2) Hahn-echo decay in a ²⁹Si bath.
//! * [`fitting`]: damped least-squares models for echo decays, relaxation
//!   rates, lines and baselines, plus Rabi spectrum peaks.

pub mod bath;
pub mod constants;
pub mod doublet;
mod error;
pub mod fitting;
pub mod spectroscopy;
pub mod spin;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use spin::{DonorEigensystem, SpinSystem};
