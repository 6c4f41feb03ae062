//! Physical constants (CODATA 2018 exact / recommended values).

use serde::{Deserialize, Serialize};

/// Fixed set of constants used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Planck constant h, J·s.
    pub planck_h: f64,
    /// Bohr magneton, J/T.
    pub bohr_magneton: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann_kb: f64,
    /// Vacuum permeability μ₀, T²·m³/J.
    pub vacuum_permeability_mu0: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// ²⁹Si gyromagnetic ratio γ/2π, MHz/T (negative).
    pub gyro_si29: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        planck_h: 6.626_070_15e-34,
        bohr_magneton: 9.274_010_078_3e-24,
        boltzmann_kb: 1.380_649e-23,
        vacuum_permeability_mu0: 1.256_637_062_12e-6,
        hbar: 6.626_070_15e-34 / (2.0 * std::f64::consts::PI),
        gyro_si29: -8.4655,
    };

    /// Electron Zeeman frequency per tesla, MHz/T, for a given g-factor.
    pub fn electron_zeeman_mhz_per_tesla(&self, g_factor: f64) -> f64 {
        g_factor * self.bohr_magneton / self.planck_h * 1e-6
    }

    /// Stable textual form used for hashing the constant set.
    pub fn canonical_string(&self) -> String {
        format!(
            "h={:.16e};muB={:.16e};kB={:.16e};mu0={:.16e};hbar={:.16e};gSi29={:.16e}",
            self.planck_h,
            self.bohr_magneton,
            self.boltzmann_kb,
            self.vacuum_permeability_mu0,
            self.hbar,
            self.gyro_si29
        )
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}
