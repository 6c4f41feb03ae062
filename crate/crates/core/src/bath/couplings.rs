//! Donor–nucleus contact couplings and nucleus–nucleus dipolar couplings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{invalid, Error, Result};

/// Effective-mass parameters of the six-valley donor wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KohnLuttinger {
    /// Valley minimum position as a fraction of 2π/a₀.
    pub k0_fraction: f64,
    /// Transverse Bohr radius, nm.
    pub radius_a: f64,
    /// Longitudinal Bohr radius, nm.
    pub radius_b: f64,
    /// Effective-mass Rydberg, meV.
    pub rydberg_mev: f64,
    /// Donor ionization energy, meV (69 for Bi).
    pub ionization_mev: f64,
    /// Bloch-function density enhancement at the nucleus.
    pub eta: f64,
    /// Lattice constant, nm.
    pub a0: f64,
    /// Electron g-factor.
    pub g_factor: f64,
}

impl Default for KohnLuttinger {
    fn default() -> Self {
        KohnLuttinger {
            k0_fraction: 0.85,
            radius_a: 2.509,
            radius_b: 1.443,
            rydberg_mev: 31.3,
            ionization_mev: 69.0,
            eta: 186.0,
            a0: super::lattice::SILICON_A0,
            g_factor: 2.0003,
        }
    }
}

impl KohnLuttinger {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.k0_fraction,
            self.radius_a,
            self.radius_b,
            self.rydberg_mev,
            self.ionization_mev,
            self.eta,
            self.a0,
            self.g_factor,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid("Kohn–Luttinger parameters must be finite and positive");
        }
        Ok(())
    }

    /// Radius scale `n = √(E₀/E_i)`.
    pub fn radius_scale(&self) -> f64 {
        (self.rydberg_mev / self.ionization_mev).sqrt()
    }

    /// `|ψ(r)|²` in nm⁻³ at donor-relative position `r` (nm).
    pub fn density(&self, r: [f64; 3]) -> f64 {
        let n = self.radius_scale();
        let (na, nb) = (n * self.radius_a, n * self.radius_b);
        let norm = 1.0 / (PI * na * na * nb).sqrt();
        let k0 = self.k0_fraction * 2.0 * PI / self.a0;
        // The ±valleys along one axis share an envelope and cos(k₀x) is even.
        let mut psi = 0.0;
        for axis in 0..3 {
            let along = r[axis];
            let across2: f64 = (0..3).filter(|&k| k != axis).map(|k| r[k] * r[k]).sum();
            let rho = (across2 / (na * na) + along * along / (nb * nb)).sqrt();
            psi += 2.0 * norm * (-rho).exp() * (k0 * along).cos();
        }
        psi /= 6f64.sqrt();
        psi * psi
    }
}

/// Isotropic contact coupling J to a ²⁹Si nucleus at `r` (nm), MHz.
///
/// `J = (4μ₀/3)·(gμ_B/h)·(γ̄h)·η·|ψ(r)|²`. With `γ̄` in MHz/T this reduces to
/// `(4/3)·μ₀·gμ_B·η|ψ|²·γ̄`, a field in tesla times the gyromagnetic ratio.
pub fn superhyperfine_j(r: [f64; 3], kl: &KohnLuttinger, consts: &PhysicalConstants) -> Result<f64> {
    kl.validate()?;
    if r.iter().all(|c| *c == 0.0) {
        return Err(Error::Domain("contact coupling is undefined at the donor site".into()));
    }
    let density_m3 = kl.density(r) * 1e27;
    let field = 4.0 / 3.0 * consts.vacuum_permeability_mu0 * kl.g_factor * consts.bohr_magneton * kl.eta * density_m3;
    Ok(field * consts.gyro_si29)
}

/// Secular dipolar coupling `b` (MHz) between two ²⁹Si nuclei at `pk`, `pl`
/// (nm), with the field along the unit vector `b_direction`.
pub fn dipolar_b(pk: [f64; 3], pl: [f64; 3], b_direction: [f64; 3], consts: &PhysicalConstants) -> Result<f64> {
    let d = [pl[0] - pk[0], pl[1] - pk[1], pl[2] - pk[2]];
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if r2 == 0.0 {
        return invalid("dipolar coupling needs two distinct positions");
    }
    let bn = (b_direction[0].powi(2) + b_direction[1].powi(2) + b_direction[2].powi(2)).sqrt();
    if !(bn > 0.0 && bn.is_finite()) {
        return invalid("field direction must be a non-zero vector");
    }
    let cos = (d[0] * b_direction[0] + d[1] * b_direction[1] + d[2] * b_direction[2]) / (r2.sqrt() * bn);
    let r3 = (r2 * 1e-18).powf(1.5);
    let gamma_hz = consts.gyro_si29 * 1e6;
    let hz = consts.vacuum_permeability_mu0 / (4.0 * PI) * gamma_hz * gamma_hz * consts.planck_h * (1.0 - 3.0 * cos * cos)
        / r3;
    Ok(-hz * 1e-6)
}
