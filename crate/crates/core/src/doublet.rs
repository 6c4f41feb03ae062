//! Closed-form analytics of the constant-m doublets.
//!
//! For S = 1/2 the donor Hamiltonian splits into 2×2 blocks
//! `h_m = Δ_m σz + Ω_m σx − ε_m 1` on `{|↑, m−½⟩, |↓, m+½⟩}` with
//!
//! * `Δ_m = ½[mA + f₀(1+δ)]`
//! * `Ω_m = (A/2)√((I+½)² − m²)`  (for I = 9/2 this is `(A/2)√(25 − m²)`)
//! * `ε_m = A/4 + mδf₀`
//!
//! so `E± = ±β_m − ε_m` with `β_m² = Δ_m² + Ω_m²`, and the eigenvectors are
//! parameterized by the mixing angle `θ_m = atan2(Ω_m, Δ_m) ∈ (0, π)`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spin::{Branch, CVector, SpinSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletParams {
    pub m: f64,
    pub field_b: f64,
    pub delta_m: f64,
    pub omega_m: f64,
    pub epsilon_m: f64,
    pub beta_m: f64,
    pub theta_m: f64,
}

/// One doublet eigenstate in the form
/// `|+,m⟩ = cos(θ/2)|↑,m−½⟩ + sin(θ/2)|↓,m+½⟩`,
/// `|−,m⟩ = cos(θ/2)|↓,m+½⟩ − sin(θ/2)|↑,m−½⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletState {
    pub m: f64,
    pub branch: Branch,
    pub amplitude_cos: f64,
    pub amplitude_sin: f64,
}

fn check_m(sys: &SpinSystem, m: f64) -> Result<i32> {
    let twice = 2.0 * m;
    if !twice.is_finite() || (twice - twice.round()).abs() > 1e-12 {
        return invalid(format!("m = {m} is not a half-integer"));
    }
    let twice = twice.round() as i32;
    let n_nuc = sys.nuclear_spin.multiplicity() as i32;
    if (twice + n_nuc) % 2 != 0 {
        return invalid(format!("m = {m} has the wrong parity for I = {}", sys.nuclear_spin));
    }
    if twice.abs() > n_nuc - 2 {
        return invalid(format!(
            "|m| = {} exceeds I − 1/2 = {}",
            m.abs(),
            sys.nuclear_spin.value() - 0.5
        ));
    }
    Ok(twice)
}

pub fn doublet_params(sys: &SpinSystem, m: f64, field_b: f64) -> Result<DoubletParams> {
    sys.validate()?;
    check_m(sys, m)?;
    if !(field_b >= 0.0 && field_b.is_finite()) {
        return invalid(format!("field must be finite and non-negative, got {field_b}"));
    }
    let a = sys.hyperfine_a;
    let f0 = sys.f0(field_b);
    let delta = sys.nuclear_ratio_delta;
    let half_span = sys.nuclear_spin.value() + 0.5;
    let delta_m = 0.5 * (m * a + f0 * (1.0 + delta));
    let omega_m = 0.5 * a * (half_span * half_span - m * m).sqrt();
    let epsilon_m = 0.25 * a + m * delta * f0;
    let beta_m = delta_m.hypot(omega_m);
    let theta_m = omega_m.atan2(delta_m);
    Ok(DoubletParams { m, field_b, delta_m, omega_m, epsilon_m, beta_m, theta_m })
}

/// `(E₊, E₋) = (β − ε, −β − ε)` in MHz.
pub fn doublet_energies(p: &DoubletParams) -> (f64, f64) {
    (p.beta_m - p.epsilon_m, -p.beta_m - p.epsilon_m)
}

/// Energies of the two unmixed states `m = ±(I + ½)`:
/// `±½f₀ ∓ I f₀δ + IA/2` (for Si:Bi, `±½f₀ ∓ (9/2)f₀δ + 9A/4`).
pub fn unmixed_energies(sys: &SpinSystem, field_b: f64) -> Result<(f64, f64)> {
    sys.validate()?;
    if !(field_b >= 0.0 && field_b.is_finite()) {
        return invalid(format!("field must be finite and non-negative, got {field_b}"));
    }
    let f0 = sys.f0(field_b);
    let i = sys.nuclear_spin.value();
    let nz = i * f0 * sys.nuclear_ratio_delta;
    let hf = i * sys.hyperfine_a / 2.0;
    Ok((0.5 * f0 - nz + hf, -0.5 * f0 + nz + hf))
}

/// Field at which `Δ_m = 0` (θ = π/2, maximal mixing):
/// `B = −mA h / (gμ_B (1+δ))`. Only negative m have a positive root.
pub fn bell_field(sys: &SpinSystem, m: f64) -> Result<f64> {
    check_m(sys, m)?;
    if m >= 0.0 {
        return Err(Error::Domain(format!("Δ_m has no positive-field root for m = {m}")));
    }
    Ok(sys.field_for_f0(-m * sys.hyperfine_a / (1.0 + sys.nuclear_ratio_delta)))
}

pub fn doublet_state(p: &DoubletParams, branch: Branch) -> DoubletState {
    DoubletState {
        m: p.m,
        branch,
        amplitude_cos: (p.theta_m / 2.0).cos(),
        amplitude_sin: (p.theta_m / 2.0).sin(),
    }
}

impl DoubletState {
    /// Product-basis kets `(|↑, m−½⟩, |↓, m+½⟩)` as basis indices.
    pub fn basis_kets(&self, sys: &SpinSystem) -> (usize, usize) {
        let twice_m = (2.0 * self.m).round() as i32;
        (
            sys.basis_index(1, twice_m - 1).expect("doublet ket |↑, m−½⟩ exists"),
            sys.basis_index(-1, twice_m + 1).expect("doublet ket |↓, m+½⟩ exists"),
        )
    }

    pub fn to_vector(&self, sys: &SpinSystem) -> CVector {
        let (up, down) = self.basis_kets(sys);
        let mut v = CVector::from_element(sys.dim(), Complex::new(0.0, 0.0));
        match self.branch {
            Branch::Upper => {
                v[up] = Complex::new(self.amplitude_cos, 0.0);
                v[down] = Complex::new(self.amplitude_sin, 0.0);
            }
            Branch::Lower => {
                v[down] = Complex::new(self.amplitude_cos, 0.0);
                v[up] = Complex::new(-self.amplitude_sin, 0.0);
            }
        }
        v
    }
}
