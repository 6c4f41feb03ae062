use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::operators::{CMatrix, HalfInteger, SpinOperators};
use crate::constants::PhysicalConstants;
use crate::error::{invalid, Result};

/// Physical parameters of one donor species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    pub electron_spin: HalfInteger,
    pub nuclear_spin: HalfInteger,
    /// Isotropic hyperfine constant A/2π, MHz.
    pub hyperfine_a: f64,
    pub g_factor: f64,
    /// Nuclear-to-electron Zeeman ratio δ.
    pub nuclear_ratio_delta: f64,
    #[serde(skip, default)]
    pub constants: PhysicalConstants,
}

impl SpinSystem {
    pub fn new(nuclear_spin: f64, hyperfine_a: f64, g_factor: f64, nuclear_ratio_delta: f64) -> Result<Self> {
        let nuclear_spin = HalfInteger::new(nuclear_spin)?;
        let sys = SpinSystem {
            electron_spin: HalfInteger::HALF,
            nuclear_spin,
            hyperfine_a,
            g_factor,
            nuclear_ratio_delta,
            constants: PhysicalConstants::default(),
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Bismuth donor in silicon: I = 9/2, A/2π = 1475.4 MHz, g = 2.0003,
    /// δ = 2.488e-4.
    pub fn si_bi() -> Self {
        SpinSystem {
            electron_spin: HalfInteger::HALF,
            nuclear_spin: HalfInteger::from_twice(9),
            hyperfine_a: 1475.4,
            g_factor: 2.0003,
            nuclear_ratio_delta: 2.488e-4,
            constants: PhysicalConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.electron_spin != HalfInteger::HALF {
            return invalid("only S = 1/2 donors are supported");
        }
        if self.nuclear_spin.twice() < 1 {
            return invalid("nuclear spin must be at least 1/2");
        }
        if !(self.hyperfine_a > 0.0 && self.hyperfine_a.is_finite()) {
            return invalid("hyperfine constant must be positive");
        }
        if !(self.g_factor.is_finite() && self.nuclear_ratio_delta.is_finite()) {
            return invalid("g-factor and δ must be finite");
        }
        Ok(())
    }

    /// Hilbert-space dimension (2S+1)(2I+1).
    pub fn dim(&self) -> usize {
        self.electron_spin.multiplicity() * self.nuclear_spin.multiplicity()
    }

    /// Electron Zeeman frequency f₀ = gμ_B B/h in MHz.
    pub fn f0(&self, field_b: f64) -> f64 {
        self.constants.electron_zeeman_mhz_per_tesla(self.g_factor) * field_b
    }

    /// Inverse of [`SpinSystem::f0`].
    pub fn field_for_f0(&self, f0: f64) -> f64 {
        f0 / self.constants.electron_zeeman_mhz_per_tesla(self.g_factor)
    }

    pub fn operators(&self) -> SpinOperators {
        SpinOperators::new(self.electron_spin, self.nuclear_spin)
    }

    /// Twice `(m_s, m_I)` for product-basis index `k`.
    pub fn basis_projections(&self, k: usize) -> (i32, i32) {
        let ni = self.nuclear_spin.multiplicity();
        (
            self.electron_spin.twice_projection(k / ni),
            self.nuclear_spin.twice_projection(k % ni),
        )
    }

    /// Product-basis index of `|m_s, m_I⟩` given twice the projections.
    pub fn basis_index(&self, twice_ms: i32, twice_mi: i32) -> Option<usize> {
        let s2 = self.electron_spin.twice() as i32;
        let i2 = self.nuclear_spin.twice() as i32;
        if twice_ms.abs() > s2 || twice_mi.abs() > i2 || (s2 - twice_ms) % 2 != 0 || (i2 - twice_mi) % 2 != 0 {
            return None;
        }
        let ks = ((s2 - twice_ms) / 2) as usize;
        let ki = ((i2 - twice_mi) / 2) as usize;
        Some(ks * self.nuclear_spin.multiplicity() + ki)
    }
}

impl Default for SpinSystem {
    fn default() -> Self {
        Self::si_bi()
    }
}

/// `H/h = f₀ Sz − f₀δ Iz + A S·I` in MHz at field `field_b` (tesla).
///
/// Assembled element by element: the diagonal carries the Zeeman terms and
/// `A m_s m_I`, the off-diagonal part `(A/2)(S⁺I⁻ + S⁻I⁺)` is real.
pub fn build_hamiltonian(sys: &SpinSystem, field_b: f64) -> Result<CMatrix> {
    sys.validate()?;
    if !(field_b >= 0.0 && field_b.is_finite()) {
        return invalid(format!("field must be finite and non-negative, got {field_b}"));
    }
    let dim = sys.dim();
    let f0 = sys.f0(field_b);
    let a = sys.hyperfine_a;
    let s = sys.electron_spin.value();
    let i = sys.nuclear_spin.value();
    let mut h = CMatrix::from_element(dim, dim, Complex::new(0.0, 0.0));
    for k in 0..dim {
        let (ms2, mi2) = sys.basis_projections(k);
        let (ms, mi) = (ms2 as f64 / 2.0, mi2 as f64 / 2.0);
        h[(k, k)] = Complex::new(f0 * ms - f0 * sys.nuclear_ratio_delta * mi + a * ms * mi, 0.0);
        // S⁺I⁻ |m_s, m_I⟩ → |m_s+1, m_I−1⟩
        if let Some(l) = sys.basis_index(ms2 + 2, mi2 - 2) {
            let amp = 0.5
                * a
                * (s * (s + 1.0) - ms * (ms + 1.0)).sqrt()
                * (i * (i + 1.0) - mi * (mi - 1.0)).sqrt();
            h[(l, k)] = Complex::new(amp, 0.0);
            h[(k, l)] = Complex::new(amp, 0.0);
        }
    }
    Ok(h)
}

/// Same Hamiltonian assembled from the lifted operator matrices.
pub fn build_hamiltonian_from_operators(sys: &SpinSystem, field_b: f64) -> Result<CMatrix> {
    sys.validate()?;
    let ops = sys.operators();
    let f0 = sys.f0(field_b);
    Ok(ops.sz.map(|c| c * f0) - ops.iz.map(|c| c * (f0 * sys.nuclear_ratio_delta))
        + ops.s_dot_i().map(|c| c * sys.hyperfine_a))
}
