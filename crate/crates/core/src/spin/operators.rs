use std::fmt;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// A non-negative half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInteger(u32);

impl HalfInteger {
    pub const HALF: HalfInteger = HalfInteger(1);

    pub fn from_twice(twice: u32) -> Self {
        HalfInteger(twice)
    }

    pub fn new(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || twice < 0.0 || (twice - twice.round()).abs() > 1e-12 {
            return invalid(format!("{value} is not a non-negative half-integer"));
        }
        Ok(HalfInteger(twice.round() as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of projections, 2j + 1.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// Projection quantum number (twice its value) of basis index `k`,
    /// with `k = 0` the largest projection.
    pub fn twice_projection(self, k: usize) -> i32 {
        self.0 as i32 - 2 * k as i32
    }
}

impl TryFrom<f64> for HalfInteger {
    type Error = crate::Error;
    fn try_from(v: f64) -> Result<Self> {
        HalfInteger::new(v)
    }
}

impl From<HalfInteger> for f64 {
    fn from(h: HalfInteger) -> f64 {
        h.value()
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Cartesian angular-momentum matrices for a single spin.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
}

/// Jx, Jy, Jz for spin `j` in the basis `m = j, j-1, …, -j`.
///
/// Built from the ladder operators, `⟨m±1|J±|m⟩ = √(j(j+1) − m(m±1))`.
pub fn spin_matrices(j: f64) -> Result<SpinMatrices> {
    let j = HalfInteger::new(j)?;
    Ok(spin_matrices_for(j))
}

pub(crate) fn spin_matrices_for(j: HalfInteger) -> SpinMatrices {
    let dim = j.multiplicity();
    let jv = j.value();
    let zero = Complex::new(0.0, 0.0);
    let mut z = CMatrix::from_element(dim, dim, zero);
    let mut plus = CMatrix::from_element(dim, dim, zero);
    for k in 0..dim {
        let m = j.twice_projection(k) as f64 / 2.0;
        z[(k, k)] = Complex::new(m, 0.0);
        // J+ |m⟩ lands on index k-1 (larger projection).
        if k > 0 {
            let amp = (jv * (jv + 1.0) - m * (m + 1.0)).sqrt();
            plus[(k - 1, k)] = Complex::new(amp, 0.0);
        }
    }
    let minus = plus.adjoint();
    let x = (&plus + &minus).map(|c| c * 0.5);
    // (J+ − J−)/(2i) = −i/2 (J+ − J−)
    let y = (&plus - &minus).map(|c| c * Complex::new(0.0, -0.5));
    SpinMatrices { x, y, z }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Electron and nuclear spin operators lifted to the product space.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub ix: CMatrix,
    pub iy: CMatrix,
    pub iz: CMatrix,
}

impl SpinOperators {
    pub fn new(electron: HalfInteger, nucleus: HalfInteger) -> Self {
        let s = spin_matrices_for(electron);
        let i = spin_matrices_for(nucleus);
        let one_s = CMatrix::identity(electron.multiplicity(), electron.multiplicity());
        let one_i = CMatrix::identity(nucleus.multiplicity(), nucleus.multiplicity());
        SpinOperators {
            sx: kron(&s.x, &one_i),
            sy: kron(&s.y, &one_i),
            sz: kron(&s.z, &one_i),
            ix: kron(&one_s, &i.x),
            iy: kron(&one_s, &i.y),
            iz: kron(&one_s, &i.z),
        }
    }

    pub fn dim(&self) -> usize {
        self.sz.nrows()
    }

    /// S·I = SxIx + SyIy + SzIz.
    pub fn s_dot_i(&self) -> CMatrix {
        &self.sx * &self.ix + &self.sy * &self.iy + &self.sz * &self.iz
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let s = spin_matrices(0.5).unwrap();
        assert_eq!(s.z[(0, 0)].re, 0.5);
        assert_eq!(s.z[(1, 1)].re, -0.5);
        assert_eq!(s.x[(0, 1)].re, 0.5);
        assert_eq!(s.x[(1, 0)].re, 0.5);
        assert_eq!(s.y[(0, 1)], Complex::new(0.0, -0.5));
    }

    #[test]
    fn nine_halves_trace_jz_squared() {
        let s = spin_matrices(4.5).unwrap();
        assert_eq!(s.z.nrows(), 10);
        // Σ m² over m = ±1/2 … ±9/2, enumerated directly.
        let expected: f64 = (0..10).map(|k| (4.5 - k as f64).powi(2)).sum();
        assert!((expected - 82.5).abs() < 1e-12);
        let tr = (&s.z * &s.z).trace().re;
        assert!((tr - expected).abs() < 1e-12);
    }

    #[test]
    fn commutators_close_for_many_spins() {
        for twice in 0..=12u32 {
            let s = spin_matrices(twice as f64 / 2.0).unwrap();
            let xy = &s.x * &s.y - &s.y * &s.x;
            let iz = s.z.map(|c| c * Complex::new(0.0, 1.0));
            assert!(max_abs(&(xy - iz)) < 1e-12, "j = {}/2", twice);
            let yz = &s.y * &s.z - &s.z * &s.y;
            let ix = s.x.map(|c| c * Complex::new(0.0, 1.0));
            assert!(max_abs(&(yz - ix)) < 1e-12);
        }
    }

    #[test]
    fn rejects_non_half_integers() {
        assert!(spin_matrices(0.3).is_err());
        assert!(spin_matrices(-0.5).is_err());
        assert!(spin_matrices(f64::NAN).is_err());
    }

    #[test]
    fn product_operators_are_hermitian() {
        let ops = SpinOperators::new(HalfInteger::HALF, HalfInteger::new(4.5).unwrap());
        assert_eq!(ops.dim(), 20);
        let sdi = ops.s_dot_i();
        assert!(max_abs(&(&sdi - sdi.adjoint())) < 1e-14);
        for k in 0..20 {
            for l in 0..20 {
                if k != l {
                    assert_eq!(ops.sz[(k, l)].norm(), 0.0);
                    assert_eq!(ops.iz[(k, l)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn display_half_integer() {
        assert_eq!(HalfInteger::new(4.5).unwrap().to_string(), "9/2");
        assert_eq!(HalfInteger::new(1.0).unwrap().to_string(), "1");
    }
}
