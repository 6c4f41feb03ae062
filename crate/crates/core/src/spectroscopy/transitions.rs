use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spin::{diagonalize, DonorEigensystem, SpinSystem};

/// Central-difference half step used by [`df_db`], tesla (0.1 mT).
pub const DF_DB_STEP: f64 = 1e-4;

/// A resonant level pair at a given field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Label of the higher-energy level at `field_b`.
    pub label_upper: usize,
    pub label_lower: usize,
    /// Tesla.
    pub field_b: f64,
    /// MHz.
    pub frequency: f64,
    /// `|⟨upper|Sx⊗1|lower⟩|`.
    pub sx_element: f64,
    /// `sx_element²`.
    pub intensity: f64,
    /// MHz/mT.
    pub dfdb: f64,
}

fn check_pair(sys: &SpinSystem, i: usize, j: usize) -> Result<()> {
    let d = sys.dim();
    if i == 0 || j == 0 || i > d || j > d {
        return invalid(format!("labels must lie in 1..={d}, got ({i}, {j})"));
    }
    if i == j {
        return invalid("a transition needs two distinct labels");
    }
    Ok(())
}

/// `|E_i(B) − E_j(B)|` in MHz.
pub fn transition_frequency(sys: &SpinSystem, i: usize, j: usize, field_b: f64) -> Result<f64> {
    check_pair(sys, i, j)?;
    let eig = diagonalize(sys, field_b)?;
    Ok((eig.energies[i - 1] - eig.energies[j - 1]).abs())
}

/// `|⟨i|Sx⊗1|j⟩|` from the numeric eigenvectors.
pub fn sx_matrix_element(sys: &SpinSystem, i: usize, j: usize, field_b: f64) -> Result<f64> {
    check_pair(sys, i, j)?;
    diagonalize(sys, field_b)?.sx_element(i, j)
}

/// Two-level rotating-wave Rabi frequency `2·f1·|⟨i|Sx|j⟩|` in MHz, where
/// `f1 = gμ_B B₁/(2h)` is the drive amplitude.
pub fn rabi_frequency(sys: &SpinSystem, i: usize, j: usize, field_b: f64, f1: f64) -> Result<f64> {
    if !(f1 > 0.0 && f1.is_finite()) {
        return invalid(format!("drive amplitude must be positive, got {f1}"));
    }
    Ok(2.0 * f1 * sx_matrix_element(sys, i, j, field_b)?)
}

/// `df/dB` in MHz/mT by central difference with half step [`DF_DB_STEP`];
/// the truncation error is O(step²).
pub fn df_db(sys: &SpinSystem, i: usize, j: usize, field_b: f64) -> Result<f64> {
    if field_b <= DF_DB_STEP {
        return invalid(format!("df/dB needs B > {DF_DB_STEP} T, got {field_b}"));
    }
    let hi = transition_frequency(sys, i, j, field_b + DF_DB_STEP)?;
    let lo = transition_frequency(sys, i, j, field_b - DF_DB_STEP)?;
    Ok((hi - lo) / (2.0 * DF_DB_STEP * 1e3))
}

/// Full [`Transition`] record for a level pair at a field.
pub fn transition_at(sys: &SpinSystem, i: usize, j: usize, field_b: f64) -> Result<Transition> {
    check_pair(sys, i, j)?;
    let eig = diagonalize(sys, field_b)?;
    let (upper, lower) = if eig.energies[i - 1] >= eig.energies[j - 1] { (i, j) } else { (j, i) };
    let sx = eig.sx_element(i, j)?;
    let dfdb = if field_b > DF_DB_STEP { df_db(sys, i, j, field_b)? } else { f64::NAN };
    Ok(Transition {
        label_upper: upper,
        label_lower: lower,
        field_b,
        frequency: eig.energies[upper - 1] - eig.energies[lower - 1],
        sx_element: sx,
        intensity: sx * sx,
        dfdb,
    })
}

/// All label pairs `(i, j)`, `i < j`, whose conserved m differ by one.
pub fn adjacent_pairs(eig: &DonorEigensystem) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 1..=eig.dim() {
        for j in (i + 1)..=eig.dim() {
            let (a, b) = (eig.doublet_ids[i - 1], eig.doublet_ids[j - 1]);
            if (a.twice_m - b.twice_m).abs() == 2 {
                pairs.push((i, j));
            }
        }
    }
    pairs
}
