use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_hamiltonian, SpinSystem};
use super::operators::CMatrix;
use crate::error::{invalid, Result};

pub type CVector = DVector<Complex<f64>>;

/// Upper (+) or lower (−) member of a constant-m doublet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Upper,
    Lower,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Upper => "+",
            Branch::Lower => "-",
        })
    }
}

/// Conserved total projection `m = m_s + m_I` (stored doubled) and branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DoubletId {
    pub twice_m: i32,
    pub branch: Branch,
}

impl DoubletId {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

/// Adiabatic label of a doublet member.
///
/// Convention (S = 1/2, nuclear spin I, M = I + 1/2): lower-branch states
/// are numbered `M − m` (1..=2I+1), upper-branch states `2I + 1 + M + m`.
/// For Si:Bi this gives `label(−, m) = 5 − m` and `label(+, m) = 15 + m`,
/// so `|10⟩ = |−1/2, −9/2⟩` and `|20⟩ = |+1/2, +9/2⟩`. The numbering is a
/// convention chosen to match the named states 9, 10, 11 and 20; it is not
/// derived from anything more fundamental.
pub fn label_of(sys: &SpinSystem, id: DoubletId) -> usize {
    let n_nuc = sys.nuclear_spin.multiplicity() as i32;
    let twice_mmax = n_nuc; // 2M = 2I + 1
    let label = match id.branch {
        Branch::Lower => (twice_mmax - id.twice_m) / 2,
        Branch::Upper => n_nuc + (twice_mmax + id.twice_m) / 2,
    };
    label as usize
}

/// Inverse of [`label_of`].
pub fn doublet_of(sys: &SpinSystem, label: usize) -> Option<DoubletId> {
    let n_nuc = sys.nuclear_spin.multiplicity() as i32;
    let label = label as i32;
    if label < 1 || label > 2 * n_nuc {
        return None;
    }
    Some(if label <= n_nuc {
        DoubletId { twice_m: n_nuc - 2 * label, branch: Branch::Lower }
    } else {
        DoubletId { twice_m: 2 * (label - n_nuc) - n_nuc, branch: Branch::Upper }
    })
}

/// Eigenpairs of the donor Hamiltonian at one field, indexed by adiabatic
/// label (index 0 holds label 1).
#[derive(Debug, Clone)]
pub struct DonorEigensystem {
    pub system: SpinSystem,
    pub field_b: f64,
    /// `E/h` in MHz, by label.
    pub energies: Vec<f64>,
    /// Normalized eigenvectors in the product basis, by label.
    pub states: Vec<CVector>,
    pub doublet_ids: Vec<DoubletId>,
}

impl DonorEigensystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    fn index(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.dim() {
            return invalid(format!("label {label} outside 1..={}", self.dim()));
        }
        Ok(label - 1)
    }

    pub fn energy(&self, label: usize) -> Result<f64> {
        Ok(self.energies[self.index(label)?])
    }

    pub fn state(&self, label: usize) -> Result<&CVector> {
        Ok(&self.states[self.index(label)?])
    }

    pub fn doublet_id(&self, label: usize) -> Result<DoubletId> {
        Ok(self.doublet_ids[self.index(label)?])
    }

    /// Labels sorted by ascending energy.
    pub fn energy_order(&self) -> Vec<usize> {
        let mut labels: Vec<usize> = (1..=self.dim()).collect();
        labels.sort_by(|&a, &b| self.energies[a - 1].total_cmp(&self.energies[b - 1]));
        labels
    }

    /// `|⟨i|Sx⊗1|j⟩|`.
    pub fn sx_element(&self, i: usize, j: usize) -> Result<f64> {
        Ok(sx_between(&self.system, self.state(i)?, self.state(j)?).norm())
    }

    /// Largest `‖H v − E v‖` over all eigenpairs.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        self.states
            .iter()
            .zip(&self.energies)
            .map(|(v, &e)| (h * v - v.map(|c| c * e)).norm())
            .fold(0.0, f64::max)
    }
}

/// Full eigendecomposition of the donor Hamiltonian with adiabatic labels.
///
/// The Hamiltonian commutes with `Fz`, so each constant-m block (size one or
/// two) is diagonalized separately; the higher block eigenvalue is the `+`
/// branch. Blocks never hold degenerate eigenvalues for S = 1/2 (the
/// splitting is 2β ≥ 2Ω > 0), which also settles the zero-field case where
/// the full 20×20 spectrum is degenerate across blocks: every state keeps its
/// block's m, and within a block the order is by energy.
pub fn diagonalize(sys: &SpinSystem, field_b: f64) -> Result<DonorEigensystem> {
    let h = build_hamiltonian(sys, field_b)?;
    let dim = sys.dim();
    let n_nuc = sys.nuclear_spin.multiplicity() as i32;
    let zero = Complex::new(0.0, 0.0);
    let mut energies = vec![0.0; dim];
    let mut states = vec![CVector::from_element(dim, zero); dim];
    let mut doublet_ids = vec![DoubletId { twice_m: 0, branch: Branch::Lower }; dim];

    let mut twice_m = -n_nuc;
    while twice_m <= n_nuc {
        let members: Vec<usize> = (0..dim)
            .filter(|&k| {
                let (ms, mi) = sys.basis_projections(k);
                ms + mi == twice_m
            })
            .collect();
        let n = members.len();
        let block = DMatrix::from_fn(n, n, |r, c| h[(members[r], members[c])]);
        let eig = SymmetricEigen::new(block);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        for (rank, &col) in order.iter().enumerate() {
            let branch = if n == 1 {
                if twice_m < 0 {
                    Branch::Lower
                } else {
                    Branch::Upper
                }
            } else if rank == 0 {
                Branch::Lower
            } else {
                Branch::Upper
            };
            let id = DoubletId { twice_m, branch };
            let mut v = CVector::from_element(dim, zero);
            for (r, &k) in members.iter().enumerate() {
                v[k] = eig.eigenvectors[(r, col)];
            }
            fix_phase(sys, &mut v, id);
            let idx = label_of(sys, id) - 1;
            energies[idx] = eig.eigenvalues[col];
            states[idx] = v;
            doublet_ids[idx] = id;
        }
        twice_m += 2;
    }

    Ok(DonorEigensystem { system: *sys, field_b, energies, states, doublet_ids })
}

/// `⟨a|Sx⊗1|b⟩`, using the ladder structure of Sx instead of a dense product.
pub fn sx_between(sys: &SpinSystem, a: &CVector, b: &CVector) -> Complex<f64> {
    let s = sys.electron_spin.value();
    let mut acc = Complex::new(0.0, 0.0);
    for k in 0..sys.dim() {
        let (ms2, mi2) = sys.basis_projections(k);
        let ms = ms2 as f64 / 2.0;
        // S⁺ and S⁻ each contribute ½ of the ladder amplitude.
        if let Some(l) = sys.basis_index(ms2 + 2, mi2) {
            let amp = 0.5 * (s * (s + 1.0) - ms * (ms + 1.0)).sqrt();
            acc += a[l].conj() * b[k] * amp;
            acc += a[k].conj() * b[l] * amp;
        }
    }
    acc
}

/// Rotate the global phase so the reference component is real and positive:
/// `|↑, m−½⟩` for the upper branch, `|↓, m+½⟩` for the lower branch.
fn fix_phase(sys: &SpinSystem, v: &mut CVector, id: DoubletId) {
    let reference = match id.branch {
        Branch::Upper => sys.basis_index(1, id.twice_m - 1),
        Branch::Lower => sys.basis_index(-1, id.twice_m + 1),
    };
    let pivot = match reference {
        Some(k) if v[k].norm() > 1e-300 => v[k],
        _ => *v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap(),
    };
    let phase = pivot.conj() / pivot.norm();
    v.apply(|c| *c *= phase);
}

/// `⟨ψ|Sz⊗1|ψ⟩` for the state with the given label.
pub fn expectation_sz(eig: &DonorEigensystem, label: usize) -> Result<f64> {
    let v = eig.state(label)?;
    Ok(v.iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() * eig.system.basis_projections(k).0 as f64 / 2.0)
        .sum())
}

/// Electron–nucleus concurrence `√(2(1 − Tr ρ_e²))` of a labelled eigenstate.
pub fn concurrence(eig: &DonorEigensystem, label: usize) -> Result<f64> {
    let v = eig.state(label)?;
    let ns = eig.system.electron_spin.multiplicity();
    let ni = eig.system.nuclear_spin.multiplicity();
    let amp = DMatrix::from_fn(ns, ni, |r, c| v[r * ni + c]);
    let rho_e = &amp * amp.adjoint();
    let purity = (&rho_e * &rho_e).trace().re;
    Ok((2.0 * (1.0 - purity)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys() -> SpinSystem {
        SpinSystem::si_bi()
    }

    #[test]
    fn label_rule_matches_named_states() {
        let s = sys();
        assert_eq!(label_of(&s, DoubletId { twice_m: -10, branch: Branch::Lower }), 10);
        assert_eq!(label_of(&s, DoubletId { twice_m: -8, branch: Branch::Lower }), 9);
        assert_eq!(label_of(&s, DoubletId { twice_m: -8, branch: Branch::Upper }), 11);
        assert_eq!(label_of(&s, DoubletId { twice_m: 10, branch: Branch::Upper }), 20);
        assert_eq!(label_of(&s, DoubletId { twice_m: 8, branch: Branch::Lower }), 1);
        for label in 1..=20 {
            assert_eq!(label_of(&s, doublet_of(&s, label).unwrap()), label);
        }
        assert!(doublet_of(&s, 0).is_none());
        assert!(doublet_of(&s, 21).is_none());
    }

    #[test]
    fn eigenpairs_are_accurate_and_orthonormal() {
        let s = sys();
        for &b in &[0.0, 0.0527, 0.1456, 0.345, 1.0, 6.0] {
            let h = build_hamiltonian(&s, b).unwrap();
            let eig = diagonalize(&s, b).unwrap();
            let hnorm = h.norm();
            assert!(eig.max_residual(&h) <= 1e-9 * hnorm);
            for i in 0..20 {
                for j in 0..20 {
                    let ov = (eig.states[i].adjoint() * &eig.states[j])[(0, 0)];
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((ov - Complex::new(target, 0.0)).norm() < 1e-10);
                }
            }
            let tr: f64 = eig.energies.iter().sum();
            assert!((tr - h.trace().re).abs() <= 1e-9 * hnorm);
        }
    }

    #[test]
    fn state_ten_is_pure_product() {
        let s = sys();
        let eig = diagonalize(&s, 0.1456).unwrap();
        let k = s.basis_index(-1, -9).unwrap();
        assert!((eig.state(10).unwrap()[k].norm() - 1.0).abs() < 1e-12);
        assert_eq!(expectation_sz(&eig, 10).unwrap(), -0.5);
    }

    #[test]
    fn high_field_state_eleven() {
        let s = sys();
        let eig = diagonalize(&s, 6.0).unwrap();
        let k = s.basis_index(1, -9).unwrap();
        assert!(eig.state(11).unwrap()[k].norm_sqr() > 0.999);
        assert!(expectation_sz(&eig, 11).unwrap() > 0.49);
    }

    #[test]
    fn concurrence_of_unmixed_states_vanishes() {
        let s = sys();
        for &b in &[0.0, 0.02, 0.3, 2.0] {
            let eig = diagonalize(&s, b).unwrap();
            assert!(concurrence(&eig, 10).unwrap() < 1e-9);
            assert!(concurrence(&eig, 20).unwrap() < 1e-9);
        }
    }

    #[test]
    fn ladder_sx_matches_dense_operator() {
        let s = sys();
        let eig = diagonalize(&s, 0.2).unwrap();
        let sx = s.operators().sx;
        for i in 0..20 {
            for j in 0..20 {
                let dense = (eig.states[i].adjoint() * &sx * &eig.states[j])[(0, 0)];
                let fast = sx_between(&s, &eig.states[i], &eig.states[j]);
                assert!((dense - fast).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn invalid_label_is_an_error() {
        let eig = diagonalize(&sys(), 0.1).unwrap();
        assert!(eig.energy(0).is_err());
        assert!(expectation_sz(&eig, 21).is_err());
    }
}
