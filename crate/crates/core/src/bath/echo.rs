//! Hahn-echo amplitude of one nuclear pair under conditioned evolution.
//!
//! With the donor frozen in level `i` the pair Hamiltonian on the product
//! basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` is
//! `H⁽ⁱ⁾ = Σ_j (f_Z + s_i J_j) I_jz + b[I_kz I_lz − ¼(I_k⁺I_l⁻ + I_k⁻I_l⁺)]`,
//! a real symmetric 4×4 matrix. Writing `H⁽ⁱ⁾ = V_i E_i V_iᵀ` and
//! `W = V_aᵀV_b`, the echo trace collapses to
//! `Tr(U_a†U_b†U_aU_b) = Σ_pq e^{iφ(E_a,p − E_a,q)} |X_pq|²` with
//! `X = W e^{iφE_b} Wᵀ`, so each time point costs a handful of 4×4 sums.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

type C = Complex<f64>;

/// Couplings of one nuclear pair, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub j_k: f64,
    pub j_l: f64,
    pub b: f64,
}

/// Echo decay curve; `std_of_mean` is set for ensemble averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoCurve {
    /// ms.
    pub times: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub std_of_mean: Option<Vec<f64>>,
}

/// Conditioned pair Hamiltonian for electron polarization `s`, MHz.
pub fn conditioned_hamiltonian(pair: &PairCoupling, f_z: f64, s: f64) -> Matrix4<f64> {
    let (zk, zl) = (f_z + s * pair.j_k, f_z + s * pair.j_l);
    let mut h = Matrix4::zeros();
    for (idx, (mk, ml)) in [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)].into_iter().enumerate() {
        h[(idx, idx)] = zk * mk + zl * ml + pair.b * mk * ml;
    }
    h[(1, 2)] = -0.25 * pair.b;
    h[(2, 1)] = -0.25 * pair.b;
    h
}

/// Complex pair echo `L(t) = ¼ Σ_χ ⟨χ|U_a†U_b†U_aU_b|χ⟩` with
/// `U_i = exp(−i2πH⁽ⁱ⁾t/2)`, at each total echo time `t` in ms.
///
/// `s_a`, `s_b` are the electron `⟨Sz⟩` of the two donor levels and `f_z`
/// the bare nuclear Zeeman frequency, MHz. Both conditioned Hamiltonians
/// are real, so `X` is symmetric and the trace is real: the imaginary part
/// of every returned value is zero.
pub fn pair_echo(pair: &PairCoupling, f_z: f64, s_a: f64, s_b: f64, times_ms: &[f64]) -> Vec<C> {
    let ea = SymmetricEigen::new(conditioned_hamiltonian(pair, f_z, s_a));
    let eb = SymmetricEigen::new(conditioned_hamiltonian(pair, f_z, s_b));
    let w = ea.eigenvectors.transpose() * eb.eigenvectors;
    // Non-vanishing terms of X_pq = Σ_k W_pk W_qk e^{iφE_b,k} for p ≤ q,
    // with the weight 1 (p = q) or 2 (p < q) and the gap E_a,p − E_a,q.
    struct Term {
        weight: f64,
        gap: f64,
        coeffs: Vec<(usize, f64)>,
    }
    let mut terms = Vec::with_capacity(10);
    for p in 0..4 {
        for q in p..4 {
            let coeffs: Vec<(usize, f64)> =
                (0..4).map(|k| (k, w[(p, k)] * w[(q, k)])).filter(|(_, c)| *c != 0.0).collect();
            if !coeffs.is_empty() {
                let weight = if p == q { 1.0 } else { 2.0 };
                terms.push(Term { weight, gap: ea.eigenvalues[p] - ea.eigenvalues[q], coeffs });
            }
        }
    }
    times_ms
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return C::new(1.0, 0.0);
            }
            // τ = t/2 in µs so that MHz·µs is a cycle count.
            let phi = 2.0 * PI * t * 0.5e3;
            let db: [C; 4] = std::array::from_fn(|k| C::from_polar(1.0, phi * eb.eigenvalues[k]));
            let sum: f64 = terms
                .iter()
                .map(|term| {
                    let x: C = term.coeffs.iter().map(|&(k, c)| db[k] * c).sum();
                    let phase = if term.weight == 1.0 { 1.0 } else { (phi * term.gap).cos() };
                    term.weight * phase * x.norm_sqr()
                })
                .sum();
            C::new(0.25 * sum, 0.0)
        })
        .collect()
}

/// `|∏ L_pair(t)|` over the given pairs; an empty list gives 1.
pub fn cce2_product(pairs: &[PairCoupling], f_z: f64, s_a: f64, s_b: f64, times_ms: &[f64]) -> Vec<f64> {
    let mut acc = vec![C::new(1.0, 0.0); times_ms.len()];
    for p in pairs {
        for (a, l) in acc.iter_mut().zip(pair_echo(p, f_z, s_a, s_b, times_ms)) {
            *a *= l;
        }
    }
    acc.into_iter().map(|z| z.norm()).collect()
}

pub(crate) fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] != 0.0 {
        return invalid("time grid must start at 0");
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || !times.iter().all(|t| t.is_finite()) {
        return invalid("time grid must be finite and strictly ascending");
    }
    Ok(())
}
