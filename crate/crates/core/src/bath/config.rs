//! One random bath: occupied sites, contact couplings and coupled pairs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::couplings::{dipolar_b, superhyperfine_j, KohnLuttinger};
use super::echo::PairCoupling;
use super::lattice::{norm2, LatticeSpec, Site};
use super::occupancy::occupy;
use crate::constants::PhysicalConstants;
use crate::error::{invalid, Result};

/// Tolerance on squared separations when deciding pair membership, nm².
pub const SHELL_TOLERANCE_NM2: f64 = 1e-9;

/// Neighbour shells used as pair cut-offs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighbourShell {
    /// `a₀√3/4`.
    First,
    /// `a₀√2/2`.
    Second,
    /// `a₀√11/4`.
    Third,
}

impl NeighbourShell {
    pub fn radius(self, a0: f64) -> f64 {
        match self {
            NeighbourShell::First => a0 * 3f64.sqrt() / 4.0,
            NeighbourShell::Second => a0 * 2f64.sqrt() / 2.0,
            NeighbourShell::Third => a0 * 11f64.sqrt() / 4.0,
        }
    }
}

/// Index pair into [`BathConfiguration::sites`] with its dipolar coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathPair {
    pub k: usize,
    pub l: usize,
    /// MHz.
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathConfiguration {
    pub seed: u64,
    pub sites: Vec<Site>,
    /// nm, donor-relative.
    pub positions: Vec<[f64; 3]>,
    /// Contact coupling per site, MHz.
    pub couplings_j: Vec<f64>,
    pub pairs: Vec<BathPair>,
}

impl BathConfiguration {
    pub fn pair_couplings(&self) -> Vec<PairCoupling> {
        self.pairs
            .iter()
            .map(|p| PairCoupling { j_k: self.couplings_j[p.k], j_l: self.couplings_j[p.l], b: p.b })
            .collect()
    }
}

/// Physical inputs shared by every configuration of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathModel<'a> {
    pub lattice: &'a LatticeSpec,
    pub abundance: f64,
    /// nm.
    pub r_max: f64,
    pub b_direction: [f64; 3],
    pub kohn_luttinger: &'a KohnLuttinger,
    pub constants: &'a PhysicalConstants,
}

/// Integer offsets `v > 0` (lexicographically) with `|v|·a₀/4 ≤ r_max`.
fn pair_offsets(a0: f64, r_max: f64) -> Vec<Site> {
    let limit = (r_max * r_max + SHELL_TOLERANCE_NM2) * 16.0 / (a0 * a0);
    let reach = limit.sqrt().floor() as i32;
    let mut out = Vec::new();
    for x in -reach..=reach {
        for y in -reach..=reach {
            for z in -reach..=reach {
                let v = [x, y, z];
                if v > [0, 0, 0] && (norm2(v) as f64) <= limit {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Occupy `sites` with `seed` and assemble couplings and pairs.
pub fn build_configuration(sites: &[Site], model: &BathModel<'_>, seed: u64) -> Result<BathConfiguration> {
    if !(model.r_max > 0.0 && model.r_max.is_finite()) {
        return invalid(format!("pair cut-off must be positive, got {}", model.r_max));
    }
    let occupied = occupy(sites, model.abundance, seed)?;
    let positions: Vec<[f64; 3]> = occupied.iter().map(|&u| model.lattice.position(u)).collect();
    let couplings_j = positions
        .iter()
        .map(|&r| superhyperfine_j(r, model.kohn_luttinger, model.constants))
        .collect::<Result<Vec<_>>>()?;
    let index: HashMap<Site, usize> = occupied.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let offsets = pair_offsets(model.lattice.a0, model.r_max);
    let mut pairs = Vec::new();
    for (k, u) in occupied.iter().enumerate() {
        for v in &offsets {
            if let Some(&l) = index.get(&[u[0] + v[0], u[1] + v[1], u[2] + v[2]]) {
                let b = dipolar_b(positions[k], positions[l], model.b_direction, model.constants)?;
                pairs.push(BathPair { k, l, b });
            }
        }
    }
    Ok(BathConfiguration { seed, sites: occupied, positions, couplings_j, pairs })
}
