//! Diamond-cubic silicon lattice in integer quarter-cell coordinates.
//!
//! A site is stored as `u = 4x/a₀`, which makes every diamond site an
//! integer triple: either all coordinates even with a sum divisible by 4,
//! or all odd with `u − (1,1,1)` summing to a multiple of 4.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Silicon conventional cubic lattice constant, nm.
pub const SILICON_A0: f64 = 0.543;

/// Site in units of a₀/4, donor at the origin.
pub type Site = [i32; 3];

const BASIS: [Site; 8] = [
    [0, 0, 0],
    [0, 2, 2],
    [2, 0, 2],
    [2, 2, 0],
    [1, 1, 1],
    [1, 3, 3],
    [3, 1, 3],
    [3, 3, 1],
];

/// Cube of silicon around the donor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// nm.
    pub a0: f64,
    /// Cube edge, nm.
    pub side: f64,
}

impl LatticeSpec {
    pub fn new(side: f64) -> Self {
        LatticeSpec { a0: SILICON_A0, side }
    }

    /// Whole conventional cells per edge, `⌊side/a₀⌋`.
    pub fn cells_per_edge(&self) -> usize {
        (self.side / self.a0 + 1e-9).floor().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return invalid(format!("lattice constant must be positive, got {}", self.a0));
        }
        if !(self.side.is_finite() && self.cells_per_edge() >= 2) {
            return invalid(format!("cube side {} nm holds fewer than 2 cells of {} nm", self.side, self.a0));
        }
        Ok(())
    }

    /// Cartesian position in nm.
    pub fn position(&self, site: Site) -> [f64; 3] {
        let q = self.a0 / 4.0;
        [site[0] as f64 * q, site[1] as f64 * q, site[2] as f64 * q]
    }
}

pub fn is_diamond_site(u: Site) -> bool {
    let even = u.iter().all(|c| c.rem_euclid(2) == 0);
    let odd = u.iter().all(|c| c.rem_euclid(2) == 1);
    if even {
        (u[0] + u[1] + u[2]).rem_euclid(4) == 0
    } else if odd {
        (u[0] + u[1] + u[2] - 3).rem_euclid(4) == 0
    } else {
        false
    }
}

/// All sites of the `n³` whole cells making up the cube, donor site
/// included (it is the origin).
///
/// Cells are indexed `c ∈ [−⌊n/2⌋, n − ⌊n/2⌋)` per axis, so the donor is at
/// the exact centre for even `n` and one quarter-diagonal off it for odd
/// `n`. The count is exactly `8n³`; no partial cells are kept.
pub fn generate_lattice(spec: &LatticeSpec) -> Result<Vec<Site>> {
    spec.validate()?;
    let n = spec.cells_per_edge() as i32;
    let lo = -(n / 2);
    let hi = lo + n;
    let mut sites = Vec::with_capacity(8 * (n as usize).pow(3));
    for cx in lo..hi {
        for cy in lo..hi {
            for cz in lo..hi {
                for b in BASIS {
                    sites.push([4 * cx + b[0], 4 * cy + b[1], 4 * cz + b[2]]);
                }
            }
        }
    }
    Ok(sites)
}

/// Squared distance in units of (a₀/4)².
pub fn norm2(u: Site) -> i64 {
    u.iter().map(|&c| (c as i64) * (c as i64)).sum()
}
