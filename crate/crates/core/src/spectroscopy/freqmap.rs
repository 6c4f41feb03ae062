use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transitions::adjacent_pairs;
use crate::error::{invalid, Result};
use crate::spin::{diagonalize, sx_between, SpinSystem};

/// Transitions below this frequency (MHz) are degenerate pairs, not lines.
const MIN_FREQUENCY: f64 = 1e-6;

/// One (field, transition) sample of a frequency–field map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    /// Tesla.
    pub field_b: f64,
    pub label_upper: usize,
    pub label_lower: usize,
    /// MHz.
    pub frequency: f64,
    pub intensity: f64,
}

/// Frequency and intensity of every adjacent-doublet transition at each
/// grid field, keeping entries with intensity above the floor and a
/// non-zero frequency. Rows are ordered by field, then by label pair.
pub fn frequency_field_map(sys: &SpinSystem, field_grid: &[f64], intensity_floor: f64) -> Result<Vec<MapPoint>> {
    if field_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("field grid must be strictly ascending");
    }
    if !(intensity_floor >= 0.0) {
        return invalid("intensity floor must be non-negative");
    }
    let rows = field_grid
        .par_iter()
        .map(|&b| -> Result<Vec<MapPoint>> {
            let eig = diagonalize(sys, b)?;
            let mut out = Vec::new();
            for (i, j) in adjacent_pairs(&eig) {
                let (ei, ej) = (eig.energies[i - 1], eig.energies[j - 1]);
                let (upper, lower) = if ei >= ej { (i, j) } else { (j, i) };
                let frequency = (ei - ej).abs();
                let element = sx_between(sys, &eig.states[upper - 1], &eig.states[lower - 1]).norm();
                let intensity = element * element;
                if frequency > MIN_FREQUENCY && intensity > intensity_floor {
                    out.push(MapPoint { field_b: b, label_upper: upper, label_lower: lower, frequency, intensity });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}
