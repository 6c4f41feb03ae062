use serde::{Deserialize, Serialize};

use super::transitions::Transition;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Absorption,
    Derivative,
}

/// Signal sampled on an ascending field grid. Absorption signal is per mT
/// (a line of intensity `I` has area `I` when integrated over field in mT);
/// derivative signal is its field derivative per mT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    /// Tesla.
    pub field_grid: Vec<f64>,
    pub signal: Vec<f64>,
    pub mode: SpectrumMode,
}

impl SpectrumCurve {
    /// Cumulative trapezoid integral over field in mT, starting at zero.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.signal.len());
        let mut acc = 0.0;
        out.push(0.0);
        for k in 1..self.signal.len() {
            let dx = (self.field_grid[k] - self.field_grid[k - 1]) * 1e3;
            acc += 0.5 * dx * (self.signal[k] + self.signal[k - 1]);
            out.push(acc);
        }
        out
    }
}

const FWHM_TO_SIGMA: f64 = 0.424_660_900_144_009_5; // 1 / (2√(2 ln 2))

/// Unit-area Gaussian in field (mT) and its derivative.
pub(crate) fn gaussian_line(x_mt: f64, center_mt: f64, fwhm_mt: f64, mode: SpectrumMode) -> f64 {
    let sigma = fwhm_mt * FWHM_TO_SIGMA;
    let u = (x_mt - center_mt) / sigma;
    let g = (-0.5 * u * u).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    match mode {
        SpectrumMode::Absorption => g,
        SpectrumMode::Derivative => -u / sigma * g,
    }
}

/// Sum of Gaussian lines (or their derivatives), one per resonance, each
/// with absorption area equal to the resonance intensity.
pub fn synthesize_spectrum(
    resonances: &[Transition],
    fwhm_mt: f64,
    mode: SpectrumMode,
    field_grid: &[f64],
) -> Result<SpectrumCurve> {
    if !(fwhm_mt > 0.0 && fwhm_mt.is_finite()) {
        return invalid(format!("linewidth must be positive, got {fwhm_mt}"));
    }
    if field_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("field grid must be strictly ascending");
    }
    let signal = field_grid
        .iter()
        .map(|&b| {
            resonances
                .iter()
                .map(|t| t.intensity * gaussian_line(b * 1e3, t.field_b * 1e3, fwhm_mt, mode))
                .sum()
        })
        .collect();
    Ok(SpectrumCurve { field_grid: field_grid.to_vec(), signal, mode })
}
