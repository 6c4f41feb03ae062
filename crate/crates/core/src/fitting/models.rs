//! Model curves with analytic parameter gradients.

use std::f64::consts::PI;

/// A scalar model `y = f(x; p)`.
pub trait Model {
    fn names(&self) -> Vec<String>;
    fn value(&self, x: f64, p: &[f64]) -> f64;
    fn gradient(&self, x: f64, p: &[f64]) -> Vec<f64>;
}

/// `A·exp(−k₂t − (t/T_S)ⁿ)` with `p = [A, k₂, T_S, n]`, `k₂ = 1/T₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoDecay;

impl Model for EchoDecay {
    fn names(&self) -> Vec<String> {
        ["amplitude", "k2", "TS", "n"].map(String::from).to_vec()
    }

    fn value(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-p[1] * t - (t / p[2]).powf(p[3])).exp()
    }

    fn gradient(&self, t: f64, p: &[f64]) -> Vec<f64> {
        let y = self.value(t, p);
        let u = t / p[2];
        let s = u.powf(p[3]);
        let ln_u = if u > 0.0 { u.ln() } else { 0.0 };
        vec![
            y / p[0],
            -t * y,
            y * s * p[3] / p[2],
            -y * s * ln_u,
        ]
    }
}

/// `P·Tⁿ + E·exp(−Δ/T)` (`n = 7`), `p = [P, E, Δ]`, T in K, rate in s⁻¹.
#[derive(Debug, Clone, Copy)]
pub struct RamanOrbach {
    pub power: f64,
}

impl Default for RamanOrbach {
    fn default() -> Self {
        RamanOrbach { power: 7.0 }
    }
}

impl Model for RamanOrbach {
    fn names(&self) -> Vec<String> {
        ["P", "E", "Delta_over_kB"].map(String::from).to_vec()
    }

    fn value(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * t.powf(self.power) + p[1] * (-p[2] / t).exp()
    }

    fn gradient(&self, t: f64, p: &[f64]) -> Vec<f64> {
        let e = (-p[2] / t).exp();
        vec![t.powf(self.power), e, -p[1] * e / t]
    }
}

/// Inversion recovery `M₀(1 − 2e^{−t/T₁}) + c`, `p = [T₁, M₀, c]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpRecovery;

impl Model for ExpRecovery {
    fn names(&self) -> Vec<String> {
        ["T1", "M0", "offset"].map(String::from).to_vec()
    }

    fn value(&self, t: f64, p: &[f64]) -> f64 {
        p[1] * (1.0 - 2.0 * (-t / p[0]).exp()) + p[2]
    }

    fn gradient(&self, t: f64, p: &[f64]) -> Vec<f64> {
        let e = (-t / p[0]).exp();
        vec![-2.0 * p[1] * e * t / (p[0] * p[0]), 1.0 - 2.0 * e, 1.0]
    }
}

/// Absorption line or its field derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineShape {
    Absorption,
    Derivative,
}

/// Sum of unit-normalized Gaussians scaled by their areas,
/// `p = [c₁, w₁, a₁, c₂, w₂, a₂, …]` with centre, FWHM and area.
#[derive(Debug, Clone, Copy)]
pub struct GaussianLines {
    pub n_lines: usize,
    pub shape: LineShape,
}

pub(crate) const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

impl Model for GaussianLines {
    fn names(&self) -> Vec<String> {
        (1..=self.n_lines).flat_map(|k| [format!("center_{k}"), format!("fwhm_{k}"), format!("area_{k}")]).collect()
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        p.chunks(3)
            .map(|l| {
                let s = l[1] / FWHM_PER_SIGMA;
                let u = (x - l[0]) / s;
                let g = l[2] * (-0.5 * u * u).exp() / (s * (2.0 * PI).sqrt());
                match self.shape {
                    LineShape::Absorption => g,
                    LineShape::Derivative => -u / s * g,
                }
            })
            .sum()
    }

    fn gradient(&self, x: f64, p: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(p.len());
        for l in p.chunks(3) {
            let (c, w, a) = (l[0], l[1], l[2]);
            let s = w / FWHM_PER_SIGMA;
            let d = x - c;
            let u = d / s;
            let g = (-0.5 * u * u).exp() / (s * (2.0 * PI).sqrt());
            match self.shape {
                LineShape::Absorption => {
                    // ∂/∂c = a g d/s², ∂/∂s = a g (d²/s³ − 1/s).
                    let ds = a * g * (d * d / (s * s * s) - 1.0 / s);
                    out.extend([a * g * d / (s * s), ds / FWHM_PER_SIGMA, g]);
                }
                LineShape::Derivative => {
                    // h = −a d g / s².
                    let h = -d * g / (s * s);
                    let dc = a * g / (s * s) * (1.0 - d * d / (s * s));
                    let ds = a * (-d * g) * (d * d / s.powi(5) - 3.0 / s.powi(3));
                    out.extend([dc, ds / FWHM_PER_SIGMA, h]);
                }
            }
        }
        out
    }
}

/// `p = [slope, intercept]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Line;

impl Model for Line {
    fn names(&self) -> Vec<String> {
        ["slope", "intercept"].map(String::from).to_vec()
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * x + p[1]
    }

    fn gradient(&self, x: f64, _p: &[f64]) -> Vec<f64> {
        vec![x, 1.0]
    }
}
