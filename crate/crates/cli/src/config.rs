//! Run configuration. Every section has defaults, so an empty file is a
//! valid config; unknown keys anywhere are rejected.

use std::path::Path;

use hybridspin::bath::{CceParams, KohnLuttinger, LatticeSpec, NeighbourShell, SILICON_A0, SI29_ABUNDANCE};
use hybridspin::fitting::LineShape;
use hybridspin::spectroscopy::{SpectrumMode, DEFAULT_INTENSITY_FLOOR};
use hybridspin::SpinSystem;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: String,
    pub donor: DonorSection,
    pub levels: FieldGrid,
    pub resonances: ResonanceSection,
    pub freqmap: FreqmapSection,
    pub rabi: RabiSection,
    pub cce: CceSection,
    pub cce_converge: ConvergeSection,
    pub fit: FitSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out: "out".into(),
            donor: DonorSection::default(),
            levels: FieldGrid::default(),
            resonances: ResonanceSection::default(),
            freqmap: FreqmapSection::default(),
            rabi: RabiSection::default(),
            cce: CceSection::default(),
            cce_converge: ConvergeSection::default(),
            fit: FitSection::default(),
        }
    }
}

/// Donor species; defaults are bismuth in silicon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DonorSection {
    pub nuclear_spin: f64,
    /// MHz.
    pub hyperfine_a: f64,
    pub g_factor: f64,
    pub nuclear_ratio_delta: f64,
}

impl Default for DonorSection {
    fn default() -> Self {
        let s = SpinSystem::si_bi();
        DonorSection {
            nuclear_spin: s.nuclear_spin.value(),
            hyperfine_a: s.hyperfine_a,
            g_factor: s.g_factor,
            nuclear_ratio_delta: s.nuclear_ratio_delta,
        }
    }
}

impl DonorSection {
    pub fn system(&self) -> Result<SpinSystem, CliError> {
        Ok(SpinSystem::new(self.nuclear_spin, self.hyperfine_a, self.g_factor, self.nuclear_ratio_delta)?)
    }
}

/// Evenly spaced field grid, tesla, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldGrid {
    pub b_min: f64,
    pub b_max: f64,
    pub n_points: usize,
}

impl Default for FieldGrid {
    fn default() -> Self {
        FieldGrid { b_min: 0.0, b_max: 0.6, n_points: 601 }
    }
}

impl FieldGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.b_min >= 0.0 && self.b_max > self.b_min && self.b_max.is_finite()) || self.n_points < 2 {
            return Err(CliError::Usage(format!(
                "field grid needs 0 <= b_min < b_max and n_points >= 2, got [{}, {}] x {}",
                self.b_min, self.b_max, self.n_points
            )));
        }
        let step = (self.b_max - self.b_min) / (self.n_points - 1) as f64;
        Ok((0..self.n_points).map(|k| self.b_min + k as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceSection {
    /// MHz.
    pub frequency: f64,
    /// Search range, tesla.
    pub b_min: f64,
    pub b_max: f64,
    pub intensity_floor: f64,
    /// Line width of the synthesized spectrum, mT.
    pub fwhm_mt: f64,
    pub spectrum_mode: SpectrumMode,
    /// Spectrum grid spacing, mT.
    pub spectrum_step_mt: f64,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        ResonanceSection {
            frequency: 4044.0,
            b_min: 0.0,
            b_max: 0.6,
            intensity_floor: DEFAULT_INTENSITY_FLOOR,
            fwhm_mt: 0.7,
            spectrum_mode: SpectrumMode::Derivative,
            spectrum_step_mt: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreqmapSection {
    pub b_min: f64,
    pub b_max: f64,
    pub n_points: usize,
    pub intensity_floor: f64,
}

impl Default for FreqmapSection {
    fn default() -> Self {
        FreqmapSection { b_min: 0.0, b_max: 0.6, n_points: 601, intensity_floor: DEFAULT_INTENSITY_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiSection {
    /// MHz.
    pub frequency: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub intensity_floor: f64,
    /// Drive amplitude gμ_B B₁/(2h), MHz.
    pub drive: f64,
}

impl Default for RabiSection {
    fn default() -> Self {
        RabiSection { frequency: 4044.0, b_min: 0.0, b_max: 0.6, intensity_floor: DEFAULT_INTENSITY_FLOOR, drive: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CceSection {
    /// (upper, lower) labels.
    pub transition: [usize; 2],
    /// T.
    pub field_b: f64,
    pub b_direction: [f64; 3],
    pub pair_shell: NeighbourShell,
    pub n_configs: usize,
    /// Cube edge, nm.
    pub side: f64,
    pub abundance: f64,
    /// ms.
    pub t_max: f64,
    pub t_step: f64,
    /// Fit the ensemble curve and store the result with the run.
    pub fit: bool,
    pub free_amplitude: bool,
    pub kohn_luttinger: KohnLuttinger,
}

impl Default for CceSection {
    fn default() -> Self {
        let p = CceParams::si_bi_defaults(14.0, 20);
        CceSection {
            transition: [p.transition.0, p.transition.1],
            field_b: p.field_b,
            b_direction: p.b_direction,
            pair_shell: NeighbourShell::Third,
            n_configs: p.n_configs,
            side: p.lattice.side,
            abundance: SI29_ABUNDANCE,
            t_max: 1.2,
            t_step: 0.01,
            fit: true,
            free_amplitude: true,
            kohn_luttinger: KohnLuttinger::default(),
        }
    }
}

impl CceSection {
    pub fn time_grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.t_step > 0.0 && self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Usage("cce.t_step and cce.t_max must be positive".into()));
        }
        let n = (self.t_max / self.t_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * self.t_step).collect())
    }

    pub fn params(&self, seed: u64) -> Result<CceParams, CliError> {
        let lattice = LatticeSpec { a0: SILICON_A0, side: self.side };
        let p = CceParams {
            transition: (self.transition[0], self.transition[1]),
            field_b: self.field_b,
            b_direction: self.b_direction,
            r_max: self.pair_shell.radius(lattice.a0),
            n_configs: self.n_configs,
            seed_base: seed,
            lattice,
            abundance: self.abundance,
            time_grid: self.time_grid()?,
            kohn_luttinger: self.kohn_luttinger,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    /// nm.
    pub sides: Vec<f64>,
    pub pair_shells: Vec<NeighbourShell>,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        ConvergeSection {
            sides: vec![7.0, 10.0, 14.0, 18.0],
            pair_shells: vec![NeighbourShell::Second, NeighbourShell::Third],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FitModel {
    EchoDecay,
    T1RamanOrbach,
    ExpRecovery,
    GaussianLines,
    LinearBaseline,
    RabiFft,
}

impl FitModel {
    /// Required input columns.
    pub fn columns(self) -> [&'static str; 2] {
        match self {
            FitModel::EchoDecay => ["t_ms", "amplitude"],
            FitModel::T1RamanOrbach => ["temperature_k", "rate_per_s"],
            FitModel::ExpRecovery => ["t", "signal"],
            FitModel::GaussianLines => ["field_mt", "signal"],
            FitModel::LinearBaseline => ["x", "y"],
            FitModel::RabiFft => ["t_us", "signal"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub model: Option<FitModel>,
    pub input: Option<String>,
    /// Hold Δ/k_B (K) in the T₁ model.
    pub fix_delta: Option<f64>,
    pub n_lines: usize,
    pub shape: LineShape,
    pub free_amplitude: bool,
    /// Baseline windows `[lo, hi]` in x units.
    pub windows: Vec<[f64; 2]>,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            model: None,
            input: None,
            fix_delta: None,
            n_lines: 2,
            shape: LineShape::Derivative,
            free_amplitude: true,
            windows: Vec::new(),
        }
    }
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn render(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config always serializes")
}
