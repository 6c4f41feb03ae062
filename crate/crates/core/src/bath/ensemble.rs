//! CCE-2 echo of whole configurations, ensemble averages and convergence
//! scans over cube size and pair cut-off.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_configuration, BathConfiguration, BathModel, NeighbourShell};
use super::couplings::KohnLuttinger;
use super::echo::{cce2_product, check_time_grid, EchoCurve};
use super::lattice::{generate_lattice, LatticeSpec, SILICON_A0};
use super::occupancy::SI29_ABUNDANCE;
use crate::error::{invalid, Result};
use crate::spin::{diagonalize, expectation_sz, SpinSystem};

/// Inputs of an ensemble echo calculation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CceParams {
    /// (upper, lower) level labels.
    pub transition: (usize, usize),
    /// T.
    pub field_b: f64,
    /// Field direction in the cubic crystal frame; need not be normalized.
    pub b_direction: [f64; 3],
    /// Pair cut-off, nm.
    pub r_max: f64,
    pub n_configs: usize,
    pub seed_base: u64,
    pub lattice: LatticeSpec,
    pub abundance: f64,
    /// ms, ascending from 0.
    pub time_grid: Vec<f64>,
    pub kohn_luttinger: KohnLuttinger,
}

impl CceParams {
    /// 11-10 at 0.3446 T, 3rd-shell pairs, field ⟂ [111] along [1,−1,0].
    pub fn si_bi_defaults(side: f64, n_configs: usize) -> Self {
        CceParams {
            transition: (11, 10),
            field_b: 0.3446,
            b_direction: [1.0, -1.0, 0.0],
            r_max: NeighbourShell::Third.radius(SILICON_A0),
            n_configs,
            seed_base: 1,
            lattice: LatticeSpec::new(side),
            abundance: SI29_ABUNDANCE,
            time_grid: (0..=120).map(|k| k as f64 * 0.01).collect(),
            kohn_luttinger: KohnLuttinger::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.kohn_luttinger.validate()?;
        check_time_grid(&self.time_grid)?;
        if self.n_configs == 0 {
            return invalid("n_configs must be at least 1");
        }
        if !(self.field_b >= 0.0 && self.field_b.is_finite()) {
            return invalid(format!("field must be finite and non-negative, got {}", self.field_b));
        }
        if self.transition.0 == self.transition.1 {
            return invalid("transition needs two distinct levels");
        }
        Ok(())
    }
}

/// Electron polarizations `⟨Sz⟩` of the two levels of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionedLevels {
    pub s_a: f64,
    pub s_b: f64,
    /// Bare ²⁹Si Zeeman frequency, MHz.
    pub f_z: f64,
}

pub fn conditioned_levels(sys: &SpinSystem, transition: (usize, usize), field_b: f64) -> Result<ConditionedLevels> {
    let eig = diagonalize(sys, field_b)?;
    Ok(ConditionedLevels {
        s_a: expectation_sz(&eig, transition.0)?,
        s_b: expectation_sz(&eig, transition.1)?,
        f_z: sys.constants.gyro_si29 * field_b,
    })
}

/// `|∏ L_pair(t)|` for one configuration.
///
/// Single-nucleus clusters are omitted: with conditioned `I_z` couplings
/// their echo factor is identically 1.
pub fn cce2_echo(config: &BathConfiguration, levels: &ConditionedLevels, times_ms: &[f64]) -> Result<EchoCurve> {
    check_time_grid(times_ms)?;
    let amplitude = cce2_product(&config.pair_couplings(), levels.f_z, levels.s_a, levels.s_b, times_ms);
    Ok(EchoCurve { times: times_ms.to_vec(), amplitude, std_of_mean: None })
}

/// Mean and standard deviation of the mean over curves, summed in the
/// given order.
fn average(times: &[f64], curves: &[Vec<f64>]) -> EchoCurve {
    let n = curves.len() as f64;
    let mut mean = vec![0.0; times.len()];
    for c in curves {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut sem = vec![0.0; times.len()];
    if curves.len() > 1 {
        for c in curves {
            for ((s, v), m) in sem.iter_mut().zip(c).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        sem.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt() / n.sqrt());
    }
    EchoCurve { times: times.to_vec(), amplitude: mean, std_of_mean: Some(sem) }
}

/// Mean echo over `n_configs` baths seeded `seed_base + i`.
///
/// Configurations run on the current rayon pool; the average is reduced in
/// seed order, so the result does not depend on the worker count.
pub fn ensemble_echo(sys: &SpinSystem, params: &CceParams) -> Result<EchoCurve> {
    params.validate()?;
    let levels = conditioned_levels(sys, params.transition, params.field_b)?;
    let sites = generate_lattice(&params.lattice)?;
    let model = BathModel {
        lattice: &params.lattice,
        abundance: params.abundance,
        r_max: params.r_max,
        b_direction: params.b_direction,
        kohn_luttinger: &params.kohn_luttinger,
        constants: &sys.constants,
    };
    let curves = (0..params.n_configs as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = build_configuration(&sites, &model, params.seed_base.wrapping_add(i))?;
            Ok(cce2_echo(&cfg, &levels, &params.time_grid)?.amplitude)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(average(&params.time_grid, &curves))
}

/// Ensemble curve for one (side, cut-off) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    /// nm.
    pub side: f64,
    /// nm.
    pub r_max: f64,
    pub curve: EchoCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// Ordered by cut-off, then side.
    pub entries: Vec<ConvergenceEntry>,
    /// Per cut-off: sup-norm distance between curves at successive sides.
    pub side_distances: Vec<Vec<f64>>,
    /// Per side: sup-norm distance between curves at successive cut-offs.
    pub r_max_distances: Vec<Vec<f64>>,
}

impl ConvergenceStudy {
    pub fn entry(&self, side: f64, r_max: f64) -> Option<&ConvergenceEntry> {
        self.entries.iter().find(|e| e.side == side && e.r_max == r_max)
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn convergence_study(
    sys: &SpinSystem,
    params: &CceParams,
    sides: &[f64],
    r_max_list: &[f64],
) -> Result<ConvergenceStudy> {
    if sides.is_empty() || r_max_list.is_empty() {
        return invalid("convergence study needs at least one side and one cut-off");
    }
    let mut entries = Vec::with_capacity(sides.len() * r_max_list.len());
    for &r_max in r_max_list {
        for &side in sides {
            let p = CceParams { r_max, lattice: LatticeSpec { side, ..params.lattice }, ..params.clone() };
            entries.push(ConvergenceEntry { side, r_max, curve: ensemble_echo(sys, &p)? });
        }
    }
    let ns = sides.len();
    let at = |ri: usize, si: usize| &entries[ri * ns + si].curve.amplitude;
    let side_distances = (0..r_max_list.len())
        .map(|ri| (1..ns).map(|si| sup_distance(at(ri, si - 1), at(ri, si))).collect())
        .collect();
    let r_max_distances = (0..ns)
        .map(|si| (1..r_max_list.len()).map(|ri| sup_distance(at(ri - 1, si), at(ri, si))).collect())
        .collect();
    Ok(ConvergenceStudy { entries, side_distances, r_max_distances })
}
