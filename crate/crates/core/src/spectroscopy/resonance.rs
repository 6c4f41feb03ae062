use rayon::prelude::*;

use super::transitions::{adjacent_pairs, transition_at, Transition};
use crate::error::{invalid, Result};
use crate::spin::{diagonalize, SpinSystem};

/// Default cut separating allowed lines from weak ones (max is 1/4).
///
/// The weak lines that ride next to each allowed line above 7.4 GHz reach
/// intensities of a few 1e-2 at the low-field end, while the allowed set
/// never drops below ~0.09 there, so 0.05 splits the two cleanly.
pub const DEFAULT_INTENSITY_FLOOR: f64 = 0.05;

/// Bracketing grid step, tesla.
const SCAN_STEP: f64 = 5e-4;
/// Root refinement tolerance, tesla.
const ROOT_TOL: f64 = 1e-9;

struct Scan {
    fields: Vec<f64>,
    /// Energies by label at each scan field.
    energies: Vec<Vec<f64>>,
}

fn check_range(range: (f64, f64)) -> Result<()> {
    let (lo, hi) = range;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return invalid(format!("field range must satisfy 0 ≤ lo < hi, got [{lo}, {hi}]"));
    }
    Ok(())
}

fn scan(sys: &SpinSystem, range: (f64, f64)) -> Result<Scan> {
    let (lo, hi) = range;
    let n = ((hi - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let fields: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let energies = fields
        .par_iter()
        .map(|&b| diagonalize(sys, b).map(|e| e.energies))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scan { fields, energies })
}

fn pair_frequency(sys: &SpinSystem, i: usize, j: usize, b: f64) -> Result<f64> {
    let e = diagonalize(sys, b)?.energies;
    Ok((e[i - 1] - e[j - 1]).abs())
}

/// Golden-section search for the extremum of `f` on `[a, b]`.
fn golden_extremum(
    sys: &SpinSystem,
    i: usize,
    j: usize,
    mut a: f64,
    mut b: f64,
    maximize: bool,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = sign * pair_frequency(sys, i, j, c)?;
    let mut fd = sign * pair_frequency(sys, i, j, d)?;
    while (b - a) > ROOT_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sign * pair_frequency(sys, i, j, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sign * pair_frequency(sys, i, j, d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, pair_frequency(sys, i, j, x)?))
}

fn bisect(sys: &SpinSystem, i: usize, j: usize, target: f64, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64> {
    while b - a > ROOT_TOL {
        let mid = 0.5 * (a + b);
        let gm = pair_frequency(sys, i, j, mid)? - target;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn roots_on_scan(sys: &SpinSystem, scan: &Scan, i: usize, j: usize, target: f64) -> Result<Vec<f64>> {
    let f: Vec<f64> = scan.energies.iter().map(|e| (e[i - 1] - e[j - 1]).abs()).collect();
    let mut points: Vec<(f64, f64)> = scan.fields.iter().zip(&f).map(|(&b, &fb)| (b, fb - target)).collect();

    // Turning points of f(B) inside the range, so tangent or closely spaced
    // double roots between two grid points are still bracketed.
    for k in 1..f.len().saturating_sub(1) {
        let left = f[k] - f[k - 1];
        let right = f[k + 1] - f[k];
        if left * right < 0.0 {
            let (b_ext, f_ext) =
                golden_extremum(sys, i, j, scan.fields[k - 1], scan.fields[k + 1], left > 0.0)?;
            points.push((b_ext, f_ext - target));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut roots: Vec<f64> = Vec::new();
    for w in points.windows(2) {
        let ((a, ga), (b, gb)) = (w[0], w[1]);
        if ga == 0.0 {
            roots.push(a);
        } else if ga * gb < 0.0 {
            roots.push(bisect(sys, i, j, target, a, b, ga)?);
        }
    }
    if let Some(&(b, g)) = points.last() {
        if g == 0.0 {
            roots.push(b);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 10.0 * ROOT_TOL);
    Ok(roots)
}

/// All fields in `range` where the `i`–`j` transition frequency equals
/// `f_target` (MHz), ascending. An empty list is a valid answer.
///
/// Roots are bracketed on a 0.5 mT grid, with extra points at every
/// turning point of f(B), then bisected to 1e-9 T.
pub fn resonance_fields(
    sys: &SpinSystem,
    i: usize,
    j: usize,
    f_target: f64,
    range: (f64, f64),
) -> Result<Vec<f64>> {
    check_range(range)?;
    if !(f_target > 0.0 && f_target.is_finite()) {
        return invalid(format!("target frequency must be positive, got {f_target}"));
    }
    let d = sys.dim();
    if i == j || i == 0 || j == 0 || i > d || j > d {
        return invalid(format!("invalid label pair ({i}, {j})"));
    }
    let scan = scan(sys, range)?;
    roots_on_scan(sys, &scan, i, j, f_target)
}

/// Every resonance of adjacent-doublet level pairs (m differing by one) at
/// excitation `f_target`, keeping those with intensity above
/// `intensity_floor`, sorted by field.
pub fn find_all_resonances(
    sys: &SpinSystem,
    f_target: f64,
    range: (f64, f64),
    intensity_floor: f64,
) -> Result<Vec<Transition>> {
    check_range(range)?;
    if !(f_target > 0.0 && f_target.is_finite()) {
        return invalid(format!("target frequency must be positive, got {f_target}"));
    }
    if !(intensity_floor >= 0.0) {
        return invalid("intensity floor must be non-negative");
    }
    let scan = scan(sys, range)?;
    let pairs = adjacent_pairs(&diagonalize(sys, range.0)?);
    let per_pair = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<Transition>> {
            let mut out = Vec::new();
            for b in roots_on_scan(sys, &scan, i, j, f_target)? {
                let t = transition_at(sys, i, j, b)?;
                if t.intensity > intensity_floor {
                    out.push(t);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<Transition> = per_pair.into_iter().flatten().collect();
    all.sort_by(|a, b| a.field_b.total_cmp(&b.field_b));
    Ok(all)
}
