//! Fitting entry points and the shared result type.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, standard_errors, LmConfig, LmReport, Problem};
use super::models::{EchoDecay, ExpRecovery, GaussianLines, Line, LineShape, Model, RamanOrbach};
use crate::bath::EchoCurve;
use crate::error::{invalid, Result};

/// Rate below which T₂ is reported as effectively infinite, 1/ms (1e3 s).
pub const INFINITE_T2_RATE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    /// Held at its given value rather than fitted.
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    /// `‖r‖` of the (weighted) residuals.
    pub residual_norm: f64,
    pub converged: bool,
    pub n_iterations: usize,
    pub notes: Vec<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.param(name).and_then(|p| p.std_error)
    }
}

/// Data, weights and box for one model fit. Fixed parameters keep their
/// start value.
struct Setup<'a> {
    model: &'a dyn Model,
    xs: &'a [f64],
    ys: &'a [f64],
    sigma: Option<&'a [f64]>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scale: Vec<f64>,
    fixed: Vec<bool>,
}

struct Outcome {
    params: Vec<f64>,
    std_errors: Vec<Option<f64>>,
    report: LmReport,
}

impl Outcome {
    fn norm(&self) -> f64 {
        self.report.residual_norm()
    }
}

fn run(setup: &Setup<'_>, start: &[f64]) -> Result<Outcome> {
    let free: Vec<usize> = (0..start.len()).filter(|&j| !setup.fixed[j]).collect();
    let full = |x: &[f64]| {
        let mut p = start.to_vec();
        for (k, &j) in free.iter().enumerate() {
            p[j] = x[k];
        }
        p
    };
    let residuals = |x: &[f64], r: &mut [f64]| {
        let p = full(x);
        for (i, (&x, &y)) in setup.xs.iter().zip(setup.ys).enumerate() {
            let w = setup.sigma.map_or(1.0, |s| s[i]);
            r[i] = (setup.model.value(x, &p) - y) / w;
        }
    };
    let pick = |v: &[f64]| free.iter().map(|&j| v[j]).collect::<Vec<f64>>();
    let problem = Problem {
        residuals: &residuals,
        n_residuals: setup.xs.len(),
        lower: pick(&setup.lower),
        upper: pick(&setup.upper),
        scale: pick(&setup.scale),
    };
    let report = levenberg_marquardt(&problem, &pick(start), &LmConfig::default())?;
    let params = full(&report.x);
    // Parameters pinned at a bound carry no error estimate.
    let interior: Vec<bool> = free
        .iter()
        .enumerate()
        .map(|(k, &j)| report.x[k] > setup.lower[j] && report.x[k] < setup.upper[j])
        .collect();
    let se_free = standard_errors(&report.jacobian, &report.residuals, &interior);
    let mut std_errors = vec![None; start.len()];
    for (k, &j) in free.iter().enumerate() {
        std_errors[j] = se_free[k];
    }
    Ok(Outcome { params, std_errors, report })
}

/// Best converged outcome over several starts, else the best overall.
fn best_of(setup: &Setup<'_>, starts: &[Vec<f64>]) -> Result<Outcome> {
    let mut best: Option<Outcome> = None;
    for s in starts {
        let o = run(setup, s)?;
        let better = match &best {
            None => true,
            Some(b) => (o.report.converged, -o.norm()) > (b.report.converged, -b.norm()),
        };
        if better {
            best = Some(o);
        }
    }
    best.ok_or_else(|| crate::Error::InvalidArgument("no starting points".into()))
}

fn result(model: &str, names: Vec<String>, setup: &Setup<'_>, o: &Outcome, converged: bool) -> FitResult {
    let params = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| FitParam {
            name,
            value: o.params[j],
            std_error: if converged { o.std_errors[j] } else { None },
            fixed: setup.fixed[j],
        })
        .collect();
    FitResult {
        model: model.into(),
        params,
        residual_norm: o.norm(),
        converged,
        n_iterations: o.report.iterations,
        notes: Vec::new(),
    }
}

fn check_xy(xs: &[f64], ys: &[f64], min: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return invalid(format!("{} abscissae but {} ordinates", xs.len(), ys.len()));
    }
    if xs.len() < min {
        return invalid(format!("need at least {min} points, got {}", xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return invalid("data contain non-finite values");
    }
    Ok(())
}

fn check_sigma(sigma: Option<&[f64]>, n: usize) -> Result<()> {
    if let Some(s) = sigma {
        if s.len() != n || s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return invalid("per-point σ must be positive and match the data length");
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoFitOptions {
    /// Fit an overall amplitude instead of fixing it at 1.
    pub free_amplitude: bool,
}

impl Default for EchoFitOptions {
    fn default() -> Self {
        EchoFitOptions { free_amplitude: true }
    }
}

/// Starting values of the stretch exponent.
pub const ECHO_N_STARTS: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 3.5];

/// Fit `A·exp(−t/T₂ − (t/T_S)ⁿ)` to an echo curve (t in ms).
///
/// T₂ is fitted as the rate `1/T₂ ≥ 0` and reported as `+∞` (JSON `null`)
/// with a note when that rate is below [`INFINITE_T2_RATE`]. The exponent
/// is kept in `[1.1, 6]`: at `n = 1` the stretched term duplicates the
/// exponential one and the split between them is arbitrary.
pub fn fit_echo_decay(curve: &EchoCurve, opts: &EchoFitOptions) -> Result<FitResult> {
    fit_echo_decay_data(&curve.times, &curve.amplitude, None, opts)
}

pub fn fit_echo_decay_data(t: &[f64], y: &[f64], sigma: Option<&[f64]>, opts: &EchoFitOptions) -> Result<FitResult> {
    check_xy(t, y, 6)?;
    check_sigma(sigma, t.len())?;
    if t.iter().any(|v| *v < 0.0) {
        return invalid("echo times must be non-negative");
    }
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(ymax > 0.0) {
        return invalid("echo amplitudes must include positive values");
    }
    let tmax = t.iter().cloned().fold(0.0, f64::max);
    if !(tmax > 0.0) {
        return invalid("echo times must span a positive interval");
    }
    let y0 = y[t.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap()];
    let a0 = if opts.free_amplitude { y0.max(1e-3 * ymax).max(f64::MIN_POSITIVE) } else { 1.0 };
    // 1/e crossing as the decay-time guess.
    let ts0 = t
        .iter()
        .zip(y)
        .find(|(_, &v)| v < a0 / std::f64::consts::E)
        .map(|(&x, _)| x)
        .unwrap_or(2.0 * tmax)
        .max(1e-3 * tmax);
    let setup = Setup {
        model: &EchoDecay,
        xs: t,
        ys: y,
        sigma,
        lower: vec![0.0, 0.0, 1e-6 * tmax, 1.1],
        upper: vec![10.0 * ymax.max(1.0), 1e4 / tmax, 1e4 * tmax, 6.0],
        scale: vec![a0, 1.0 / tmax, ts0, 1.0],
        fixed: vec![!opts.free_amplitude, false, false, false],
    };
    let starts: Vec<Vec<f64>> = ECHO_N_STARTS.iter().map(|&n| vec![a0, 1e-3 / ts0, ts0, n]).collect();
    let o = best_of(&setup, &starts)?;
    let mut res = result("echo_decay", EchoDecay.names(), &setup, &o, o.report.converged);
    // Replace the rate by T₂ itself.
    let k2 = o.params[1];
    let p = &mut res.params[1];
    p.name = "T2".into();
    if k2 < INFINITE_T2_RATE {
        p.value = f64::INFINITY;
        p.std_error = None;
        res.notes.push("T2 effectively infinite (fitted 1/T2 below 1e-6 per ms)".into());
    } else {
        p.value = 1.0 / k2;
        p.std_error = p.std_error.map(|s| s / (k2 * k2));
    }
    Ok(res)
}

/// Fit `1/T₁ = P·T⁷ + E·exp(−Δ/T)` to (temperature K, rate s⁻¹) pairs.
///
/// Residuals are relative (`σ_i = rate_i`) because rates span decades.
/// With `delta_fixed` the activation temperature is held and reported as a
/// fixed parameter.
pub fn fit_t1_temperature(temps: &[f64], rates: &[f64], delta_fixed: Option<f64>) -> Result<FitResult> {
    check_xy(temps, rates, 4)?;
    if temps.iter().any(|v| *v <= 0.0) {
        return invalid("temperatures must be positive");
    }
    if rates.iter().any(|v| *v <= 0.0) {
        return invalid("rates must be positive");
    }
    if let Some(d) = delta_fixed {
        if !(d >= 0.0 && d.is_finite()) {
            return invalid("fixed Δ must be finite and non-negative");
        }
    }
    let model = RamanOrbach::default();
    // Variable projection start: (P, E) are linear for fixed Δ.
    let linear = |delta: f64| -> (f64, f64, f64) {
        let cols = |t: f64| (t.powi(7), (-delta / t).exp());
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in temps.iter().zip(rates) {
            let (c1, c2) = cols(t);
            let (c1, c2) = (c1 / y, c2 / y);
            a11 += c1 * c1;
            a12 += c1 * c2;
            a22 += c2 * c2;
            b1 += c1;
            b2 += c2;
        }
        let det = a11 * a22 - a12 * a12;
        let (mut p, mut e) = if det.abs() > 1e-300 && det.is_finite() {
            ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
        } else {
            (-1.0, -1.0)
        };
        if !(p >= 0.0 && e >= 0.0) {
            let only_p = if a11 > 0.0 { b1 / a11 } else { 0.0 };
            let only_e = if a22 > 0.0 { b2 / a22 } else { 0.0 };
            let cost = |p: f64, e: f64| -> f64 {
                temps.iter().zip(rates).map(|(&t, &y)| ((model.value(t, &[p, e, delta]) - y) / y).powi(2)).sum()
            };
            (p, e) = if cost(only_p, 0.0) <= cost(0.0, only_e) { (only_p, 0.0) } else { (0.0, only_e) };
        }
        let c = temps.iter().zip(rates).map(|(&t, &y)| ((model.value(t, &[p, e, delta]) - y) / y).powi(2)).sum();
        (p, e, c)
    };
    let (delta0, (p0, e0, _)) = match delta_fixed {
        Some(d) => (d, linear(d)),
        None => (0..=60)
            .map(|k| 10f64.powf(k as f64 / 15.0))
            .map(|d| (d, linear(d)))
            .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2))
            .expect("non-empty grid"),
    };
    let tmax = temps.iter().cloned().fold(0.0, f64::max);
    let ymax = rates.iter().cloned().fold(0.0, f64::max);
    let setup = Setup {
        model: &model,
        xs: temps,
        ys: rates,
        sigma: Some(rates),
        lower: vec![0.0, 0.0, 0.0],
        upper: vec![f64::INFINITY, f64::INFINITY, 1e5],
        scale: vec![p0.max(1e-6 * ymax / tmax.powi(7)), e0.max(1e-6 * ymax), delta0.max(10.0)],
        fixed: vec![false, false, delta_fixed.is_some()],
    };
    let o = run(&setup, &[p0, e0, delta0])?;
    let mut res = result("t1_raman_orbach", model.names(), &setup, &o, o.report.converged);
    if delta_fixed.is_none() && res.std_error("Delta_over_kB").is_none() && res.converged {
        res.notes.push("Delta_over_kB not identifiable from these data".into());
    }
    Ok(res)
}

/// Fit inversion recovery `M₀(1 − 2e^{−t/T₁}) + c`.
///
/// Data with no spread are degenerate (T₁ unconstrained) and come back
/// with `converged = false`.
pub fn fit_exp_recovery(t: &[f64], m: &[f64]) -> Result<FitResult> {
    check_xy(t, m, 4)?;
    let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let tmax = t.iter().cloned().fold(0.0, f64::max);
    let tpos = t.iter().cloned().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    if !(tmax > 0.0) {
        return invalid("recovery times must span a positive interval");
    }
    let first = m[t.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap()];
    let last = m[t.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap()];
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let m00 = 0.5 * (last - first);
    let c0 = 0.5 * (last + first);
    let setup = Setup {
        model: &ExpRecovery,
        xs: t,
        ys: m,
        sigma: None,
        lower: vec![1e-6 * tpos.min(tmax), f64::NEG_INFINITY, f64::NEG_INFINITY],
        upper: vec![1e4 * tmax, f64::INFINITY, f64::INFINITY],
        scale: vec![tmax, span, span],
        fixed: vec![false; 3],
    };
    let t_starts = [0.03, 0.1, 0.3, 1.0, 3.0].map(|f| (f * tmax).max(setup.lower[0]));
    let starts: Vec<Vec<f64>> = t_starts.iter().map(|&t1| vec![t1, m00, c0]).collect();
    let o = best_of(&setup, &starts)?;
    let degenerate = hi == lo;
    let mut res = result("exp_recovery", ExpRecovery.names(), &setup, &o, o.report.converged && !degenerate);
    if degenerate {
        res.notes.push("data are constant; T1 is undetermined".into());
    }
    Ok(res)
}

/// Trapezoidal running integral.
fn integrate(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for k in 1..x.len() {
        out[k] = out[k - 1] + 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
    }
    out
}

/// Fit `n_lines` Gaussians (or their derivatives) to a spectrum with field
/// in mT. Areas are in signal·mT.
///
/// Lines whose parameters cannot be told apart (a singular Jacobian, e.g.
/// coincident centres) make the fit report `converged = false`.
pub fn fit_gaussian_lines(field_mt: &[f64], signal: &[f64], n_lines: usize, shape: LineShape) -> Result<FitResult> {
    check_xy(field_mt, signal, 3 * n_lines.max(1) + 1)?;
    if n_lines == 0 {
        return invalid("need at least one line");
    }
    if field_mt.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("field grid must be strictly ascending");
    }
    let absorption = match shape {
        LineShape::Absorption => signal.to_vec(),
        LineShape::Derivative => integrate(field_mt, signal),
    };
    let (x0, x1) = (field_mt[0], field_mt[field_mt.len() - 1]);
    let step = (x1 - x0) / (field_mt.len() - 1) as f64;
    // Largest local maxima of the absorption profile.
    let mut peaks: Vec<usize> = (1..absorption.len() - 1)
        .filter(|&i| absorption[i] >= absorption[i - 1] && absorption[i] > absorption[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| absorption[b].total_cmp(&absorption[a]));
    peaks.truncate(n_lines);
    while peaks.len() < n_lines {
        peaks.push(absorption.len() * (peaks.len() + 1) / (n_lines + 1));
    }
    peaks.sort_unstable();
    let mut start = Vec::with_capacity(3 * n_lines);
    for &i in &peaks {
        let half = 0.5 * absorption[i];
        let mut l = i;
        while l > 0 && absorption[l] > half {
            l -= 1;
        }
        let mut r = i;
        while r + 1 < absorption.len() && absorption[r] > half {
            r += 1;
        }
        let fwhm = (field_mt[r] - field_mt[l]).max(2.0 * step);
        start.extend([field_mt[i], fwhm, absorption[i] * fwhm * 1.064_467]);
    }
    let amp = start.chunks(3).map(|l| l[2].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut scale = Vec::new();
    for l in start.chunks(3) {
        lower.extend([x0, 0.5 * step, f64::NEG_INFINITY]);
        upper.extend([x1, x1 - x0, f64::INFINITY]);
        scale.extend([l[1], l[1], amp]);
    }
    let model = GaussianLines { n_lines, shape };
    let setup = Setup { model: &model, xs: field_mt, ys: signal, sigma: None, lower, upper, scale, fixed: vec![false; 3 * n_lines] };
    let o = run(&setup, &start)?;
    let identifiable = !singular(&o) && !collapsed(&o.params);
    let mut res = result("gaussian_lines", model.names(), &setup, &o, o.report.converged && identifiable);
    if !identifiable {
        res.notes.push("line parameters are not separately identifiable".into());
    }
    Ok(res)
}

/// A line with vanishing area, or two lines on top of each other, leaves
/// the corresponding parameters free.
fn collapsed(p: &[f64]) -> bool {
    let total: f64 = p.chunks(3).map(|l| l[2].abs()).sum();
    let lines: Vec<&[f64]> = p.chunks(3).collect();
    lines.iter().any(|l| l[2].abs() <= 1e-8 * total)
        || lines.iter().enumerate().any(|(i, a)| {
            lines[i + 1..].iter().any(|b| (a[0] - b[0]).abs() <= 1e-6 * a[1].min(b[1]) && (a[1] - b[1]).abs() <= 1e-6 * a[1])
        })
}

/// Rank test on the Jacobian alone (unit residuals stand in for the real
/// ones, which may vanish for noiseless data).
fn singular(o: &Outcome) -> bool {
    let ones = vec![1.0; o.report.jacobian.nrows()];
    let all = vec![true; o.report.jacobian.ncols()];
    standard_errors(&o.report.jacobian, &ones, &all).iter().any(|s| s.is_none())
}

fn in_windows(x: f64, windows: &[(f64, f64)]) -> bool {
    windows.iter().any(|&(a, b)| x >= a.min(b) && x <= a.max(b))
}

/// Least-squares line through the points inside `windows`.
pub fn fit_linear_baseline(x: &[f64], y: &[f64], windows: &[(f64, f64)]) -> Result<FitResult> {
    check_xy(x, y, 3)?;
    if windows.is_empty() {
        return invalid("no baseline windows given");
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(xv, _)| in_windows(**xv, windows)).map(|(a, b)| (*a, *b)).unzip();
    if xs.len() < 2 {
        return invalid(format!("baseline windows select {} points, need 2", xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return invalid("baseline windows select a single abscissa");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let p = [slope, my - slope * mx];
    let resid: Vec<f64> = xs.iter().zip(&ys).map(|(&a, &b)| Line.value(a, &p) - b).collect();
    let jac = nalgebra::DMatrix::from_fn(xs.len(), 2, |i, j| Line.gradient(xs[i], &p)[j]);
    let se = standard_errors(&jac, &resid, &[true, true]);
    let params = Line
        .names()
        .into_iter()
        .zip(p)
        .zip(se)
        .map(|((name, value), std_error)| FitParam { name, value, std_error, fixed: false })
        .collect();
    Ok(FitResult {
        model: "linear_baseline".into(),
        params,
        residual_norm: resid.iter().map(|v| v * v).sum::<f64>().sqrt(),
        converged: true,
        n_iterations: 1,
        notes: Vec::new(),
    })
}

/// `y` minus the baseline fitted inside `windows`, over the whole curve.
pub fn subtract_linear_baseline(x: &[f64], y: &[f64], windows: &[(f64, f64)]) -> Result<Vec<f64>> {
    let fit = fit_linear_baseline(x, y, windows)?;
    let p = [fit.params[0].value, fit.params[1].value];
    Ok(x.iter().zip(y).map(|(&a, &b)| b - Line.value(a, &p)).collect())
}
