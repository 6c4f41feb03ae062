use std::path::Path;

use hybridspin::bath::{convergence_study, ensemble_echo, EchoCurve};
use hybridspin::fitting::{
    fit_echo_decay, fit_echo_decay_data, fit_exp_recovery, fit_gaussian_lines, fit_linear_baseline, fit_t1_temperature,
    rabi_peak, EchoDecay, EchoFitOptions, ExpRecovery, FitResult, GaussianLines, Line, Model, RamanOrbach,
};
use hybridspin::spectroscopy::{find_all_resonances, frequency_field_map, rabi_frequency, synthesize_spectrum};
use hybridspin::spin::{concurrence, diagonalize};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{FitModel, RunConfig};
use crate::output::{json, num, Staged, Table};
use crate::CliError;

pub fn levels(cfg: &RunConfig) -> Result<Staged, CliError> {
    let sys = cfg.donor.system()?;
    let grid = cfg.levels.points()?;
    let d = sys.dim();
    let rows = grid
        .par_iter()
        .map(|&b| -> hybridspin::Result<Vec<String>> {
            let eig = diagonalize(&sys, b)?;
            let mut row = vec![num(b * 1e3)];
            for l in 1..=d {
                row.push(num(eig.energy(l)?));
            }
            for l in 1..=d {
                row.push(num(concurrence(&eig, l)?));
            }
            Ok(row)
        })
        .collect::<hybridspin::Result<Vec<_>>>()?;
    let mut header = vec!["B_mT".to_string()];
    header.extend((1..=d).map(|l| format!("E_{l}_MHz")));
    header.extend((1..=d).map(|l| format!("C_{l}")));
    let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    rows.iter().for_each(|r| t.row(r));
    let mut s = Staged::default();
    s.add("levels.csv", t.into_bytes());
    s.summary = json!({ "n_fields": grid.len(), "n_levels": d });
    Ok(s)
}

pub fn resonances(cfg: &RunConfig) -> Result<Staged, CliError> {
    let sys = cfg.donor.system()?;
    let r = &cfg.resonances;
    let lines = find_all_resonances(&sys, r.frequency, (r.b_min, r.b_max), r.intensity_floor)?;
    if !(r.spectrum_step_mt > 0.0) {
        return Err(CliError::Usage("resonances.spectrum_step_mt must be positive".into()));
    }
    let mut t = Table::new(&["B_mT", "signal"]);
    // No lines: header only.
    if !lines.is_empty() {
        let n = ((r.b_max - r.b_min) * 1e3 / r.spectrum_step_mt + 1e-9).floor() as usize;
        let grid: Vec<f64> = (0..=n).map(|k| r.b_min + k as f64 * r.spectrum_step_mt * 1e-3).collect();
        let spec = synthesize_spectrum(&lines, r.fwhm_mt, r.spectrum_mode, &grid)?;
        for (b, y) in spec.field_grid.iter().zip(&spec.signal) {
            t.row(&[num(b * 1e3), num(*y)]);
        }
    }
    let mut s = Staged::default();
    s.add(
        "resonances.json",
        json(&json!({
            "frequency_mhz": r.frequency,
            "range_t": [r.b_min, r.b_max],
            "intensity_floor": r.intensity_floor,
            "transitions": lines,
        })),
    );
    s.add("spectrum.csv", t.into_bytes());
    s.summary = json!({
        "n_resonances": lines.len(),
        "fields_mt": lines.iter().map(|l| l.field_b * 1e3).collect::<Vec<_>>(),
    });
    Ok(s)
}

pub fn freqmap(cfg: &RunConfig) -> Result<Staged, CliError> {
    let sys = cfg.donor.system()?;
    let f = &cfg.freqmap;
    let grid = crate::config::FieldGrid { b_min: f.b_min, b_max: f.b_max, n_points: f.n_points }.points()?;
    let map = frequency_field_map(&sys, &grid, f.intensity_floor)?;
    let mut t = Table::new(&["B_mT", "label_upper", "label_lower", "f_MHz", "intensity"]);
    for p in &map {
        t.row(&[num(p.field_b * 1e3), p.label_upper.to_string(), p.label_lower.to_string(), num(p.frequency), num(p.intensity)]);
    }
    let mut s = Staged::default();
    s.add("freqmap.csv", t.into_bytes());
    s.summary = json!({ "n_points": map.len() });
    Ok(s)
}

pub fn rabi(cfg: &RunConfig) -> Result<Staged, CliError> {
    let sys = cfg.donor.system()?;
    let r = &cfg.rabi;
    let lines = find_all_resonances(&sys, r.frequency, (r.b_min, r.b_max), r.intensity_floor)?;
    let mut t = Table::new(&[
        "label_upper",
        "label_lower",
        "B_mT",
        "f_MHz",
        "sx_element",
        "dfdB_MHz_per_mT",
        "rabi_MHz",
        "pi_time_ns",
    ]);
    let mut rates = Vec::new();
    for l in &lines {
        let fr = rabi_frequency(&sys, l.label_upper, l.label_lower, l.field_b, r.drive)?;
        rates.push(fr);
        t.row(&[
            l.label_upper.to_string(),
            l.label_lower.to_string(),
            num(l.field_b * 1e3),
            num(l.frequency),
            num(l.sx_element),
            num(l.dfdb),
            num(fr),
            num(1e3 / (2.0 * fr)),
        ]);
    }
    let mut s = Staged::default();
    s.add("rabi.csv", t.into_bytes());
    s.summary = json!({ "n_transitions": lines.len(), "rabi_mhz": rates });
    Ok(s)
}

fn echo_table(curve: &EchoCurve) -> Table {
    let mut t = Table::new(&["t_ms", "amplitude", "std_of_mean"]);
    let sem = curve.std_of_mean.clone().unwrap_or_else(|| vec![0.0; curve.times.len()]);
    for ((x, y), e) in curve.times.iter().zip(&curve.amplitude).zip(&sem) {
        t.row(&[num(*x), num(*y), num(*e)]);
    }
    t
}

pub fn cce(cfg: &RunConfig) -> Result<Staged, CliError> {
    let sys = cfg.donor.system()?;
    let params = cfg.cce.params(cfg.seed)?;
    let curve = ensemble_echo(&sys, &params)?;
    let mut s = Staged::default();
    s.add("echo.csv", echo_table(&curve).into_bytes());
    s.summary = json!({ "n_configs": params.n_configs, "r_max_nm": params.r_max });
    if cfg.cce.fit {
        let fit = fit_echo_decay(&curve, &EchoFitOptions { free_amplitude: cfg.cce.free_amplitude })?;
        if !fit.converged {
            s.failure = Some("echo fit did not converge".into());
        }
        s.add("echo_fit.json", json(&fit));
        s.summary["fit"] = serde_json::to_value(&fit).expect("fit result serializes");
    }
    Ok(s)
}

pub fn cce_converge(cfg: &RunConfig) -> Result<Staged, CliError> {
    let sys = cfg.donor.system()?;
    let base = cfg.cce.params(cfg.seed)?;
    let c = &cfg.cce_converge;
    let r_max: Vec<f64> = c.pair_shells.iter().map(|s| s.radius(base.lattice.a0)).collect();
    let study = convergence_study(&sys, &base, &c.sides, &r_max)?;
    let mut t = Table::new(&["side_nm", "r_max_nm", "t_ms", "amplitude", "std_of_mean"]);
    for e in &study.entries {
        let sem = e.curve.std_of_mean.clone().unwrap_or_else(|| vec![0.0; e.curve.times.len()]);
        for ((x, y), err) in e.curve.times.iter().zip(&e.curve.amplitude).zip(&sem) {
            t.row(&[num(e.side), num(e.r_max), num(*x), num(*y), num(*err)]);
        }
    }
    let distances = json!({
        "sides_nm": c.sides,
        "pair_shells": c.pair_shells,
        "r_max_nm": r_max,
        "side_distances": study.side_distances,
        "r_max_distances": study.r_max_distances,
    });
    let mut s = Staged::default();
    s.add("convergence.csv", t.into_bytes());
    s.add("convergence.json", json(&distances));
    s.summary = distances;
    Ok(s)
}

/// Columns of a headed CSV file, by name. Fails before anything is written.
fn read_columns(path: &Path, names: &[&str], optional: &[&str]) -> Result<Vec<Option<Vec<f64>>>, CliError> {
    let usage = |m: String| CliError::Usage(m);
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| usage(format!("{}: {e}", path.display())))?.clone();
    let mut idx = Vec::new();
    for n in names {
        match header.iter().position(|h| h == *n) {
            Some(i) => idx.push(Some(i)),
            None => return Err(usage(format!("{}: missing column `{n}` (have: {})", path.display(), header.iter().collect::<Vec<_>>().join(", ")))),
        }
    }
    for n in optional {
        idx.push(header.iter().position(|h| h == *n));
    }
    let mut cols: Vec<Option<Vec<f64>>> = idx.iter().map(|i| i.map(|_| Vec::new())).collect();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        for (c, i) in cols.iter_mut().zip(&idx) {
            if let (Some(col), Some(i)) = (c.as_mut(), i) {
                let field = rec.get(*i).unwrap_or("");
                let v = field
                    .parse::<f64>()
                    .map_err(|_| usage(format!("{}: row {}: `{field}` is not a number", path.display(), line + 1)))?;
                col.push(v);
            }
        }
    }
    Ok(cols)
}

/// Model value at `x` from a fit result's parameter list.
fn fitted(model: FitModel, cfg: &RunConfig, res: &FitResult, x: f64) -> f64 {
    let p: Vec<f64> = res.params.iter().map(|p| p.value).collect();
    match model {
        FitModel::EchoDecay => {
            let k2 = if p[1].is_finite() { 1.0 / p[1] } else { 0.0 };
            EchoDecay.value(x, &[p[0], k2, p[2], p[3]])
        }
        FitModel::T1RamanOrbach => RamanOrbach::default().value(x, &p),
        FitModel::ExpRecovery => ExpRecovery.value(x, &p),
        FitModel::GaussianLines => GaussianLines { n_lines: cfg.fit.n_lines, shape: cfg.fit.shape }.value(x, &p),
        FitModel::LinearBaseline => Line.value(x, &p),
        FitModel::RabiFft => f64::NAN,
    }
}

pub fn fit(cfg: &RunConfig) -> Result<Staged, CliError> {
    let f = &cfg.fit;
    let model = f.model.ok_or_else(|| CliError::Usage("fit needs a model (--model or fit.model)".into()))?;
    let input = f.input.as_deref().ok_or_else(|| CliError::Usage("fit needs an input CSV (--input or fit.input)".into()))?;
    if f.fix_delta.is_some() && model != FitModel::T1RamanOrbach {
        return Err(CliError::Usage("fix_delta only applies to t1_raman_orbach".into()));
    }
    let optional: &[&str] = if model == FitModel::EchoDecay { &["sigma"] } else { &[] };
    let mut cols = read_columns(Path::new(input), &model.columns(), optional)?.into_iter();
    let x = cols.next().flatten().expect("required column");
    let y = cols.next().flatten().expect("required column");
    let sigma = cols.next().flatten();

    let mut s = Staged::default();
    if model == FitModel::RabiFft {
        let freq = rabi_peak(&x, &y)?;
        let out = json!({ "model": "rabi_fft", "frequency_mhz": freq });
        s.add("fit.json", json(&out));
        s.summary = out;
        return Ok(s);
    }
    let res = match model {
        FitModel::EchoDecay => {
            fit_echo_decay_data(&x, &y, sigma.as_deref(), &EchoFitOptions { free_amplitude: f.free_amplitude })?
        }
        FitModel::T1RamanOrbach => fit_t1_temperature(&x, &y, f.fix_delta)?,
        FitModel::ExpRecovery => fit_exp_recovery(&x, &y)?,
        FitModel::GaussianLines => fit_gaussian_lines(&x, &y, f.n_lines, f.shape)?,
        FitModel::LinearBaseline => {
            if f.windows.is_empty() {
                return Err(CliError::Usage("linear_baseline needs fit.windows".into()));
            }
            let w: Vec<(f64, f64)> = f.windows.iter().map(|w| (w[0], w[1])).collect();
            fit_linear_baseline(&x, &y, &w)?
        }
        FitModel::RabiFft => unreachable!(),
    };
    let mut t = Table::new(&[model.columns()[0], model.columns()[1], "fitted", "residual"]);
    for (xi, yi) in x.iter().zip(&y) {
        let m = fitted(model, cfg, &res, *xi);
        t.row(&[num(*xi), num(*yi), num(m), num(yi - m)]);
    }
    if !res.converged {
        s.failure = Some(format!("{} fit did not converge", res.model));
    }
    s.add("fit.json", json(&res));
    s.add("residuals.csv", t.into_bytes());
    s.summary = serde_json::to_value(&res).expect("fit result serializes");
    Ok(s)
}
