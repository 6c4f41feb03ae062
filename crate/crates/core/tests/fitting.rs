use hybridspin::bath::EchoCurve;
use hybridspin::fitting::*;
use hybridspin::spectroscopy::{find_all_resonances, synthesize_spectrum, SpectrumMode, DEFAULT_INTENSITY_FLOOR};
use hybridspin::SpinSystem;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn echo_data(t2: f64, ts: f64, n: f64) -> EchoCurve {
    let times: Vec<f64> = (0..=60).map(|k| k as f64 * 0.01).collect();
    let amplitude = times.iter().map(|&t| EchoDecay.value(t, &[1.0, 1.0 / t2, ts, n])).collect();
    EchoCurve { times, amplitude, std_of_mean: None }
}

#[test]
fn echo_round_trip() {
    let fit = fit_echo_decay(&echo_data(5.0, 0.3, 2.3), &EchoFitOptions::default()).unwrap();
    assert!(fit.converged);
    assert!(rel(fit.value("T2").unwrap(), 5.0) < 0.01);
    assert!(rel(fit.value("TS").unwrap(), 0.3) < 0.01);
    assert!(rel(fit.value("n").unwrap(), 2.3) < 0.01);
    assert!(rel(fit.value("amplitude").unwrap(), 1.0) < 0.01);
}

#[test]
fn echo_without_stretched_term() {
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
    let amplitude: Vec<f64> = times.iter().map(|t| (-t / 0.8).exp()).collect();
    let fit = fit_echo_decay_data(&times, &amplitude, None, &EchoFitOptions::default()).unwrap();
    assert!(rel(fit.value("T2").unwrap(), 0.8) < 0.01);
    let tmax = 2.0;
    let ts = fit.value("TS").unwrap();
    let n = fit.value("n").unwrap();
    // Either the decay time sits at its upper bound or the term is tiny.
    assert!(ts >= 1e4 * tmax * 0.999 || (tmax / ts).powf(n) < 1e-3, "TS {ts} n {n}");
}

#[test]
fn echo_with_infinite_t2() {
    let times: Vec<f64> = (0..=60).map(|k| k as f64 * 0.01).collect();
    let amplitude: Vec<f64> = times.iter().map(|t| (-(t / 0.315f64).powf(2.27)).exp()).collect();
    let fit = fit_echo_decay_data(&times, &amplitude, None, &EchoFitOptions::default()).unwrap();
    assert!(fit.value("T2").unwrap().is_infinite());
    assert!(fit.notes.iter().any(|n| n.contains("infinite")));
    assert!(rel(fit.value("TS").unwrap(), 0.315) < 1e-6);
    let json = serde_json::to_string(&fit).unwrap();
    assert!(json.contains("\"T2\",\"value\":null"));
}

#[test]
fn echo_rejects_bad_input() {
    let o = EchoFitOptions::default();
    assert!(fit_echo_decay_data(&[0.0, 0.1, 0.2], &[1.0, 0.5, 0.2], None, &o).is_err());
    assert!(fit_echo_decay_data(&[0.0; 6], &[1.0; 6], None, &o).is_err());
    assert!(fit_echo_decay_data(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 6], None, &o).is_err());
}

#[test]
fn t1_rate_at_42k_matches_hand_value() {
    // 2.7e-6·42⁷ + 4e6·exp(−113/42), evaluated at 30 digits.
    let hand = 893_850.691_009_391_5;
    let got = RamanOrbach::default().value(42.0, &[2.7e-6, 4e6, 113.0]);
    assert!(rel(got, hand) < 1e-3);
    assert!(rel(got, hand) < 1e-12);
}

#[test]
fn t1_round_trip_with_fixed_delta() {
    let truth = [1.26e-5, 3e12, 500.0];
    let temps: Vec<f64> = (0..12).map(|k| 10.0 + 4.0 * k as f64).collect();
    let rates: Vec<f64> = temps.iter().map(|&t| RamanOrbach::default().value(t, &truth)).collect();
    let fit = fit_t1_temperature(&temps, &rates, Some(500.0)).unwrap();
    assert!(fit.converged);
    assert!(rel(fit.value("P").unwrap(), truth[0]) < 0.01);
    assert!(rel(fit.value("E").unwrap(), truth[1]) < 0.01);
    let d = fit.param("Delta_over_kB").unwrap();
    assert!(d.fixed && d.value == 500.0 && d.std_error.is_none());
}

#[test]
fn t1_round_trip_free_delta() {
    let truth = [2.7e-6, 4e6, 113.0];
    let temps: Vec<f64> = (0..10).map(|k| 8.0 + 5.0 * k as f64).collect();
    let rates: Vec<f64> = temps.iter().map(|&t| RamanOrbach::default().value(t, &truth)).collect();
    let fit = fit_t1_temperature(&temps, &rates, None).unwrap();
    assert!(fit.converged);
    for (name, v) in ["P", "E", "Delta_over_kB"].iter().zip(truth) {
        assert!(rel(fit.value(name).unwrap(), v) < 0.01, "{name}");
    }
}

#[test]
fn t1_pure_power_law() {
    let temps: Vec<f64> = (0..8).map(|k| 5.0 + 5.0 * k as f64).collect();
    let rates: Vec<f64> = temps.iter().map(|t| 2e-6 * t.powi(7)).collect();
    let fit = fit_t1_temperature(&temps, &rates, None).unwrap();
    assert!(rel(fit.value("P").unwrap(), 2e-6) < 1e-6);
    assert!(fit.value("E").unwrap() < 1e-6 * rates[0]);
    assert!(fit.std_error("Delta_over_kB").is_none());
    assert!(fit.std_error("P").is_some() || !fit.converged);
}

#[test]
fn t1_rejects_bad_input() {
    assert!(fit_t1_temperature(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], None).is_err());
    assert!(fit_t1_temperature(&[-1.0, 2.0, 3.0, 4.0], &[1.0; 4], None).is_err());
    assert!(fit_t1_temperature(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4], Some(-5.0)).is_err());
}

#[test]
fn exp_recovery_round_trip() {
    let t: Vec<f64> = (0..30).map(|k| k as f64 * 0.2).collect();
    let m: Vec<f64> = t.iter().map(|&x| ExpRecovery.value(x, &[1.0, 2.5, 0.3])).collect();
    assert!((m[0] - (-2.5 + 0.3)).abs() < 1e-15);
    let fit = fit_exp_recovery(&t, &m).unwrap();
    assert!(fit.converged);
    assert!(rel(fit.value("T1").unwrap(), 1.0) < 0.01);
    assert!(rel(fit.value("M0").unwrap(), 2.5) < 0.01);
    assert!(rel(fit.value("offset").unwrap(), 0.3) < 0.01);
}

#[test]
fn exp_recovery_saturated_data() {
    let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
    let fit = fit_exp_recovery(&t, &[0.7; 10]).unwrap();
    assert!(!fit.converged);
    assert!(fit.params.iter().all(|p| p.std_error.is_none()));
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn single_gaussian_exact() {
    let x = grid(-5.0, 5.0, 401);
    for shape in [LineShape::Absorption, LineShape::Derivative] {
        let m = GaussianLines { n_lines: 1, shape };
        let truth = [0.37, 0.7, 2.0];
        let y: Vec<f64> = x.iter().map(|&v| m.value(v, &truth)).collect();
        let fit = fit_gaussian_lines(&x, &y, 1, shape).unwrap();
        assert!(fit.converged);
        for (p, t) in fit.params.iter().zip(truth) {
            assert!((p.value - t).abs() < 1e-6, "{shape:?} {} {}", p.name, p.value);
        }
    }
}

#[test]
fn far_lines_are_independent() {
    let x = grid(0.0, 100.0, 2001);
    let m2 = GaussianLines { n_lines: 2, shape: LineShape::Absorption };
    let truth = [20.0, 1.0, 3.0, 80.0, 2.0, 1.0];
    let y: Vec<f64> = x.iter().map(|&v| m2.value(v, &truth)).collect();
    let both = fit_gaussian_lines(&x, &y, 2, LineShape::Absorption).unwrap();
    let m1 = GaussianLines { n_lines: 1, shape: LineShape::Absorption };
    let y1: Vec<f64> = x.iter().map(|&v| m1.value(v, &truth[..3])).collect();
    let one = fit_gaussian_lines(&x, &y1, 1, LineShape::Absorption).unwrap();
    for k in 0..3 {
        assert!((both.params[k].value - one.params[k].value).abs() < 1e-6);
    }
}

#[test]
fn coincident_lines_are_not_identifiable() {
    let x = grid(-5.0, 5.0, 201);
    let m = GaussianLines { n_lines: 1, shape: LineShape::Absorption };
    let y: Vec<f64> = x.iter().map(|&v| m.value(v, &[0.0, 1.0, 1.0])).collect();
    let fit = fit_gaussian_lines(&x, &y, 2, LineShape::Absorption).unwrap();
    assert!(!fit.converged);
}

#[test]
fn sibi_spectrum_areas_and_width() {
    let s = SpinSystem::si_bi();
    let lines = find_all_resonances(&s, 4044.0, (0.0, 0.6), DEFAULT_INTENSITY_FLOOR).unwrap();
    let field = grid(0.13, 0.36, 4601);
    let curve = synthesize_spectrum(&lines, 0.7, SpectrumMode::Derivative, &field).unwrap();
    let mt: Vec<f64> = field.iter().map(|b| b * 1e3).collect();
    let fit = fit_gaussian_lines(&mt, &curve.signal, 2, LineShape::Derivative).unwrap();
    assert!(fit.converged);
    let ratio = fit.value("area_2").unwrap() / fit.value("area_1").unwrap();
    assert!((ratio - 1.2).abs() < 0.05, "{ratio}");
    for k in ["fwhm_1", "fwhm_2"] {
        assert!((fit.value(k).unwrap() - 0.7).abs() < 0.01);
    }
}

#[test]
fn baseline_removal() {
    let x = grid(-50.0, 50.0, 501);
    let line: Vec<f64> = x.iter().map(|v| 0.03 * v - 2.0).collect();
    let w = [(-50.0, -20.0), (20.0, 50.0)];
    assert!(subtract_linear_baseline(&x, &line, &w).unwrap().iter().all(|v| v.abs() < 1e-12));
    let flat = vec![4.2; x.len()];
    assert!(subtract_linear_baseline(&x, &flat, &w).unwrap().iter().all(|v| v.abs() < 1e-12));
    let g = GaussianLines { n_lines: 1, shape: LineShape::Absorption };
    let peak: Vec<f64> = x.iter().map(|&v| g.value(v, &[0.0, 1.0, 5.0])).collect();
    let both: Vec<f64> = line.iter().zip(&peak).map(|(a, b)| a + b).collect();
    let out = subtract_linear_baseline(&x, &both, &w).unwrap();
    assert!(out.iter().zip(&peak).all(|(a, b)| (a - b).abs() < 1e-6));
    let fit = fit_linear_baseline(&x, &line, &w).unwrap();
    assert!(rel(fit.value("slope").unwrap(), 0.03) < 0.01 && rel(fit.value("intercept").unwrap(), -2.0) < 0.01);
    assert!(subtract_linear_baseline(&x, &line, &[]).is_err());
    assert!(subtract_linear_baseline(&x, &line, &[(100.0, 200.0)]).is_err());
}

#[test]
fn scale_equivariance_with_free_amplitude() {
    let mut rng = StdRng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.005).unwrap();
    let mut curve = echo_data(2.0, 0.3, 2.3);
    for a in curve.amplitude.iter_mut() {
        *a += noise.sample(&mut rng);
    }
    let base = fit_echo_decay(&curve, &EchoFitOptions::default()).unwrap();
    let mut scaled = curve.clone();
    scaled.amplitude.iter_mut().for_each(|a| *a *= 3.7);
    let other = fit_echo_decay(&scaled, &EchoFitOptions::default()).unwrap();
    for k in ["T2", "TS", "n"] {
        assert!(rel(other.value(k).unwrap(), base.value(k).unwrap()) < 1e-6, "{k}");
    }
    assert!(rel(other.value("amplitude").unwrap(), 3.7 * base.value("amplitude").unwrap()) < 1e-6);
}

#[test]
fn accepted_steps_never_raise_the_residual() {
    let curve = echo_data(5.0, 0.3, 2.3);
    let f = |p: &[f64], r: &mut [f64]| {
        for (i, (&t, &y)) in curve.times.iter().zip(&curve.amplitude).enumerate() {
            r[i] = EchoDecay.value(t, p) - y;
        }
    };
    let prob = Problem {
        residuals: &f,
        n_residuals: curve.times.len(),
        lower: vec![0.0, 0.0, 1e-4, 1.1],
        upper: vec![10.0, 100.0, 100.0, 6.0],
        scale: vec![1.0, 1.0, 0.3, 1.0],
    };
    let rep = levenberg_marquardt(&prob, &[0.5, 3.0, 2.0, 4.0], &LmConfig::default()).unwrap();
    assert!(rep.norm_history.len() > 3);
    assert!(rep.norm_history.windows(2).all(|w| w[1] < w[0]));
}

/// Fraction of (trial, parameter) deviations inside 3 reported errors.
fn coverage(trials: usize, mut one: impl FnMut(&mut StdRng) -> Vec<(f64, f64, Option<f64>)>) -> f64 {
    let mut rng = StdRng::seed_from_u64(2024);
    let (mut hit, mut total) = (0, 0);
    for _ in 0..trials {
        for (est, truth, se) in one(&mut rng) {
            total += 1;
            if let Some(se) = se {
                if (est - truth).abs() <= 3.0 * se {
                    hit += 1;
                }
            }
        }
    }
    hit as f64 / total as f64
}

#[test]
fn standard_errors_cover_the_truth() {
    let noise = Normal::new(0.0, 0.02).unwrap();
    let t: Vec<f64> = (0..40).map(|k| k as f64 * 0.15).collect();
    let truth = [1.0, 2.5, 0.3];
    let frac = coverage(200, |rng| {
        let m: Vec<f64> = t.iter().map(|&x| ExpRecovery.value(x, &truth) + noise.sample(rng)).collect();
        let fit = fit_exp_recovery(&t, &m).unwrap();
        fit.params.iter().zip(truth).map(|(p, v)| (p.value, v, p.std_error)).collect()
    });
    assert!(frac >= 0.95, "{frac}");

    let truth = [1.0, 0.5, 0.3, 2.3];
    let times: Vec<f64> = (0..=60).map(|k| k as f64 * 0.01).collect();
    let frac = coverage(200, |rng| {
        let y: Vec<f64> = times.iter().map(|&x| EchoDecay.value(x, &truth) + 0.01 * noise.sample(rng)).collect();
        let fit = fit_echo_decay_data(&times, &y, None, &EchoFitOptions::default()).unwrap();
        vec![
            (fit.value("amplitude").unwrap(), truth[0], fit.std_error("amplitude")),
            (fit.value("TS").unwrap(), truth[2], fit.std_error("TS")),
            (fit.value("n").unwrap(), truth[3], fit.std_error("n")),
        ]
    });
    assert!(frac >= 0.95, "{frac}");
}

fn jacobian_agrees(model: &dyn Model, xs: &[f64], p: &[f64]) -> bool {
    let f = |q: &[f64], r: &mut [f64]| {
        for (i, &x) in xs.iter().enumerate() {
            r[i] = model.value(x, q);
        }
    };
    let prob = Problem {
        residuals: &f,
        n_residuals: xs.len(),
        lower: vec![f64::NEG_INFINITY; p.len()],
        upper: vec![f64::INFINITY; p.len()],
        scale: p.iter().map(|v| if *v == 0.0 { 1.0 } else { v.abs() }).collect(),
    };
    let num = numeric_jacobian(&prob, p, 1e-5);
    xs.iter().enumerate().all(|(i, &x)| {
        let g = model.gradient(x, p);
        let row_scale = g.iter().chain(num.row(i).iter()).map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        g.iter().enumerate().all(|(j, gj)| (gj - num[(i, j)]).abs() <= 1e-6 * row_scale)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_gradients_match_differences(
        a in 0.5f64..2.0, k2 in 0.01f64..2.0, ts in 0.1f64..1.0, n in 1.2f64..4.0,
        c in -2.0f64..2.0, w in 0.3f64..2.0, delta in 20.0f64..400.0,
    ) {
        // Sample the decay where it is still resolvable, t ≤ 2·T_S.
        let t: Vec<f64> = (1..20).map(|k| k as f64 * 0.1 * ts).collect();
        prop_assert!(jacobian_agrees(&EchoDecay, &t, &[a, k2, ts, n]));
        // Below ~15 K the Orbach term exceeds the Raman one by more than the
        // difference quotient in P can resolve.
        let temps: Vec<f64> = (0..12).map(|k| 15.0 + 4.0 * k as f64).collect();
        prop_assert!(jacobian_agrees(&RamanOrbach::default(), &temps, &[a * 1e-6, k2 * 1e7, delta]));
        prop_assert!(jacobian_agrees(&ExpRecovery, &t, &[ts, a, c]));
        // Within three widths of either line.
        let x: Vec<f64> = (0..40).map(|k| c - 3.0 * w + k as f64 * (1.0 + 7.0 * w) / 39.0).collect();
        for shape in [LineShape::Absorption, LineShape::Derivative] {
            let m = GaussianLines { n_lines: 2, shape };
            prop_assert!(jacobian_agrees(&m, &x, &[c, w, a, c + 1.0, w * 1.3, -a]));
        }
        prop_assert!(jacobian_agrees(&Line, &x, &[a, c]));
    }
}
