use hybridspin::spectroscopy::{
    df_db, find_all_resonances, frequency_field_map, synthesize_spectrum, transition_frequency, SpectrumMode,
    DEFAULT_INTENSITY_FLOOR,
};
use hybridspin::SpinSystem;

const RANGE: (f64, f64) = (0.0, 0.6);

fn sibi() -> SpinSystem {
    SpinSystem::si_bi()
}

#[test]
fn two_lines_at_4044() {
    let lines = find_all_resonances(&sibi(), 4044.0, RANGE, DEFAULT_INTENSITY_FLOOR).unwrap();
    assert_eq!(lines.len(), 2);
    assert_eq!((lines[0].label_upper, lines[0].label_lower), (10, 9));
    assert_eq!((lines[1].label_upper, lines[1].label_lower), (11, 10));
    assert!((lines[0].field_b - 0.1456).abs() < 5e-4);
    assert!((lines[1].field_b - 0.3450).abs() < 5e-4);
    for t in &lines {
        assert!(t.intensity > 0.0 && t.intensity <= 0.25);
        assert!((t.intensity - t.sx_element * t.sx_element).abs() < 1e-15);
        assert!(t.frequency > 0.0);
    }
}

#[test]
fn ten_lines_at_9700() {
    let s = sibi();
    let lines = find_all_resonances(&s, 9700.0, RANGE, DEFAULT_INTENSITY_FLOOR).unwrap();
    assert_eq!(lines.len(), 10);
    assert!(lines.windows(2).all(|w| w[0].field_b <= w[1].field_b));
    // The weak partner lines survive a 1e-4 cut.
    let all = find_all_resonances(&s, 9700.0, RANGE, 1e-4).unwrap();
    assert_eq!(all.len(), 18);
    assert!(all.iter().filter(|t| t.intensity < 0.01).count() == 8);
}

#[test]
fn floor_above_max_intensity_leaves_nothing() {
    assert!(find_all_resonances(&sibi(), 4044.0, RANGE, 0.5).unwrap().is_empty());
    assert!(find_all_resonances(&sibi(), 4044.0, RANGE, -1.0).is_err());
}

#[test]
fn area_ratio_at_4044() {
    let lines = find_all_resonances(&sibi(), 4044.0, RANGE, DEFAULT_INTENSITY_FLOOR).unwrap();
    let grid: Vec<f64> = (0..=4000).map(|k| 0.1 + k as f64 * 1e-4).collect();
    let curve = synthesize_spectrum(&lines, 0.7, SpectrumMode::Absorption, &grid).unwrap();
    // Integrate each line over a ±5 mT window.
    let area = |center: f64| -> f64 {
        let mut sum = 0.0;
        for k in 1..grid.len() {
            let (b0, b1) = (grid[k - 1], grid[k]);
            if (b0 - center).abs() < 5e-3 && (b1 - center).abs() < 5e-3 {
                sum += 0.5 * (curve.signal[k - 1] + curve.signal[k]) * (b1 - b0) * 1e3;
            }
        }
        sum
    };
    let ratio = area(lines[1].field_b) / area(lines[0].field_b);
    assert!((ratio - 1.2).abs() < 0.05, "{ratio}");
}

#[test]
fn map_counts() {
    let s = sibi();
    let grid: Vec<f64> = (0..=300).map(|k| k as f64 * 2e-3).collect();
    let map = frequency_field_map(&s, &grid, 1e-4).unwrap();
    let two_i = 9;
    for &b in &grid {
        let n = map.iter().filter(|p| p.field_b == b).count();
        assert!(n >= 1 && n <= 4 * two_i, "{n} at {b}");
        if b == 0.0 {
            assert_eq!(n, 2 * two_i);
        }
    }
    for p in map.iter().filter(|p| p.field_b == 0.0) {
        assert!((p.frequency - 5.0 * s.hyperfine_a).abs() < 1e-6);
    }
}

#[test]
fn ten_branches_above_7400() {
    let grid: Vec<f64> = (0..=1200).map(|k| k as f64 * 5e-4).collect();
    let map = frequency_field_map(&sibi(), &grid, DEFAULT_INTENSITY_FLOOR).unwrap();
    let mut branches: Vec<(usize, usize)> =
        map.iter().filter(|p| p.frequency > 7400.0).map(|p| (p.label_upper, p.label_lower)).collect();
    branches.sort_unstable();
    branches.dedup();
    assert_eq!(branches.len(), 10, "{branches:?}");
}

#[test]
fn gradient_vanishes_at_turning_point() {
    let s = sibi();
    let (i, j, start) = find_turning_pair(&s);
    let (mut lo, mut hi) = (start, start + 2e-3);
    let g = |b: f64| df_db(&s, i, j, b).unwrap();
    assert!(g(lo) * g(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!(g(0.5 * (lo + hi)).abs() < 0.01);
}

/// First adjacent pair whose gradient changes sign between 2 mT grid points.
fn find_turning_pair(s: &SpinSystem) -> (usize, usize, f64) {
    let eig = hybridspin::spin::diagonalize(s, 0.01).unwrap();
    for (i, j) in hybridspin::spectroscopy::adjacent_pairs(&eig) {
        let mut prev = df_db(s, i, j, 0.002).unwrap();
        for k in 2..300 {
            let b = k as f64 * 2e-3;
            let g = df_db(s, i, j, b).unwrap();
            if prev * g < 0.0 && transition_frequency(s, i, j, b).unwrap() > 1.0 {
                return (i, j, b - 2e-3);
            }
            prev = g;
        }
    }
    panic!("no turning point in range");
}
