use super::*;
use crate::operator::{CMat, Projector};

fn diag_state(p: &[f64]) -> DensityMatrix {
    let d: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
    DensityMatrix::new(CMat::from_diagonal(&nalgebra::DVector::from_vec(d))).unwrap()
}

fn first_basis_projector(dim: usize) -> Projector {
    let mut m = CMat::zeros(dim, dim);
    m[(0, 0)] = C64::new(1.0, 0.0);
    Projector::new(m).unwrap()
}

#[test]
fn size_formula_boundary_gives_one() {
    let delta: f64 = 0.4;
    let eps = delta.cos().powi(2);
    let s = window_size(delta, eps).unwrap();
    assert_eq!(s.n, 1);
    assert!((s.exact - 1.0).abs() < 1e-12);
}

#[test]
fn size_formula_reference_point() {
    let s = window_size(0.1, 1e-8).unwrap();
    assert_eq!(s.n, 99);
    assert!((s.exact - 98.869_679_543_700_58).abs() < 1e-10, "{}", s.exact);
    assert!((s.bound - 99.034_875_525_361_28).abs() < 1e-9, "{}", s.bound);
    assert!(s.exact <= s.bound && (s.n as f64) <= s.bound);
}

#[test]
fn size_formula_is_monotone_and_guarded() {
    let mut last = usize::MAX;
    for i in 1..60 {
        let n = window_size(0.025 * i as f64, 1e-6).unwrap().n;
        assert!(n <= last);
        last = n;
    }
    assert!(window_size(PI / 2.0, 0.1).is_err());
    assert!(window_size(0.1, 1.0).is_err());
    assert!(chebyshev_window(0, 0.1).is_err());
}

#[test]
fn smallest_window_has_three_taps() {
    let w = chebyshev_window(1, 0.5).unwrap();
    assert_eq!(w.coefficients.len(), 3);
    assert!((w.response(0.0) - 1.0).abs() < 1e-14);
    assert!((w.coefficient(-1) - w.coefficient(1)).abs() < 1e-15);
    assert!(w.coefficients.iter().all(|&c| c > 0.0));
}

#[test]
fn reference_window_meets_ripple_on_dense_sweep() {
    let w = chebyshev_window(99, 0.1).unwrap();
    assert!((w.sum() - 1.0).abs() < 1e-10);
    let mut worst: f64 = 0.0;
    let m = 100_000;
    for i in 0..=m {
        let om = 0.1 + (PI - 0.1) * i as f64 / m as f64;
        worst = worst.max(w.response(om).abs());
    }
    assert!(worst <= 1e-4, "{worst}");
    assert!((worst - w.realised_ripple).abs() < 1e-9 * worst.max(1e-12) + 1e-15);
    assert!((w.realised_ripple - chebyshev_ripple(99, 0.1)).abs() < 1e-10);
    let direct: f64 = (-99..=99).map(|k| w.coefficient(k) * (0.37 * k as f64).cos()).sum();
    assert!((direct - w.response(0.37)).abs() < 1e-13);
}

#[test]
fn doubling_width_squares_the_ripple() {
    for &(n, delta) in &[(10, 0.2), (25, 0.1), (40, 0.05)] {
        let a = chebyshev_window(n, delta).unwrap().realised_ripple;
        let b = chebyshev_window(2 * n, delta).unwrap().realised_ripple;
        assert!(b <= a * a * (1.0 + 1e-6), "n={n}: {b} vs {}", a * a);
    }
}

#[test]
fn chebyshev_beats_boxcar() {
    for n in 4..20 {
        let delta = 0.3;
        let cheb = chebyshev_window(n, delta).unwrap();
        let boxcar = FilterWindow {
            n,
            coefficients: vec![1.0 / (2 * n + 1) as f64; 2 * n + 1],
            delta_band: delta,
            epsilon_target: 0.0,
            realised_ripple: 0.0,
            clamped: 0,
        };
        let grid = 20_000;
        let b = (0..=grid)
            .map(|i| boxcar.response(delta + (PI - delta) * i as f64 / grid as f64).abs())
            .fold(0.0, f64::max);
        assert!(b > cheb.realised_ripple);
    }
}

#[test]
fn designed_windows_meet_target() {
    for &(delta, eps) in &[(0.05, 1e-6), (0.1, 1e-8), (0.3, 1e-2), (0.05, 1e-4)] {
        let w = design_window(delta, eps).unwrap();
        assert!(w.realised_ripple <= eps.sqrt() * (1.0 + 1e-6));
        assert!(w.n >= window_size(delta, eps).unwrap().n);
        assert!(w.coefficients.iter().all(|&c| c >= -1e-12));
    }
    // The size formula alone is one short here.
    let w = design_window(0.05, 1e-6).unwrap();
    assert_eq!(w.n, window_size(0.05, 1e-6).unwrap().n + 1);
}

#[test]
fn target_state_passes_untouched() {
    let h = HermitianOperator::from_real_diagonal(&[0.0, 0.5, -0.8]);
    let rho = diag_state(&[1.0, 0.0, 0.0]);
    let w = design_window(0.1, 1e-6).unwrap();
    let out = apply_filter(&h, &rho, &w, 0.0).unwrap();
    assert!((out.success_prob - 1.0).abs() < 1e-12);
    assert!((out.state.matrix() - rho.matrix()).iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn mixture_is_purified() {
    let h = HermitianOperator::from_real_diagonal(&[0.0, 0.3]);
    let rho = diag_state(&[0.6, 0.4]);
    let w = design_window(0.1, 1e-6).unwrap();
    let out = apply_filter(&h, &rho, &w, 0.0).unwrap();
    let p = first_basis_projector(2);
    assert!(out.state.fidelity(&p) >= 1.0 - 1e-6);
    assert!(out.success_prob >= 0.6 && out.success_prob <= 0.6 + 4e-7);
    assert!(out.state.min_eigenvalue() >= -1e-10);
}

#[test]
fn filter_channel_is_trace_nonincreasing() {
    let h = HermitianOperator::from_real_diagonal(&[0.0, 0.05, 0.2, -0.6, 0.9]);
    let rho = diag_state(&[0.3, 0.2, 0.2, 0.2, 0.1]);
    let w = design_window(0.1, 1e-4).unwrap();
    let out = apply_filter(&h, &rho, &w, 0.0).unwrap();
    assert!(out.success_prob <= 1.0 + 1e-10);
    assert!(out.state.min_eigenvalue() >= -1e-10);
}

#[test]
fn annihilated_state_is_an_error() {
    let h = HermitianOperator::from_real_diagonal(&[0.0, 1.2]);
    let rho = diag_state(&[0.0, 1.0]);
    let w = design_window(1.0, 1e-14).unwrap();
    assert!(matches!(apply_filter(&h, &rho, &w, 0.0), Err(ZenoError::FilterAnnihilated { .. })));
    let far = HermitianOperator::from_real_diagonal(&[0.0, 4.0]);
    assert!(apply_filter(&far, &diag_state(&[1.0, 0.0]), &w, 0.0).is_err());
}

#[test]
fn certain_success_needs_one_attempt() {
    let h = HermitianOperator::from_real_diagonal(&[0.0, 0.5]);
    let rho = diag_state(&[1.0, 0.0]);
    let w = design_window(0.1, 1e-6).unwrap();
    let run = filter_until_success(&h, &rho, &w, 0.0, 11, 2.0).unwrap();
    assert_eq!(run.repeats, 1);
    assert!((run.total_cost - (lcu_cost(w.n, 1.0) + 2.0)).abs() < 1e-12);
}

#[test]
fn retry_count_is_geometric() {
    let p = 0.6;
    let trials = 10_000;
    let total: usize = (0..trials)
        .map(|i| geometric_attempts(p, &mut substream(77, i as u64)).unwrap())
        .sum();
    let mean = total as f64 / trials as f64;
    let sigma = ((1.0 - p) / (p * p) / trials as f64).sqrt();
    assert!((mean - 1.0 / p).abs() <= 3.0 * sigma, "{mean}");
    assert!(matches!(geometric_attempts(0.0, &mut substream(1, 0)), Err(ZenoError::RetryCap { cap: 1000 })));
}

#[test]
fn success_rate_is_binomial() {
    let rate = sample_success_rate(0.3, 5000, 9);
    assert!((rate - 0.3).abs() <= 3.0 * (0.3f64 * 0.7 / 5000.0).sqrt());
    assert_eq!(sample_success_rate(1.0, 10, 0), 1.0);
}

#[test]
fn lcu_cost_formula() {
    assert_eq!(lcu_cost(1, 1.0), 3.0);
    assert!((lcu_cost(200, 1.0) / lcu_cost(100, 1.0) - 2.0).abs() < 1e-12);
}

#[test]
fn window_csv_lists_every_tap() {
    let w = chebyshev_window(3, 0.4).unwrap();
    let csv = w.to_csv();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("k,w\n-3,"));
}
