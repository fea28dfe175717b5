use zeno_core::engine::{run_ensemble, run_marginal_ode, Simulation, TauSampler, DEFAULT_STEP_TOL};
use zeno_core::filter::{apply_filter, design_window};
use zeno_core::mmio::{read_matrix_market, write_matrix_market};
use zeno_core::operator::{CMat, HermitianOperator, C64};
use zeno_core::paths::{
    grover_path, linear_path, numeric_gap_model, qlsp_path, tracked_projector, GroverProblem, HamiltonianPath,
    QlspProblem,
};
use zeno_core::schedule::{adaptive_rate, constant_rate, error_bound, expected_cost, DerivativeSource};

#[test]
fn search_reaches_marked_state_within_bound() {
    let prob = GroverProblem::new(32, 1).unwrap();
    let (path, gap) = grover_path(&prob).unwrap();
    let eps = 0.05;
    let sched = adaptive_rate(&path, &gap, eps, 0.5).unwrap();
    let ode = run_marginal_ode(&path, &gap, &sched, &prob.initial_state(), DEFAULT_STEP_TOL).unwrap();
    let bound = error_bound(&path, &sched, &gap, DerivativeSource::AnalyticBound).unwrap();
    let infidelity = 1.0 - ode.final_fidelity;
    assert!(infidelity <= eps, "{infidelity}");
    assert!(infidelity <= bound, "{infidelity} > {bound}");
    let cost = expected_cost(&sched, &gap).unwrap();
    assert!(cost.t_physical > cost.t_schedule);
}

#[test]
fn filtering_sharpens_a_rough_linear_system_state() {
    let prob = QlspProblem::diagonal_test(10.0).unwrap();
    let inst = qlsp_path(&prob).unwrap();
    let sched = constant_rate(&inst.path, &inst.gap, 0.3, DerivativeSource::AnalyticBound).unwrap();
    let ode = run_marginal_ode(&inst.path, &inst.gap, &sched, &inst.initial_state, DEFAULT_STEP_TOL).unwrap();
    let rho1 = ode.rho1.expect("final state is kept");
    let before = 1.0 - rho1.fidelity(&inst.target_projector);
    assert!(before <= 0.3);

    let eps = 1e-6;
    let win = design_window(inst.gap.delta_m, eps).unwrap();
    let out = apply_filter(&inst.path.evaluate(1.0), &rho1, &win, inst.gap.omega0(1.0)).unwrap();
    let after = 1.0 - out.state.fidelity(&inst.target_projector);
    assert!(after <= eps, "{after}");
    assert!(out.success_prob >= 1.0 - before - 1e-12);
}

#[test]
fn trajectories_agree_with_marginal_equation() {
    let prob = GroverProblem::new(8, 1).unwrap();
    let (path, gap) = grover_path(&prob).unwrap();
    let rho0 = prob.initial_state();
    let sched = adaptive_rate(&path, &gap, 0.1, 0.5).unwrap();
    let sim = Simulation::new(&path, &gap, &rho0).unwrap();
    let runs = run_ensemble(&sim, &sched, &TauSampler::IdealDephase, 400, 99).unwrap();
    let mean = runs.iter().map(|r| r.final_fidelity).sum::<f64>() / runs.len() as f64;
    let var = runs.iter().map(|r| (r.final_fidelity - mean).powi(2)).sum::<f64>() / (runs.len() - 1) as f64;
    let ode = run_marginal_ode(&path, &gap, &sched, &rho0, DEFAULT_STEP_TOL).unwrap();
    let se = (var / runs.len() as f64).sqrt();
    assert!((mean - ode.final_fidelity).abs() <= 4.0 * se + 1e-9, "{mean} vs {}", ode.final_fidelity);
}

#[test]
fn hamiltonians_from_matrix_market_files() {
    let dir = tempfile::tempdir().unwrap();
    let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    // Transverse field to a diagonal problem on two qubits.
    let x = CMat::from_row_slice(2, 2, &[zero, one, one, zero]);
    let id = CMat::identity(2, 2);
    let h0 = -(x.kronecker(&id) + id.kronecker(&x));
    let h1 = CMat::from_diagonal(&nalgebra::DVector::from_vec(
        [0.0, 1.0, 1.0, 2.0].iter().map(|&v| C64::new(v, 0.0)).collect(),
    ));
    write_matrix_market(dir.path().join("h0.mtx"), &h0).unwrap();
    write_matrix_market(dir.path().join("h1.mtx"), &h1).unwrap();
    let a = HermitianOperator::new(read_matrix_market(dir.path().join("h0.mtx")).unwrap()).unwrap();
    let b = HermitianOperator::new(read_matrix_market(dir.path().join("h1.mtx")).unwrap()).unwrap();
    assert!((a.matrix() - &h0).norm() < 1e-15);

    let path = linear_path(a, b).unwrap();
    let gap = numeric_gap_model(&path, -2.0, 257).unwrap();
    assert!(gap.delta_m > 0.5 && gap.delta_m <= 1.0 + 1e-9, "{}", gap.delta_m);
    let p1 = tracked_projector(&path, &gap, 1.0).unwrap();
    assert_eq!(p1.rank(), 1);
    assert!((p1.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
}
