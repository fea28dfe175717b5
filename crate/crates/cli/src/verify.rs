//! Invariant batteries behind the `verify` command.
//!
//! Every suite returns a list of [`Check`]s; a check passes when its
//! measured value does not exceed its bound.

use anyhow::{Context, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zeno_core::engine::rng::substream;
use zeno_core::engine::{
    ensemble_statistics, random_hermitian, run_ensemble, run_marginal_ode_in, InvariantSubspace, OdeOptions,
    Simulation, TauSampler,
};
use zeno_core::filter::{apply_filter, design_window, sample_success_rate, window_size};
use zeno_core::fit::{fit_line, fit_loglog};
use zeno_core::operator::{
    fd_projector_derivatives, trace_norm_diff_of_conjugations, CMat, DensityMatrix, HermitianOperator, TrackerState,
    C64,
};
use zeno_core::paths::{gap_integral, GapModel, HamiltonianPath};
use zeno_core::quad::unit_grid;
use zeno_core::schedule::{expected_cost, query_integral, ScheduleConstants};

use std::path::Path;

use crate::manifest::{ExperimentManifest, Mode, ProblemSpec, SamplerSpec, ScheduleSpec};
use crate::output::{to_json, write_text, Table};
use crate::problem::{battery, build_problem};
use crate::run::{circuit_params, execute, ideal_schedule, instance_constants, MAX_FILTER_BAND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Marginal-equation infidelity against the computed error bound.
    #[value(name = "lemma3")]
    ErrorBound,
    /// Finite-difference projector derivatives against their gap bounds.
    #[value(name = "lemma4")]
    ProjectorDerivatives,
    /// Gap-integral scaling for search.
    #[value(name = "lemma11")]
    SearchGapIntegrals,
    /// Gap-integral scaling for linear systems.
    #[value(name = "lemma12")]
    LinearSystemGapIntegrals,
    /// Perturbed-conjugation trace-norm inequality.
    #[value(name = "lemma15")]
    PerturbedConjugation,
    /// Constant-rate schedules meet their target.
    #[value(name = "theorem5")]
    ConstantRate,
    /// Adaptive schedules meet their target.
    #[value(name = "theorem6")]
    AdaptiveRate,
    /// Eigenstate filtering.
    #[value(name = "theorem8")]
    Filtering,
    /// Circuit model with a constant rate.
    #[value(name = "theorem16")]
    CircuitConstant,
    /// Circuit model with an adaptive rate.
    #[value(name = "theorem17")]
    CircuitAdaptive,
    /// Trajectory ensembles against the marginal equation.
    #[value(name = "mc-vs-ode")]
    McVsOde,
    All,
}

impl Suite {
    pub const EACH: [Suite; 11] = [
        Suite::ErrorBound,
        Suite::ProjectorDerivatives,
        Suite::SearchGapIntegrals,
        Suite::LinearSystemGapIntegrals,
        Suite::PerturbedConjugation,
        Suite::ConstantRate,
        Suite::AdaptiveRate,
        Suite::Filtering,
        Suite::CircuitConstant,
        Suite::CircuitAdaptive,
        Suite::McVsOde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ErrorBound => "lemma3",
            Suite::ProjectorDerivatives => "lemma4",
            Suite::SearchGapIntegrals => "lemma11",
            Suite::LinearSystemGapIntegrals => "lemma12",
            Suite::PerturbedConjugation => "lemma15",
            Suite::ConstantRate => "theorem5",
            Suite::AdaptiveRate => "theorem6",
            Suite::Filtering => "theorem8",
            Suite::CircuitConstant => "theorem16",
            Suite::CircuitAdaptive => "theorem17",
            Suite::McVsOde => "mc-vs-ode",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured`; negative on failure.
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(suite: Suite, name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            suite: suite.name().to_string(),
            name: name.into(),
            measured,
            bound,
            margin: bound - measured,
            passed: measured <= bound,
        }
    }

    /// Two-sided band: `|measured - centre| <= half_width`.
    pub fn within(suite: Suite, name: impl Into<String>, measured: f64, centre: f64, half_width: f64) -> Self {
        let mut c = Self::new(suite, name, (measured - centre).abs(), half_width);
        c.measured = measured;
        c.margin = half_width - (measured - centre).abs();
        c
    }

    /// Lower bound: `measured >= floor`.
    pub fn at_least(suite: Suite, name: impl Into<String>, measured: f64, floor: f64) -> Self {
        Self {
            suite: suite.name().to_string(),
            name: name.into(),
            measured,
            bound: floor,
            margin: measured - floor,
            passed: measured >= floor,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trajectories: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 2024, trajectories: 500 }
    }
}

pub const BATTERY_EPSILONS: [f64; 3] = [0.3, 0.1, 0.03];
pub const BATTERY_QS: [f64; 3] = [0.25, 0.5, 0.75];
pub const GROVER_SWEEP_N: [usize; 5] = [1 << 6, 1 << 8, 1 << 10, 1 << 12, 1 << 14];
pub const QLSP_SWEEP_KAPPA: [f64; 5] = [8.0, 16.0, 32.0, 64.0, 128.0];
/// Allowed deviation of fitted power-law slopes.
pub const SLOPE_TOL: f64 = 0.1;
pub const CIRCUIT_SLOPE_TOL: f64 = 0.15;
/// Relative slack when a closed form is compared with the quadrature of the
/// same integral.
pub const QUADRATURE_SLACK: f64 = 1e-8;
const FD_STEP: f64 = 1e-4;
const FD_GRID: usize = 65;

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Check>> {
    match suite {
        Suite::ErrorBound => error_bound_suite(),
        Suite::ProjectorDerivatives => derivative_suite(),
        Suite::SearchGapIntegrals => search_integral_suite(),
        Suite::LinearSystemGapIntegrals => linear_system_integral_suite(),
        Suite::PerturbedConjugation => conjugation_suite(opts.seed),
        Suite::ConstantRate => soundness_suite(Suite::ConstantRate, &[ScheduleSpec::Constant]),
        Suite::AdaptiveRate => soundness_suite(
            Suite::AdaptiveRate,
            &BATTERY_QS.map(|q| ScheduleSpec::Adaptive { q }),
        ),
        Suite::Filtering => filtering_suite(opts.seed),
        Suite::CircuitConstant => circuit_suite(Suite::CircuitConstant, opts),
        Suite::CircuitAdaptive => circuit_suite(Suite::CircuitAdaptive, opts),
        Suite::McVsOde => mc_vs_ode_suite(opts),
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, opts)?);
            }
            Ok(all)
        }
    }
}

fn schedule_label(s: ScheduleSpec) -> String {
    match s {
        ScheduleSpec::Constant => "constant".into(),
        ScheduleSpec::Adaptive { q } => format!("adaptive-q{q}"),
    }
}

/// ODE runs of every battery problem for each schedule and target.
fn battery_runs(schedules: &[ScheduleSpec]) -> Result<Vec<(String, f64, f64, f64)>> {
    let mut jobs = Vec::new();
    for &sched in schedules {
        for eps in BATTERY_EPSILONS {
            for p in battery() {
                jobs.push((sched, eps, p));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(sched, eps, p)| {
            let m = ExperimentManifest::with_problem(p, sched, eps);
            let art = execute(&m, None)?;
            let r = art.report;
            let name = format!("{} {} eps={eps}", r.problem.label, schedule_label(sched));
            Ok((name, eps, r.final_infidelity, r.error_bound))
        })
        .collect()
}

fn soundness_suite(suite: Suite, schedules: &[ScheduleSpec]) -> Result<Vec<Check>> {
    Ok(battery_runs(schedules)?
        .into_iter()
        .map(|(name, eps, inf, _)| Check::new(suite, format!("{name}: infidelity <= eps"), inf, eps))
        .collect())
}

fn error_bound_suite() -> Result<Vec<Check>> {
    let schedules = [ScheduleSpec::Constant, ScheduleSpec::Adaptive { q: 0.5 }];
    Ok(battery_runs(&schedules)?
        .into_iter()
        .map(|(name, _, inf, bound)| Check::new(Suite::ErrorBound, format!("{name}: infidelity <= bound"), inf, bound))
        .collect())
}

fn derivative_suite() -> Result<Vec<Check>> {
    let suite = Suite::ProjectorDerivatives;
    let per_problem: Vec<Vec<Check>> = battery()
        .into_par_iter()
        .map(|spec| {
            let p = build_problem(&spec)?;
            // Work on the invariant subspace the state actually explores;
            // spectator levels may touch the tracked level in the full space.
            let sub = InvariantSubspace::for_state(p.path.as_ref(), &p.rho0);
            let path = sub.restrict_path(p.path.as_ref())?;
            let mut out = Vec::new();
            let (mut worst1, mut worst2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut worst = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for s in unit_grid(FD_GRID) {
                let fd = fd_projector_derivatives(&path, s, FD_STEP, &TrackerState::from_gap(&p.gap, s))?;
                let d = p.gap.delta(s);
                let h1 = path.d1_norm(s);
                let h2 = path.d2_norm(s);
                let b1 = 2.0 * h1 / d;
                let b2 = 8.0 * h1 * h1 / (d * d) + 2.0 * h2 / d;
                let r1 = (fd.d1_norm() - fd.d1_err) / b1;
                let r2 = (fd.d2_norm() - fd.d2_err) / b2;
                if r1 > worst1 {
                    worst1 = r1;
                    worst.0 = s;
                    worst.1 = fd.d1_norm() - fd.d1_err;
                    worst.2 = b1;
                }
                if r2 > worst2 {
                    worst2 = r2;
                    worst.3 = s;
                    worst.4 = fd.d2_norm() - fd.d2_err;
                    worst.5 = b2;
                }
            }
            out.push(Check::new(suite, format!("{}: |P'| <= 2|H'|/gap (tightest s={})", p.label, worst.0), worst.1, worst.2));
            out.push(Check::new(
                suite,
                format!("{}: |P''| <= 8|H'|^2/gap^2 + 2|H''|/gap (tightest s={})", p.label, worst.3),
                worst.4,
                worst.5,
            ));
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_problem.into_iter().flatten().collect())
}

fn integral_scaling(
    suite: Suite,
    family: &str,
    xs: &[f64],
    log_x: &[f64],
    gaps: &[GapModel],
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in [1.5, 2.0] {
        let ys: Vec<f64> = gaps.iter().map(|g| gap_integral(g, p, 1e-10)).collect::<zeno_core::Result<_>>()?;
        let fit = fit_loglog(xs, &ys)?;
        out.push(Check::within(suite, format!("{family}: slope of int gap^-{p}"), fit.slope, p - 1.0, SLOPE_TOL));
    }
    let ratios: Vec<f64> = gaps
        .iter()
        .zip(log_x)
        .map(|(g, l)| Ok(gap_integral(g, 1.0, 1e-10)? / l))
        .collect::<Result<_>>()?;
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
    out.push(Check::new(suite, format!("{family}: int gap^-1 / log stays within a factor 2"), spread, 2.0));
    Ok(out)
}

fn search_integral_suite() -> Result<Vec<Check>> {
    let xs: Vec<f64> = GROVER_SWEEP_N.iter().map(|&n| (n as f64).sqrt()).collect();
    let logs: Vec<f64> = GROVER_SWEEP_N.iter().map(|&n| (n as f64).ln()).collect();
    let gaps: Vec<GapModel> = GROVER_SWEEP_N.iter().map(|&n| GapModel::grover(n, 1)).collect();
    integral_scaling(Suite::SearchGapIntegrals, "grover sqrt(N)", &xs, &logs, &gaps)
}

fn linear_system_integral_suite() -> Result<Vec<Check>> {
    let logs: Vec<f64> = QLSP_SWEEP_KAPPA.iter().map(|k| k.ln()).collect();
    let gaps: Vec<GapModel> = QLSP_SWEEP_KAPPA.iter().map(|&k| GapModel::qlsp(k)).collect();
    integral_scaling(Suite::LinearSystemGapIntegrals, "qlsp kappa", &QLSP_SWEEP_KAPPA, &logs, &gaps)
}

fn random_matrix(dim: usize, rng: &mut zeno_core::engine::rng::ZenoRng) -> CMat {
    let a = random_hermitian(dim, rng);
    let b = random_hermitian(dim, rng);
    a + b * C64::new(0.0, 1.0)
}

pub const CONJUGATION_TRIPLES: usize = 1000;

fn conjugation_suite(seed: u64) -> Result<Vec<Check>> {
    let suite = Suite::PerturbedConjugation;
    let results: Vec<(f64, f64)> = (0..CONJUGATION_TRIPLES as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let dim = rng.random_range(2..=8usize);
            let a = if i % 2 == 0 {
                HermitianOperator::new(random_hermitian(dim, &mut rng))?.propagator(rng.random_range(0.1..10.0))
            } else {
                let m = random_matrix(dim, &mut rng);
                let n = zeno_core::operator::spectral_norm(&m);
                m.unscale(n).scale(rng.random_range(0.1..3.0))
            };
            let e = random_matrix(dim, &mut rng);
            let delta: f64 = rng.random_range(0.0..1.0);
            let b = &a + e.unscale(zeno_core::operator::spectral_norm(&e)) * C64::new(delta, 0.0);
            let g = random_matrix(dim, &mut rng);
            let rho = DensityMatrix::new(&g * g.adjoint() / (&g * g.adjoint()).trace())?;
            let lhs = trace_norm_diff_of_conjugations(&a, &b, &rho)?;
            let an = zeno_core::operator::spectral_norm(&a);
            Ok((lhs, 2.0 * delta * an + delta * delta))
        })
        .collect::<Result<_>>()?;
    let failures = results.iter().filter(|(l, r)| l > r).count();
    let tightest = results.iter().map(|(l, r)| l / r).fold(0.0, f64::max);
    Ok(vec![
        Check::new(suite, format!("{CONJUGATION_TRIPLES} random triples: violations"), failures as f64, 0.0),
        Check::new(suite, "largest ratio lhs/rhs", tightest, 1.0),
    ])
}

/// Prepared-then-filtered states on the battery, plus the cost checks.
fn filtering_suite(seed: u64) -> Result<Vec<Check>> {
    let suite = Suite::Filtering;
    let mut out: Vec<Check> = battery()
        .into_par_iter()
        .map(|spec| filter_problem_checks(&spec, seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    // Cost linear in log(1/eps) for the kappa = 10 system.
    let band = GapModel::qlsp(10.0).delta_m;
    let eps_grid = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
    let costs: Vec<f64> = eps_grid.iter().map(|&e| Ok(design_window(band, e)?.cost())).collect::<Result<_>>()?;
    let logs: Vec<f64> = eps_grid.iter().map(|e| (1.0 / e).ln()).collect();
    let fit = fit_line(&logs, &costs)?;
    out.push(Check::at_least(suite, "qlsp kappa=10: filter cost vs log(1/eps) r^2", fit.r2, 0.99));

    // Cost proportional to 1/gap at fixed eps.
    let inv: Vec<f64> = QLSP_SWEEP_KAPPA.iter().map(|&k| 1.0 / GapModel::qlsp(k).delta_m).collect();
    let costs: Vec<f64> = QLSP_SWEEP_KAPPA
        .iter()
        .map(|&k| Ok(design_window(GapModel::qlsp(k).delta_m, 1e-6)?.cost()))
        .collect::<Result<_>>()?;
    let fit = fit_loglog(&inv, &costs)?;
    out.push(Check::within(suite, "filter cost vs 1/gap slope at eps=1e-6", fit.slope, 1.0, SLOPE_TOL));
    let normalised: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&k: &f64| Ok(design_window(GapModel::qlsp(k).delta_m, 1e-6)?.cost() / (k * (1e6f64).ln())))
        .collect::<Result<_>>()?;
    let spread = normalised.iter().cloned().fold(f64::MIN, f64::max) / normalised.iter().cloned().fold(f64::MAX, f64::min);
    out.push(Check::new(suite, "cost/(kappa log(1/eps)) spread over kappa 10,20,40", spread, 2.0));

    // Reference window.
    let size = window_size(0.1, 1e-8)?;
    out.push(Check::within(suite, "window size at (0.1, 1e-8)", size.n as f64, 99.0, 0.0));
    let win = zeno_core::filter::chebyshev_window(size.n, 0.1)?;
    out.push(Check::new(suite, "reference window ripple", win.realised_ripple, 1e-4));
    Ok(out)
}

pub const FILTER_EPSILONS: [f64; 2] = [1e-4, 1e-6];
pub const PREPARATION_EPSILON: f64 = 0.3;
pub const SUCCESS_TRIALS: usize = 2000;

fn filter_problem_checks(spec: &ProblemSpec, seed: u64) -> Result<Vec<Check>> {
    let suite = Suite::Filtering;
    let p = build_problem(spec)?;
    let sched = ideal_schedule(&p, ScheduleSpec::Constant, PREPARATION_EPSILON, None)?;
    let sim = Simulation::new(p.path.as_ref(), &p.gap, &p.rho0)?;
    let ode = run_marginal_ode_in(&sim, &sched, &OdeOptions::default())?;
    let rho1 = ode.rho1.context("final state unavailable")?;
    let before = rho1.fidelity(&p.target);
    let h1 = p.path.evaluate(1.0);
    let band = p.gap.delta_m.min(MAX_FILTER_BAND);
    let mut out = vec![Check::at_least(suite, format!("{}: prepared overlap above 1/2", p.label), before, 0.5)];
    for eps in FILTER_EPSILONS {
        let win = design_window(band, eps)?;
        let f = apply_filter(&h1, &rho1, &win, p.final_eigenvalue())?;
        let after = 1.0 - f.state.fidelity(&p.target);
        out.push(Check::new(suite, format!("{} eps={eps}: filtered infidelity <= eps", p.label), after, eps));
        let rate = sample_success_rate(f.success_prob, SUCCESS_TRIALS, seed);
        let sigma = (f.success_prob * (1.0 - f.success_prob) / SUCCESS_TRIALS as f64).sqrt();
        out.push(Check::within(
            suite,
            format!("{} eps={eps}: success rate over {SUCCESS_TRIALS} trials within 3 sigma", p.label),
            rate,
            f.success_prob,
            3.0 * sigma.max(f64::EPSILON),
        ));
        out.push(Check::new(
            suite,
            format!("{} eps={eps}: expected attempts <= 1/overlap", p.label),
            1.0 / f.success_prob,
            1.0 / before,
        ));
    }
    Ok(out)
}

pub const NOISY_EPSILON: f64 = 0.1;

fn circuit_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let schedules: Vec<ScheduleSpec> = match suite {
        Suite::CircuitConstant => vec![ScheduleSpec::Constant],
        _ => BATTERY_QS.iter().map(|&q| ScheduleSpec::Adaptive { q }).collect(),
    };
    let mut jobs = Vec::new();
    for &s in &schedules {
        for eps in BATTERY_EPSILONS {
            for p in battery() {
                jobs.push((s, eps, p));
            }
        }
    }
    let mut out: Vec<Check> = jobs
        .into_par_iter()
        .map(|(s, eps, spec)| {
            let p = build_problem(&spec)?;
            let c = circuit_params(&p, s, eps, None)?;
            let q = query_integral(&c.cost, &p.gap)?;
            Ok(Check::at_least(
                suite,
                format!("{} {} eps={eps}: query bound >= query integral", p.label, schedule_label(s)),
                c.q_bound * (1.0 + QUADRATURE_SLACK),
                q,
            ))
        })
        .collect::<Result<_>>()?;

    if suite == Suite::CircuitAdaptive {
        // Query bound against kappa with constants shared by the family.
        let sched = ScheduleSpec::Adaptive { q: 0.5 };
        let problems: Vec<_> = QLSP_SWEEP_KAPPA
            .iter()
            .map(|&k| build_problem(&ProblemSpec::QlspDiagonal { kappa: k }))
            .collect::<Result<_>>()?;
        let family = problems.iter().try_fold(ScheduleConstants::default(), |acc, p| {
            Ok::<_, anyhow::Error>(acc.max(&instance_constants(p, sched)?))
        })?;
        let bounds: Vec<f64> = problems
            .iter()
            .map(|p| Ok(circuit_params(p, sched, NOISY_EPSILON, Some(&family))?.q_bound))
            .collect::<Result<_>>()?;
        let fit = fit_loglog(&QLSP_SWEEP_KAPPA, &bounds)?;
        out.push(Check::within(suite, "query bound vs kappa slope", fit.slope, 1.0, CIRCUIT_SLOPE_TOL));
    }

    // Imperfect evolutions with the circuit parameters still meet the target.
    let sched = schedules[schedules.len() / 2];
    let mut m = ExperimentManifest::grover(16, 1, sched, NOISY_EPSILON);
    m.mode = Mode::Noisy;
    m.trajectories = opts.trajectories;
    m.seed = opts.seed;
    let r = execute(&m, None)?.report;
    out.push(Check::new(
        suite,
        format!("grover-n16-m1 {} noisy ensemble: infidelity <= eps", schedule_label(sched)),
        r.final_infidelity,
        NOISY_EPSILON,
    ));
    Ok(out)
}

pub const MC_CHECK_EPSILON: f64 = 0.1;

fn mc_vs_ode_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let suite = Suite::McVsOde;
    let specs = [ProblemSpec::Grover { n: 8, m: 1 }, ProblemSpec::QlspDiagonal { kappa: 5.0 }];
    let mut out = Vec::new();
    for spec in specs {
        let p = build_problem(&spec)?;
        let sched = ideal_schedule(&p, ScheduleSpec::Adaptive { q: 0.5 }, MC_CHECK_EPSILON, None)?;
        let sim = Simulation::new(p.path.as_ref(), &p.gap, &p.rho0)?;
        let ode = run_marginal_ode_in(&sim, &sched, &OdeOptions::default())?;
        let cost = expected_cost(&sched, &p.gap)?;
        for spec_sampler in [SamplerSpec::Ideal, SamplerSpec::Gaussian] {
            let sampler = crate::run::sampler_for(spec_sampler);
            let recs = run_ensemble(&sim, &sched, &sampler, opts.trajectories, opts.seed)?;
            let sum = ensemble_statistics(&recs)?;
            if matches!(sampler, TauSampler::IdealDephase) {
                for (c, &(s, f)) in sum.checkpoints.iter().zip(&ode.checkpoints) {
                    out.push(Check::within(
                        suite,
                        format!("{}: mean fidelity at s={s} within 3 sigma of ode", p.label),
                        c.mean,
                        f,
                        3.0 * c.stderr.max(1e-15),
                    ));
                }
            }
            out.push(Check::within(
                suite,
                format!("{} {}: mean evolution time within 3 sigma of t0 int lambda/gap", p.label, sampler.name()),
                sum.mean_time,
                cost.t_physical,
                3.0 * sum.stderr_time,
            ));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub trajectories: usize,
    pub checks: Vec<Check>,
    pub failed: usize,
}

pub fn report(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let checks = run_suite(suite, opts)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(VerifyReport { suite: suite.name().into(), seed: opts.seed, trajectories: opts.trajectories, checks, failed })
}

/// Checks as CSV, one row per check.
pub fn checks_csv(checks: &[Check]) -> String {
    let mut t = Table::new(&["suite", "name", "measured", "bound", "margin", "passed"]);
    for c in checks {
        t.row(vec![
            c.suite.as_str().into(),
            c.name.as_str().into(),
            c.measured.into(),
            c.bound.into(),
            c.margin.into(),
            if c.passed { "true" } else { "false" }.into(),
        ]);
    }
    t.finish()
}

/// Runs a suite and writes `verify.json` and `verify.csv`. The exit code is
/// the number of failed checks, saturating at 255.
pub fn cmd_verify(suite: Suite, opts: &VerifyOptions, out_dir: &Path) -> Result<i32> {
    let rep = report(suite, opts)?;
    write_text(out_dir, "verify.json", &to_json(&rep)?)?;
    write_text(out_dir, "verify.csv", &checks_csv(&rep.checks))?;
    for c in &rep.checks {
        println!(
            "{} {:<10} {:<48} measured {:.6e} bound {:.6e} margin {:+.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.measured,
            c.bound,
            c.margin
        );
    }
    println!("{}: {} checks, {} failed", rep.suite, rep.checks.len(), rep.failed);
    Ok(rep.failed.min(255) as i32)
}
