//! The `run` command: one problem, one schedule, one simulation mode.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use zeno_core::engine::rng::RNG_ALGORITHM;
use zeno_core::engine::{
    ensemble_statistics, run_ensemble, run_marginal_ode_in, run_noisy_ensemble, EnsembleSummary, NoiseDelta,
    NoiseDirection, NoiseSpec, OdeOptions, OdeResult, RunRecord, Simulation, TauSampler,
};
use zeno_core::filter::{design_window, filter_until_success, window_size, FilterWindow};
use zeno_core::operator::DensityMatrix;
use zeno_core::schedule::{
    adaptive_constants, b3_constant, circuit_adaptive_with_constants, circuit_alpha, circuit_constant_params,
    constant_rate, error_bound, expected_cost, query_integral, CircuitParams, DerivativeSource, ExpectedCost,
    Schedule, ScheduleConstants, ScheduleKind,
};

use crate::manifest::{ExperimentManifest, Mode, SamplerSpec, ScheduleSpec};
use crate::output::{to_json, write_text, Table};
use crate::problem::{build_problem, Problem};

/// Largest stop-band edge used for filtering; the window needs `delta < pi/2`.
pub const MAX_FILTER_BAND: f64 = 1.5;

pub fn sampler_for(spec: SamplerSpec) -> TauSampler {
    match spec {
        SamplerSpec::Ideal => TauSampler::IdealDephase,
        SamplerSpec::Gaussian => TauSampler::gaussian(),
    }
}

/// Rate constants of one instance; `b3` is included so the same constants
/// serve the circuit-model parameters.
pub fn instance_constants(problem: &Problem, schedule: ScheduleSpec) -> Result<ScheduleConstants> {
    match schedule {
        ScheduleSpec::Constant => Ok(ScheduleConstants::default()),
        ScheduleSpec::Adaptive { q } => {
            let mut c = adaptive_constants(problem.path.as_ref(), &problem.gap, q)?;
            c.b3 = Some(b3_constant(&problem.gap, q)?);
            Ok(c)
        }
    }
}

/// Schedule used by the ode and mc modes. Adaptive schedules take `family`
/// constants when given.
pub fn ideal_schedule(
    problem: &Problem,
    schedule: ScheduleSpec,
    eps: f64,
    family: Option<&ScheduleConstants>,
) -> Result<Schedule> {
    Ok(match schedule {
        ScheduleSpec::Constant => constant_rate(problem.path.as_ref(), &problem.gap, eps, DerivativeSource::AnalyticBound)?,
        ScheduleSpec::Adaptive { q } => {
            let c = match family {
                Some(c) => *c,
                None => instance_constants(problem, schedule)?,
            };
            Schedule::adaptive_with_constants(&problem.gap, eps, q, c)?
        }
    })
}

pub fn circuit_params(
    problem: &Problem,
    schedule: ScheduleSpec,
    eps: f64,
    family: Option<&ScheduleConstants>,
) -> Result<CircuitParams> {
    Ok(match schedule {
        ScheduleSpec::Constant => circuit_constant_params(problem.path.as_ref(), &problem.gap, eps)?,
        ScheduleSpec::Adaptive { q } => {
            let c = match family {
                Some(c) => *c,
                None => instance_constants(problem, schedule)?,
            };
            circuit_adaptive_with_constants(&problem.gap, eps, q, c, circuit_alpha(problem.path.as_ref()))?
        }
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub label: String,
    pub dim: usize,
    pub working_dim: usize,
    pub gap_kind: String,
    pub delta_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub kind: ScheduleKind,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    pub constants: ScheduleConstants,
    pub prefactor: f64,
    pub lambda_max: f64,
    pub lambda_integral: f64,
}

impl ScheduleSummary {
    pub fn of(s: &Schedule) -> Result<Self> {
        Ok(Self {
            kind: s.kind,
            epsilon: s.epsilon,
            q: s.q,
            constants: s.constants,
            prefactor: s.prefactor,
            lambda_max: s.lambda_max(),
            lambda_integral: s.integral()?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerInfo {
    pub name: String,
    /// Whether the evolution-time distribution is assumed symmetric in sign.
    pub symmetric: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OdeSummary {
    pub final_fidelity: f64,
    pub infidelity: f64,
    pub checkpoints: Vec<(f64, f64)>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
}

impl From<&OdeResult> for OdeSummary {
    fn from(r: &OdeResult) -> Self {
        Self {
            final_fidelity: r.final_fidelity,
            infidelity: r.infidelity(),
            checkpoints: r.checkpoints.clone(),
            accepted_steps: r.accepted_steps,
            rejected_steps: r.rejected_steps,
            min_eigenvalue: r.min_eigenvalue,
            trace_deviation: r.trace_deviation,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub alpha: f64,
    pub delta_coeff: f64,
    pub q_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_bound_single_log: Option<f64>,
    pub query_integral: f64,
}

impl CircuitSummary {
    pub fn of(c: &CircuitParams, problem: &Problem) -> Result<Self> {
        Ok(Self {
            alpha: c.cost.alpha,
            delta_coeff: c.cost.delta_coeff,
            q_bound: c.q_bound,
            q_bound_single_log: c.q_bound_single_log,
            query_integral: query_integral(&c.cost, &problem.gap)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilterSummary {
    pub epsilon: f64,
    pub delta_band: f64,
    pub n: usize,
    pub n_formula: usize,
    pub realised_ripple: f64,
    pub success_prob: f64,
    pub repeats: usize,
    pub cost_per_attempt: f64,
    pub total_cost: f64,
    pub infidelity_before: f64,
    pub infidelity_after: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub manifest: ExperimentManifest,
    pub problem: ProblemSummary,
    pub rng: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerInfo>,
    pub schedule: ScheduleSummary,
    pub cost: ExpectedCost,
    pub error_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterSummary>,
    /// Infidelity after filtering when a filter is configured.
    pub final_infidelity: f64,
    pub target_epsilon: f64,
    pub passed: bool,
}

/// Everything a run produces, before it is written anywhere.
pub struct RunArtifacts {
    pub report: RunReport,
    pub trace_csv: String,
    pub schedule_csv: String,
    pub trajectories_csv: Option<String>,
    pub filter_json: Option<String>,
    pub window: Option<FilterWindow>,
    pub final_state: Option<DensityMatrix>,
}

#[derive(Serialize)]
struct FilterFile<'a> {
    summary: &'a FilterSummary,
    window: &'a FilterWindow,
}

fn trajectory_table(records: &[RunRecord]) -> String {
    let mut t = Table::new(&["index", "jumps", "evolution_time", "final_fidelity"]);
    for r in records {
        t.row(vec![(r.index as i64).into(), r.jump_count.into(), r.total_evolution_time.into(), r.final_fidelity.into()]);
    }
    t.finish()
}

fn ensemble_trace(sum: &EnsembleSummary) -> String {
    let mut t = Table::new(&["s", "fidelity", "stderr"]);
    for c in &sum.checkpoints {
        t.row(vec![c.s.into(), c.mean.into(), c.stderr.into()]);
    }
    t.finish()
}

fn ode_trace(r: &OdeResult) -> String {
    let mut t = Table::new(&["s", "fidelity"]);
    for &(s, f) in &r.fidelity_trace {
        t.row(vec![s.into(), f.into()]);
    }
    t.finish()
}

fn schedule_table(s: &Schedule) -> String {
    let mut t = Table::new(&["s", "lambda"]);
    for &(x, l) in &s.tabulation {
        t.row(vec![x.into(), l.into()]);
    }
    t.finish()
}

/// Runs a manifest end to end without touching the file system.
pub fn execute(m: &ExperimentManifest, family: Option<&ScheduleConstants>) -> Result<RunArtifacts> {
    m.validate()?;
    let problem = build_problem(&m.problem)?;
    let circuit = match m.mode {
        Mode::Noisy => Some(circuit_params(&problem, m.schedule, m.epsilon, family)?),
        _ => None,
    };
    let schedule = match &circuit {
        Some(c) => c.schedule.clone(),
        None => ideal_schedule(&problem, m.schedule, m.epsilon, family)?,
    };
    let path = problem.path.as_ref();
    let cost = expected_cost(&schedule, &problem.gap)?;
    let bound = error_bound(path, &schedule, &problem.gap, DerivativeSource::AnalyticBound)?;
    let sampler = sampler_for(m.sampler);
    let opts = OdeOptions { step_tol: m.ode_tol, ..OdeOptions::default() };

    let reduced = Simulation::new(path, &problem.gap, &problem.rho0)?;
    let mut ode = None;
    let mut ensemble = None;
    let mut trajectories_csv = None;
    let trace_csv;
    let working_dim;
    let mut infidelity;
    match m.mode {
        Mode::Ode => {
            let r = run_marginal_ode_in(&reduced, &schedule, &opts)?;
            trace_csv = ode_trace(&r);
            infidelity = r.infidelity();
            working_dim = reduced.working_dim();
            ode = Some(r);
        }
        Mode::Mc => {
            let recs = run_ensemble(&reduced, &schedule, &sampler, m.trajectories, m.seed)?;
            let sum = summarise(&recs)?;
            trace_csv = ensemble_trace(&sum);
            trajectories_csv = Some(trajectory_table(&recs));
            infidelity = sum.mean_infidelity();
            working_dim = reduced.working_dim();
            ensemble = Some(sum);
            if m.filter.is_some() {
                ode = Some(run_marginal_ode_in(&reduced, &schedule, &opts)?);
            }
        }
        Mode::Noisy => {
            let c = circuit.as_ref().expect("noisy mode builds circuit parameters");
            anyhow::ensure!(
                !problem.restricted,
                "noisy mode needs the full space; this instance is too large for it"
            );
            let full = Simulation::full(path, &problem.gap, &problem.rho0)?;
            let noise = NoiseSpec {
                delta: NoiseDelta::OverRate { coeff: c.cost.delta_coeff },
                direction: NoiseDirection::RandomHermitian,
            };
            let recs = run_noisy_ensemble(&full, &schedule, &sampler, &noise, m.trajectories, m.seed)?;
            let sum = summarise(&recs)?;
            trace_csv = ensemble_trace(&sum);
            trajectories_csv = Some(trajectory_table(&recs));
            infidelity = sum.mean_infidelity();
            working_dim = full.working_dim();
            ensemble = Some(sum);
        }
    }

    let mut filter = None;
    let mut filter_json = None;
    let mut window = None;
    let mut final_state = ode.as_ref().and_then(|r| r.rho1.clone());
    let target_epsilon = m.filter.map_or(m.epsilon, |f| f.epsilon);
    if let Some(spec) = m.filter {
        let rho1 = final_state.clone().context("final state unavailable for filtering")?;
        let before = 1.0 - rho1.fidelity(&problem.target);
        let band = problem.gap.delta_m.min(MAX_FILTER_BAND);
        let win = design_window(band, spec.epsilon)?;
        let h1 = path.evaluate(1.0);
        let run = filter_until_success(&h1, &rho1, &win, problem.final_eigenvalue(), m.seed, cost.t_physical)?;
        let after = 1.0 - run.state.fidelity(&problem.target);
        let summary = FilterSummary {
            epsilon: spec.epsilon,
            delta_band: band,
            n: win.n,
            n_formula: window_size(band, spec.epsilon)?.n,
            realised_ripple: win.realised_ripple,
            success_prob: run.success_prob,
            repeats: run.repeats,
            cost_per_attempt: win.cost(),
            total_cost: run.total_cost,
            infidelity_before: before,
            infidelity_after: after,
        };
        filter_json = Some(to_json(&FilterFile { summary: &summary, window: &win })?);
        infidelity = after;
        final_state = Some(run.state);
        filter = Some(summary);
        window = Some(win);
    }

    let circuit_summary = match &circuit {
        Some(c) => Some(CircuitSummary::of(c, &problem)?),
        None => None,
    };
    let report = RunReport {
        manifest: m.clone(),
        problem: ProblemSummary {
            label: problem.label.clone(),
            dim: problem.dim(),
            working_dim,
            gap_kind: problem.gap.kind_name().to_string(),
            delta_min: problem.gap.delta_m,
            kappa: problem.kappa,
        },
        rng: RNG_ALGORITHM.to_string(),
        sampler: (m.mode != Mode::Ode).then(|| SamplerInfo {
            name: sampler.name().to_string(),
            symmetric: matches!(sampler, TauSampler::Gaussian { .. }),
        }),
        schedule: ScheduleSummary::of(&schedule)?,
        cost,
        error_bound: bound,
        ode: ode.as_ref().map(OdeSummary::from),
        ensemble,
        circuit: circuit_summary,
        filter,
        final_infidelity: infidelity,
        target_epsilon,
        passed: infidelity <= target_epsilon,
    };
    Ok(RunArtifacts {
        report,
        trace_csv,
        schedule_csv: schedule_table(&schedule),
        trajectories_csv,
        filter_json,
        window,
        final_state,
    })
}

fn summarise(recs: &[RunRecord]) -> Result<EnsembleSummary> {
    if recs.len() >= 2 {
        return Ok(ensemble_statistics(recs)?);
    }
    // One trajectory: report it with zero-width intervals.
    let r = &recs[0];
    let mut doubled = vec![r.clone(), r.clone()];
    doubled[1].index += 1;
    let mut sum = ensemble_statistics(&doubled)?;
    sum.trajectories = 1;
    Ok(sum)
}

/// Runs a manifest and writes `run.json`, `trace.csv`, `schedule.csv`, and
/// where applicable `trajectories.csv` and `filter.json`. Returns the exit
/// code: zero when the target infidelity is met.
pub fn cmd_run(m: &ExperimentManifest) -> Result<i32> {
    let art = execute(m, None)?;
    let dir = &m.outputs;
    write_text(dir, "run.json", &to_json(&art.report)?)?;
    write_text(dir, "trace.csv", &art.trace_csv)?;
    write_text(dir, "schedule.csv", &art.schedule_csv)?;
    if let Some(t) = &art.trajectories_csv {
        write_text(dir, "trajectories.csv", t)?;
    }
    if let Some(f) = &art.filter_json {
        write_text(dir, "filter.json", f)?;
    }
    if let (Some(w), Some(spec)) = (&art.window, m.filter) {
        write_text(dir, "window.csv", &crate::window::window_csv(w, spec.epsilon))?;
    }
    let r = &art.report;
    println!(
        "{}: infidelity {:.3e} (target {:.3e}) {}",
        r.problem.label,
        r.final_infidelity,
        r.target_epsilon,
        if r.passed { "PASS" } else { "FAIL" }
    );
    Ok(if r.passed { 0 } else { 1 })
}
