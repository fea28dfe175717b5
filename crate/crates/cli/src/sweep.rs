//! The `sweep` command: one parameter varied, costs collected, a line fitted.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zeno_core::fit::{fit_line, LinearFit};
use zeno_core::schedule::ScheduleConstants;

use crate::manifest::{ExperimentManifest, FilterSpec, ProblemSpec, ScheduleSpec};
use crate::output::{to_json, write_text, Cell, Table};
use crate::problem::build_problem;
use crate::run::{circuit_params, execute, instance_constants};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[value(name = "grover-N")]
    #[serde(rename = "grover-N")]
    GroverN,
    #[value(name = "qlsp-kappa")]
    #[serde(rename = "qlsp-kappa")]
    QlspKappa,
    #[value(name = "epsilon")]
    #[serde(rename = "epsilon")]
    Epsilon,
    #[value(name = "q")]
    #[serde(rename = "q")]
    Q,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::GroverN => "grover-N",
            Axis::QlspKappa => "qlsp-kappa",
            Axis::Epsilon => "epsilon",
            Axis::Q => "q",
        }
    }
}

pub const MIN_SWEEP_POINTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub t_schedule: Option<f64>,
    pub t_physical: Option<f64>,
    pub q_bound: Option<f64>,
    pub final_infidelity: Option<f64>,
    pub filter_cost: Option<f64>,
    /// `ok`, or the error that excluded the point from the fit.
    pub status: String,
}

impl SweepPoint {
    fn failed(x: f64, e: &anyhow::Error) -> Self {
        Self {
            x,
            t_schedule: None,
            t_physical: None,
            q_bound: None,
            final_infidelity: None,
            filter_cost: None,
            status: format!("error: {e:#}"),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// How the fit variables are obtained from a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XMap {
    Identity,
    Sqrt,
    /// `ln(1/x)`, plotted linearly.
    LogInverse,
    Inverse,
}

impl XMap {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            XMap::Identity => x,
            XMap::Sqrt => x.sqrt(),
            XMap::LogInverse => (1.0 / x).ln(),
            XMap::Inverse => 1.0 / x,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            XMap::Identity => "x",
            XMap::Sqrt => "sqrt(x)",
            XMap::LogInverse => "ln(1/x)",
            XMap::Inverse => "1/x",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub x_map: XMap,
    pub y_column: String,
    /// Whether both fit variables are log-transformed.
    pub log_log: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub template: ExperimentManifest,
    /// Adaptive constants shared by every point, when the axis changes the
    /// problem instance.
    pub family_constants: Option<ScheduleConstants>,
    pub points: Vec<SweepPoint>,
    pub fit_spec: FitSpec,
    pub fit: Option<LinearFit>,
    pub failed: usize,
}

fn point_manifest(template: &ExperimentManifest, axis: Axis, x: f64) -> Result<ExperimentManifest> {
    let mut m = template.clone();
    match axis {
        Axis::GroverN => {
            let marked = match template.problem {
                ProblemSpec::Grover { m, .. } => m,
                _ => 1,
            };
            if x.fract() != 0.0 || x < 2.0 {
                bail!("grover N must be an integer >= 2, got {x}");
            }
            m.problem = ProblemSpec::Grover { n: x as usize, m: marked };
        }
        Axis::QlspKappa => m.problem = ProblemSpec::QlspDiagonal { kappa: x },
        Axis::Epsilon => match &mut m.filter {
            Some(f) => *f = FilterSpec { epsilon: x },
            None => m.epsilon = x,
        },
        Axis::Q => m.schedule = ScheduleSpec::Adaptive { q: x },
    }
    m.validate()?;
    Ok(m)
}

fn fit_spec(template: &ExperimentManifest, axis: Axis) -> FitSpec {
    let t = |x_map| FitSpec { x_map, y_column: "t_schedule".into(), log_log: true };
    match axis {
        Axis::GroverN => t(XMap::Sqrt),
        Axis::QlspKappa => t(XMap::Identity),
        Axis::Epsilon if template.filter.is_some() => {
            FitSpec { x_map: XMap::LogInverse, y_column: "filter_cost".into(), log_log: false }
        }
        Axis::Epsilon => t(XMap::Inverse),
        Axis::Q => FitSpec { x_map: XMap::Identity, y_column: "t_schedule".into(), log_log: false },
    }
}

fn evaluate(m: &ExperimentManifest, family: Option<&ScheduleConstants>) -> Result<SweepPoint> {
    let art = execute(m, family)?;
    let r = &art.report;
    let problem = build_problem(&m.problem)?;
    let q_bound = circuit_params(&problem, m.schedule, m.epsilon, family)?.q_bound;
    Ok(SweepPoint {
        x: 0.0,
        t_schedule: Some(r.cost.t_schedule),
        t_physical: Some(r.cost.t_physical),
        q_bound: Some(q_bound),
        final_infidelity: Some(r.final_infidelity),
        filter_cost: r.filter.as_ref().map(|f| f.cost_per_attempt),
        status: "ok".into(),
    })
}

pub fn sweep(template: &ExperimentManifest, axis: Axis, values: &[f64]) -> Result<SweepResult> {
    if values.len() < MIN_SWEEP_POINTS {
        bail!("a sweep needs at least {MIN_SWEEP_POINTS} values, got {}", values.len());
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let manifests: Vec<Result<ExperimentManifest>> = xs.iter().map(|&x| point_manifest(template, axis, x)).collect();

    // Instances of one family share their adaptive constants.
    let family = match (axis, template.schedule) {
        (Axis::GroverN | Axis::QlspKappa, spec @ ScheduleSpec::Adaptive { .. }) => {
            let per: Vec<Option<ScheduleConstants>> = manifests
                .par_iter()
                .map(|m| {
                    let m = m.as_ref().ok()?;
                    instance_constants(&build_problem(&m.problem).ok()?, spec).ok()
                })
                .collect();
            per.into_iter().flatten().reduce(|a, b| a.max(&b))
        }
        _ => None,
    };

    let points: Vec<SweepPoint> = manifests
        .into_par_iter()
        .zip(xs.par_iter())
        .map(|(m, &x)| {
            let res = m.and_then(|m| evaluate(&m, family.as_ref()));
            match res {
                Ok(mut p) => {
                    p.x = x;
                    p
                }
                Err(e) => SweepPoint::failed(x, &e),
            }
        })
        .collect();

    let spec = fit_spec(template, axis);
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for p in points.iter().filter(|p| p.ok()) {
        let y = if spec.y_column == "filter_cost" { p.filter_cost } else { p.t_schedule };
        if let Some(y) = y {
            let x = spec.x_map.apply(p.x);
            if spec.log_log {
                fx.push(x.ln());
                fy.push(y.ln());
            } else {
                fx.push(x);
                fy.push(y);
            }
        }
    }
    let fit = if fx.len() >= 2 { fit_line(&fx, &fy).ok() } else { None };
    let failed = points.iter().filter(|p| !p.ok()).count();
    Ok(SweepResult {
        axis,
        template: template.clone(),
        family_constants: family,
        points,
        fit_spec: spec,
        fit,
        failed,
    })
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let mut t = Table::new(&["x", "t_schedule", "t_physical", "q_bound", "final_infidelity", "filter_cost", "status"]);
    let mut meta = format!(
        "axis={} x_map={} y={} log_log={}",
        r.axis.name(),
        serde_json::to_value(r.fit_spec.x_map).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        r.fit_spec.y_column,
        r.fit_spec.log_log
    );
    if let Some(f) = &r.fit {
        meta.push_str(&format!(
            " slope={} intercept={} r2={}",
            zeno_core::format::sig17(f.slope),
            zeno_core::format::sig17(f.intercept),
            zeno_core::format::sig17(f.r2)
        ));
    }
    t.comment(&meta);
    for p in &r.points {
        t.row(vec![
            p.x.into(),
            p.t_schedule.into(),
            p.t_physical.into(),
            p.q_bound.into(),
            p.final_infidelity.into(),
            p.filter_cost.into(),
            Cell::Text(p.status.clone()),
        ]);
    }
    t.finish()
}

/// Runs the sweep and writes `sweep.csv` and `sweep.json`. The exit code is
/// nonzero when any point failed or no fit could be made.
pub fn cmd_sweep(template: &ExperimentManifest, axis: Axis, values: &[f64]) -> Result<i32> {
    let r = sweep(template, axis, values)?;
    write_text(&template.outputs, "sweep.csv", &sweep_csv(&r))?;
    write_text(&template.outputs, "sweep.json", &to_json(&r)?)?;
    match &r.fit {
        Some(f) => println!(
            "{}: {} points, {} failed, slope {:.4}, r^2 {:.5}",
            axis.name(),
            r.points.len(),
            r.failed,
            f.slope,
            f.r2
        ),
        None => println!("{}: {} points, {} failed, no fit", axis.name(), r.points.len(), r.failed),
    }
    Ok(if r.failed == 0 && r.fit.is_some() { 0 } else { 1 })
}
