//! The averaged dynamics `rho' = lambda(s) (P rho P + Q rho Q - rho)`.
//!
//! With `X(rho) = P rho Q + Q rho P` the right-hand side is `-lambda X(rho)`.
//! `X` is an orthogonal projection on matrix space, which makes the stiff
//! regime (large `lambda`) cheap: `(1 + cX)^{-1} = 1 - c/(1+c) X`. Steps use
//! the two-stage Radau IIA method (order 3, L-stable, stiffly accurate) with
//! step-doubling error control.

use serde::{Deserialize, Serialize};

use super::Simulation;
use crate::error::{Result, ZenoError};
use crate::operator::{trace, trace_product, CMat, DensityMatrix};
use crate::paths::{GapModel, HamiltonianPath};
use crate::schedule::Schedule;

/// Allowed local error per unit `s` (Frobenius norm).
pub const DEFAULT_STEP_TOL: f64 = 1e-8;

const MAX_FIXED_POINT_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub step_tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    /// Extra points where the step lands exactly and the fidelity is recorded.
    pub checkpoints: [f64; 4],
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            step_tol: DEFAULT_STEP_TOL,
            h_init: 1e-3,
            h_max: 0.02,
            h_min: 1e-12,
            checkpoints: super::DEFAULT_CHECKPOINTS,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OdeResult {
    /// Final state, lifted back to the full space.
    #[serde(skip)]
    pub rho1: Option<DensityMatrix>,
    pub final_fidelity: f64,
    /// `(s, Tr(P(s) rho(s)))` at every accepted step.
    pub fidelity_trace: Vec<(f64, f64)>,
    pub checkpoints: Vec<(f64, f64)>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Smallest eigenvalue of `rho` seen at any accepted step.
    pub min_eigenvalue: f64,
    /// Largest `|Tr rho - 1|` seen.
    pub trace_deviation: f64,
}

impl OdeResult {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.final_fidelity
    }
}

fn chi(rho: &CMat, p: &CMat) -> CMat {
    let pr = p * rho;
    let rp = rho * p;
    let prp = &pr * p;
    pr + rp - prp.scale(2.0)
}

/// One Radau IIA step from `rho` given `(P, lambda)` at `s + h/3` and `s + h`.
fn radau_step(rho: &CMat, h: f64, p1: &CMat, l1: f64, p2: &CMat, l2: f64) -> Option<CMat> {
    let c11 = h * 5.0 / 12.0 * l1;
    let c12 = -h / 12.0 * l2;
    let c21 = h * 3.0 / 4.0 * l1;
    let c22 = h / 4.0 * l2;
    let r = rho - chi(rho, p1).scale(c21 / (1.0 + c11));
    let gamma = c21 * c12 / (1.0 + c11);
    let a = c22 - gamma;
    let shrink = a / (1.0 + a);
    let solve2 = |x: CMat| {
        let cx = chi(&x, p2);
        x - cx.scale(shrink)
    };
    let mut y = solve2(r.clone());
    if gamma == 0.0 {
        return Some(y);
    }
    for _ in 0..MAX_FIXED_POINT_ITERS {
        let x2 = chi(&y, p2);
        let coupling = chi(&x2, p1) - &x2;
        let next = solve2(&r + coupling.scale(gamma));
        let diff = (&next - &y).norm();
        y = next;
        if diff <= 1e-15 * y.norm().max(1.0) {
            return Some(y);
        }
    }
    None
}

struct Stepper<'s, 'a> {
    sim: &'s Simulation<'a>,
    sched: &'s Schedule,
}

impl Stepper<'_, '_> {
    fn at(&self, s: f64) -> Result<(CMat, f64)> {
        Ok((self.sim.projector(s)?.matrix().clone(), self.sched.lambda(s)))
    }

    fn step(&self, rho: &CMat, s: f64, h: f64, end: &(CMat, f64)) -> Result<Option<CMat>> {
        let (p1, l1) = self.at(s + h / 3.0)?;
        Ok(radau_step(rho, h, &p1, l1, &end.0, end.1))
    }
}

/// Integrates the averaged dynamics from `s = 0` to `1` in the working
/// space of `sim`.
pub fn run_marginal_ode_in(sim: &Simulation, sched: &Schedule, opts: &OdeOptions) -> Result<OdeResult> {
    if !(opts.step_tol > 0.0) {
        return Err(crate::error::invalid("step_tol", "must be positive"));
    }
    let mut rho = sim.initial_state().matrix().clone();
    let p0 = sim.projector(0.0)?;
    let mut trace_out = vec![(0.0, trace_product(p0.matrix(), &rho).re)];
    let mut checkpoints = Vec::new();
    let lift = |m: &CMat| DensityMatrix::new(sim.subspace().lift(m));
    if sched.is_trivial() {
        for &c in &opts.checkpoints {
            let p = sim.projector(c)?;
            checkpoints.push((c, trace_product(p.matrix(), &rho).re));
        }
        let f = sim.final_fidelity(&rho);
        trace_out.push((1.0, f));
        return Ok(OdeResult {
            rho1: lift(&rho).ok(),
            final_fidelity: f,
            fidelity_trace: trace_out,
            checkpoints,
            accepted_steps: 0,
            rejected_steps: 0,
            min_eigenvalue: sim.initial_state().min_eigenvalue(),
            trace_deviation: (sim.initial_state().trace() - 1.0).abs(),
        });
    }
    let stepper = Stepper { sim, sched };
    let mut s = 0.0f64;
    let mut h = opts.h_init.min(opts.h_max);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut min_eig = f64::INFINITY;
    let mut trace_dev = 0.0f64;
    let mut cp_iter = opts.checkpoints.iter().cloned().filter(|&c| c > 0.0).peekable();
    while s < 1.0 {
        let target = cp_iter.peek().cloned().unwrap_or(1.0).min(1.0);
        let (hh, s_next) = if target - (s + h) < 1e-12 {
            (target - s, target)
        } else {
            (h, s + h)
        };
        let end = stepper.at(s_next)?;
        let mid = stepper.at(s + 0.5 * hh)?;
        let big = stepper.step(&rho, s, hh, &end)?;
        let fine = match stepper.step(&rho, s, 0.5 * hh, &mid)? {
            Some(half) => stepper.step(&half, s + 0.5 * hh, 0.5 * hh, &end)?,
            None => None,
        };
        let (big, fine) = match (big, fine) {
            (Some(b), Some(f)) => (b, f),
            _ => {
                rejected += 1;
                h = 0.5 * hh;
                if h < opts.h_min {
                    return Err(ZenoError::StepUnderflow { s });
                }
                continue;
            }
        };
        let err = (&big - &fine).norm() / 7.0;
        let allowed = opts.step_tol * hh;
        if err <= allowed {
            rho = crate::operator::hermitize(&fine);
            s = s_next;
            accepted += 1;
            let p = &end.0;
            trace_out.push((s, trace_product(p, &rho).re));
            trace_dev = trace_dev.max((trace(&rho).re - 1.0).abs());
            let eig_min = rho
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            min_eig = min_eig.min(eig_min);
            if cp_iter.peek() == Some(&s) {
                checkpoints.push((s, trace_out.last().unwrap().1));
                cp_iter.next();
            }
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (allowed / err).powf(1.0 / 3.0)).clamp(0.2, 4.0)
        };
        h = (hh * factor).min(opts.h_max);
        if h < opts.h_min {
            return Err(ZenoError::StepUnderflow { s });
        }
    }
    if checkpoints.last().map(|c| c.0) != Some(1.0) && opts.checkpoints.contains(&1.0) {
        checkpoints.push((1.0, sim.final_fidelity(&rho)));
    }
    let final_fidelity = sim.final_fidelity(&rho);
    Ok(OdeResult {
        rho1: lift(&rho).ok(),
        final_fidelity,
        fidelity_trace: trace_out,
        checkpoints,
        accepted_steps: accepted,
        rejected_steps: rejected,
        min_eigenvalue: min_eig,
        trace_deviation: trace_dev,
    })
}

/// Averaged dynamics from `rho0`, reduced to the invariant subspace of the
/// initial state.
pub fn run_marginal_ode(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    sched: &Schedule,
    rho0: &DensityMatrix,
    step_tol: f64,
) -> Result<OdeResult> {
    let sim = Simulation::new(path, gap, rho0)?;
    run_marginal_ode_in(
        &sim,
        sched,
        &OdeOptions {
            step_tol,
            ..Default::default()
        },
    )
}
