//! Query-complexity accounting when each `e^{-i tau H}` is itself simulated
//! with error `delta(s)` from a block encoding.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;

use super::{
    adaptive_constants, b3_constant, check_eps, constant_rate_constant, quad, DerivativeSource,
    Schedule, ScheduleConstants, ScheduleKind, T0,
};
use crate::error::{invalid, Result};
use crate::paths::{gap_integral, GapModel, HamiltonianPath};
use crate::quad::DEFAULT_REL_TOL;

/// Constant in the Hamiltonian-simulation call count, `4 / (sqrt(2 pi) e^(1/13))`.
pub const CALL_COUNT_C: f64 = 1.47762;

/// Calls to the block encoding (and its inverse) needed to simulate
/// `e^{-itH}` to error `delta`: `3 ceil((e/2) alpha |t| + ln(2c/delta))`.
pub fn evolution_call_count(alpha: f64, t: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    let inner = 0.5 * E * alpha * t.abs() + (2.0 * CALL_COUNT_C / delta).ln();
    Ok(3 * inner.ceil().max(0.0) as u64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryCostModel {
    /// Block-encoding normalisation, at least `sup ||H(s)||` and at least 1.
    pub alpha: f64,
    pub t0: f64,
    pub c: f64,
    /// `delta(s) = delta_coeff / lambda(s)`.
    pub delta_coeff: f64,
    pub schedule: Schedule,
}

impl QueryCostModel {
    pub fn delta(&self, s: f64) -> f64 {
        self.delta_coeff / self.schedule.lambda(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitParams {
    pub schedule: Schedule,
    pub cost: QueryCostModel,
    /// Closed-form upper bound on the expected query count.
    pub q_bound: f64,
    /// For the constant rate, the closed form with a single `ln(lambda) + 1`
    /// term (clamped at 0). It undershoots the query integral when
    /// `lambda > 1` and is kept only for comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_bound_single_log: Option<f64>,
}

/// `max(1, sup_s ||H(s)||)`, the block-encoding normalisation.
pub fn circuit_alpha(path: &dyn HamiltonianPath) -> f64 {
    path.sup_norm().max(1.0)
}

/// Constant rate `lambda = 2B/eps`, `delta = 4 eps / (27 lambda)`.
pub fn circuit_constant_params(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    eps: f64,
) -> Result<CircuitParams> {
    check_eps(eps)?;
    let b = constant_rate_constant(path, gap)?;
    let lambda = 2.0 * b / eps;
    let schedule = Schedule::build(
        ScheduleKind::Constant,
        eps,
        None,
        ScheduleConstants {
            b: Some(b),
            ..Default::default()
        },
        lambda,
        DerivativeSource::AnalyticBound,
        gap,
    );
    let alpha = circuit_alpha(path);
    let cost = QueryCostModel {
        alpha,
        t0: T0,
        c: CALL_COUNT_C,
        delta_coeff: 4.0 * eps / 27.0,
        schedule: schedule.clone(),
    };
    let (q_bound, single) = if lambda == 0.0 {
        (0.0, 0.0)
    } else {
        let inv = gap_integral(gap, 1.0, DEFAULT_REL_TOL * 1e-2)?;
        let common = E * alpha * T0 * 1.5 * inv + 3.0 * (27.0 * CALL_COUNT_C / (2.0 * eps)).ln();
        (
            lambda * (common + 3.0 * (lambda.ln() + 1.0)),
            lambda * (common + (lambda.ln() + 1.0).max(0.0)),
        )
    };
    Ok(CircuitParams {
        schedule,
        cost,
        q_bound,
        q_bound_single_log: Some(single),
    })
}

/// Adaptive circuit parameters from known constants (`c`, `b1`, `b3` required).
pub fn circuit_adaptive_with_constants(
    gap: &GapModel,
    eps: f64,
    q: f64,
    constants: ScheduleConstants,
    alpha: f64,
) -> Result<CircuitParams> {
    check_eps(eps)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid("q", "must lie in (0, 1]"));
    }
    let need = |v: Option<f64>, what: &'static str| v.ok_or_else(|| invalid("constants", what));
    let c = need(constants.c, "missing C")?;
    let b1 = need(constants.b1, "missing B1")?;
    let b3 = need(constants.b3, "missing B3")?;
    let schedule = Schedule::build(
        ScheduleKind::Adaptive,
        eps,
        Some(q),
        constants,
        2.0 * c / eps,
        DerivativeSource::AnalyticBound,
        gap,
    );
    let cost = QueryCostModel {
        alpha,
        t0: T0,
        c: CALL_COUNT_C,
        delta_coeff: 2.0 * eps / 15.0,
        schedule: schedule.clone(),
    };
    let q_bound = (12.0 * c * (1.0 / eps).ln()
        + 3.0 * E * alpha * T0 * c * b1
        + 6.0 * (15.0 * CALL_COUNT_C).ln() * c
        + 12.0 * c * c * b3)
        / (eps * gap.delta_m);
    Ok(CircuitParams {
        schedule,
        cost,
        q_bound,
        q_bound_single_log: None,
    })
}

/// Adaptive rate `lambda = 2C/(eps Delta^q Delta_m^(1-q))`, `delta = 2 eps/(15 lambda)`.
pub fn circuit_adaptive_params(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    eps: f64,
    q: f64,
) -> Result<CircuitParams> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid("q", "must lie in (0, 1]"));
    }
    let mut constants = adaptive_constants(path, gap, q)?;
    constants.b3 = Some(b3_constant(gap, q)?);
    circuit_adaptive_with_constants(gap, eps, q, constants, circuit_alpha(path))
}

/// Expected query count `3 int (e alpha t0/(2 Delta) + ln(2c/delta) + 1) lambda ds`.
pub fn query_integral(model: &QueryCostModel, gap: &GapModel) -> Result<f64> {
    if model.schedule.is_trivial() {
        return Ok(0.0);
    }
    let v = quad(
        |s| {
            let lam = model.schedule.lambda(s);
            (E * model.alpha * model.t0 / (2.0 * gap.delta(s)) + (2.0 * model.c / model.delta(s)).ln() + 1.0)
                * lam
        },
        gap,
    )?;
    Ok(3.0 * v)
}
