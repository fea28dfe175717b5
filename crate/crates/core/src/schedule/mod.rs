//! Poisson rate schedules `lambda(s)` together with the constants they are
//! built from and their time costs.

mod circuit;

pub use circuit::{
    circuit_adaptive_params, circuit_adaptive_with_constants, circuit_alpha, circuit_constant_params,
    evolution_call_count, query_integral, CircuitParams, QueryCostModel, CALL_COUNT_C,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operator::{fd_projector_derivatives, TrackerState};
use crate::paths::{gap_integral, GapModel, HamiltonianPath, SUP_GRID_POINTS};
use crate::quad::{composite_simpson, grid_sup, integrate, unit_grid, DEFAULT_REL_TOL};

/// Expected `|tau|` of a dephasing step is `T0 / Delta`.
pub const T0: f64 = 2.32132;

/// Inflation applied to grid suprema so that they bound the true supremum.
pub const SUP_INFLATION: f64 = 1.001;

pub const TABULATION_POINTS: usize = 1025;

/// Half-panels of the composite Simpson rule used with measured derivatives.
const FD_HALF_PANELS: usize = 256;
const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    Adaptive,
}

/// How `||P'||` and `||P''||` enter the constants and the error bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    /// `||P'|| <= 2||H'||/Delta`, `||P''|| <= 8||H'||^2/Delta^2 + 2||H''||/Delta`.
    AnalyticBound,
    /// Finite differences of the tracked projector, plus their error estimates.
    FdMeasured,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b3: Option<f64>,
}

impl ScheduleConstants {
    /// Entry-wise maximum, used to make constants uniform over a family of
    /// instances.
    pub fn max(&self, other: &Self) -> Self {
        let m = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        };
        Self {
            b: m(self.b, other.b),
            c: m(self.c, other.c),
            b1: m(self.b1, other.b1),
            b2: m(self.b2, other.b2),
            b3: m(self.b3, other.b3),
        }
    }
}

/// A rate `lambda(s)`: either constant, or
/// `prefactor / (Delta(s)^q Delta_m^(1-q))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub epsilon: f64,
    pub q: Option<f64>,
    pub constants: ScheduleConstants,
    /// The constant rate, or the numerator of the adaptive rate.
    pub prefactor: f64,
    pub derivative_source: DerivativeSource,
    pub gap: GapModel,
    /// `(s, lambda(s))` on a uniform grid, for reproducible manifests.
    pub tabulation: Vec<(f64, f64)>,
}

impl Schedule {
    fn build(
        kind: ScheduleKind,
        epsilon: f64,
        q: Option<f64>,
        constants: ScheduleConstants,
        prefactor: f64,
        derivative_source: DerivativeSource,
        gap: &GapModel,
    ) -> Self {
        let mut sched = Self {
            kind,
            epsilon,
            q,
            constants,
            prefactor,
            derivative_source,
            gap: gap.clone(),
            tabulation: Vec::new(),
        };
        sched.tabulation = unit_grid(TABULATION_POINTS)
            .into_iter()
            .map(|s| (s, sched.lambda(s)))
            .collect();
        sched
    }

    /// Constant rate `lambda`, bypassing the derived constants.
    pub fn constant(lambda: f64, epsilon: f64, gap: &GapModel) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda", "must be finite and non-negative"));
        }
        Ok(Self::build(
            ScheduleKind::Constant,
            epsilon,
            None,
            ScheduleConstants::default(),
            lambda,
            DerivativeSource::AnalyticBound,
            gap,
        ))
    }

    /// Adaptive rate from already known constants (`constants.c` is required).
    /// Sweeps use this with constants maximised over the family.
    pub fn adaptive_with_constants(
        gap: &GapModel,
        epsilon: f64,
        q: f64,
        constants: ScheduleConstants,
    ) -> Result<Self> {
        check_eps(epsilon)?;
        check_q(q)?;
        let c = constants
            .c
            .ok_or_else(|| invalid("constants", "adaptive schedule needs C"))?;
        Ok(Self::build(
            ScheduleKind::Adaptive,
            epsilon,
            Some(q),
            constants,
            c / epsilon,
            DerivativeSource::AnalyticBound,
            gap,
        ))
    }

    /// The same schedule with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::build(
            self.kind,
            self.epsilon,
            self.q,
            self.constants,
            self.prefactor * factor,
            self.derivative_source,
            &self.gap,
        )
    }

    pub fn lambda(&self, s: f64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.prefactor,
            ScheduleKind::Adaptive => {
                let q = self.q.unwrap_or(0.0);
                self.prefactor / (self.gap.delta(s).powf(q) * self.gap.delta_m.powf(1.0 - q))
            }
        }
    }

    /// `(1/lambda)'(s)`.
    pub fn inverse_lambda_prime(&self, s: f64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => 0.0,
            ScheduleKind::Adaptive => {
                let q = self.q.unwrap_or(0.0);
                if q == 0.0 || self.prefactor == 0.0 {
                    return 0.0;
                }
                q * self.gap.delta(s).powf(q - 1.0) * self.gap.delta_prime(s)
                    * self.gap.delta_m.powf(1.0 - q)
                    / self.prefactor
            }
        }
    }

    /// Zero rate: the path does not move the target and nothing needs doing.
    pub fn is_trivial(&self) -> bool {
        self.prefactor == 0.0
    }

    /// Upper bound of `lambda` over `[0, 1]`.
    pub fn lambda_max(&self) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.prefactor,
            // Delta >= Delta_m, so the adaptive rate peaks at prefactor / Delta_m.
            ScheduleKind::Adaptive => self.prefactor / self.gap.delta_m,
        }
    }

    /// `int_0^1 lambda ds`, the expected number of jumps.
    pub fn integral(&self) -> Result<f64> {
        if self.kind == ScheduleKind::Constant {
            return Ok(self.prefactor);
        }
        let q = self.q.unwrap_or(0.0);
        let g = gap_integral(&self.gap, q, DEFAULT_REL_TOL * 1e-2)?;
        Ok(self.prefactor * self.gap.delta_m.powf(q - 1.0) * g)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(invalid("epsilon", "must lie in (0, 1)"))
    }
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(invalid("q", "must lie in [0, 1]"))
    }
}

fn quad(f: impl Fn(f64) -> f64, gap: &GapModel) -> Result<f64> {
    Ok(integrate(f, 0.0, 1.0, &gap.breakpoints(), DEFAULT_REL_TOL * 1e-2)?.value)
}

/// `B = 2(||H'(0)||/Delta(0) + ||H'(1)||/Delta(1) + int 4||H'||^2/Delta^2 + ||H''||/Delta)`.
pub fn constant_rate_constant(path: &dyn HamiltonianPath, gap: &GapModel) -> Result<f64> {
    let ends = path.d1_norm(0.0) / gap.delta(0.0) + path.d1_norm(1.0) / gap.delta(1.0);
    let linear = path.is_linear();
    let integral = if linear {
        let h1 = path.d1_norm(0.0);
        4.0 * h1 * h1 * gap_integral(gap, 2.0, DEFAULT_REL_TOL * 1e-2)?
    } else {
        quad(
            |s| {
                let d = gap.delta(s);
                let h1 = path.d1_norm(s);
                4.0 * h1 * h1 / (d * d) + path.d2_norm(s) / d
            },
            gap,
        )?
    };
    Ok(2.0 * (ends + integral))
}

/// Projector-derivative norms measured by finite differences, inflated by
/// their error estimates.
fn measured_norms(path: &dyn HamiltonianPath, gap: &GapModel, s: f64) -> Result<(f64, f64)> {
    let d = fd_projector_derivatives(path, s, FD_STEP, &TrackerState::from_gap(gap, s))?;
    Ok((d.d1_norm() + d.d1_err, d.d2_norm() + d.d2_err))
}

fn measured_table(path: &dyn HamiltonianPath, gap: &GapModel) -> Result<Vec<(f64, f64, f64)>> {
    let n = 2 * FD_HALF_PANELS + 1;
    unit_grid(n)
        .into_iter()
        .map(|s| measured_norms(path, gap, s).map(|(a, b)| (s, a, b)))
        .collect()
}

fn simpson_table(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    let h = 1.0 / n as f64;
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    acc * h / 3.0
}

/// Constant rate large enough for final infidelity at most `eps`.
///
/// With [`DerivativeSource::AnalyticBound`] this is `lambda = B/eps`. With
/// measured derivatives the constant is `||P'(0)|| + ||P'(1)|| + int ||P''||`,
/// the quantity the analytic derivative bounds majorise.
pub fn constant_rate(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    eps: f64,
    derivative_source: DerivativeSource,
) -> Result<Schedule> {
    check_eps(eps)?;
    let b = match derivative_source {
        DerivativeSource::AnalyticBound => constant_rate_constant(path, gap)?,
        DerivativeSource::FdMeasured => {
            let table = measured_table(path, gap)?;
            let p2: Vec<f64> = table.iter().map(|r| r.2).collect();
            table[0].1 + table[table.len() - 1].1 + simpson_table(&p2)
        }
    };
    Ok(Schedule::build(
        ScheduleKind::Constant,
        eps,
        None,
        ScheduleConstants {
            b: Some(b),
            ..Default::default()
        },
        b / eps,
        derivative_source,
        gap,
    ))
}

/// `B1 = Delta_m^q int Delta^-(1+q)`, `B2 = Delta_m^(1-q) int Delta^-(2-q)` and
/// `C = 2 sup(2||H'|| + 4||H'||^2 B2 + ||H''|| + q|Delta'| ||H'|| B2)`,
/// the supremum taken on a grid and inflated.
pub fn adaptive_constants(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    q: f64,
) -> Result<ScheduleConstants> {
    check_q(q)?;
    let dm = gap.delta_m;
    let b1 = dm.powf(q) * gap_integral(gap, 1.0 + q, DEFAULT_REL_TOL * 1e-2)?;
    let b2 = dm.powf(1.0 - q) * gap_integral(gap, 2.0 - q, DEFAULT_REL_TOL * 1e-2)?;
    let sup = grid_sup(
        |s| {
            let h1 = path.d1_norm(s);
            2.0 * h1 + 4.0 * h1 * h1 * b2 + path.d2_norm(s) + q * gap.delta_prime(s).abs() * h1 * b2
        },
        SUP_GRID_POINTS,
    );
    Ok(ScheduleConstants {
        c: Some(2.0 * sup * SUP_INFLATION),
        b1: Some(b1),
        b2: Some(b2),
        ..Default::default()
    })
}

/// `B3 = Delta_m^(2q-1) int Delta^-2q`.
pub fn b3_constant(gap: &GapModel, q: f64) -> Result<f64> {
    Ok(gap.delta_m.powf(2.0 * q - 1.0) * gap_integral(gap, 2.0 * q, DEFAULT_REL_TOL * 1e-2)?)
}

/// `lambda = C / (eps Delta^q Delta_m^(1-q))` with per-instance constants.
pub fn adaptive_rate(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    eps: f64,
    q: f64,
) -> Result<Schedule> {
    check_eps(eps)?;
    let constants = adaptive_constants(path, gap, q)?;
    Schedule::adaptive_with_constants(gap, eps, q, constants)
}

/// Expected cost in schedule units (`int lambda/Delta`) and in physical
/// evolution time (`T0` times that).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCost {
    pub t_schedule: f64,
    pub t_physical: f64,
}

pub fn expected_cost(sched: &Schedule, gap: &GapModel) -> Result<ExpectedCost> {
    if sched.is_trivial() {
        return Ok(ExpectedCost {
            t_schedule: 0.0,
            t_physical: 0.0,
        });
    }
    let t = match (sched.kind, &gap.kind) {
        (ScheduleKind::Constant, crate::paths::GapKind::Constant { gap: g, .. }) => {
            sched.prefactor / g
        }
        _ => quad(|s| sched.lambda(s) / gap.delta(s), gap)?,
    };
    Ok(ExpectedCost {
        t_schedule: t,
        t_physical: T0 * t,
    })
}

/// Right-hand side of the infidelity bound
/// `||P'(0)||/lambda(0) + ||P'(1)||/lambda(1) + int ||P''||/lambda + |(1/lambda)'| ||P'||`.
pub fn error_bound(
    path: &dyn HamiltonianPath,
    sched: &Schedule,
    gap: &GapModel,
    derivative_source: DerivativeSource,
) -> Result<f64> {
    let div = |x: f64, lam: f64| if x == 0.0 { 0.0 } else { x / lam };
    match derivative_source {
        DerivativeSource::AnalyticBound => {
            let p1 = |s: f64| 2.0 * path.d1_norm(s) / gap.delta(s);
            let p2 = |s: f64| {
                let d = gap.delta(s);
                let h1 = path.d1_norm(s);
                8.0 * h1 * h1 / (d * d) + 2.0 * path.d2_norm(s) / d
            };
            let ends = div(p1(0.0), sched.lambda(0.0)) + div(p1(1.0), sched.lambda(1.0));
            let body = quad(
                |s| div(p2(s), sched.lambda(s)) + sched.inverse_lambda_prime(s).abs() * p1(s),
                gap,
            )?;
            Ok(ends + body)
        }
        DerivativeSource::FdMeasured => {
            let table = measured_table(path, gap)?;
            let last = table.len() - 1;
            let ends = div(table[0].1, sched.lambda(0.0)) + div(table[last].1, sched.lambda(1.0));
            let integrand: Vec<f64> = table
                .iter()
                .map(|&(s, p1, p2)| div(p2, sched.lambda(s)) + sched.inverse_lambda_prime(s).abs() * p1)
                .collect();
            Ok(ends + simpson_table(&integrand))
        }
    }
}

/// `int_0^1 lambda(s) ds` by a fine composite rule; used as an independent
/// check on [`Schedule::integral`].
pub fn lambda_integral_simpson(sched: &Schedule, half_panels: usize) -> f64 {
    composite_simpson(|s| sched.lambda(s), 0.0, 1.0, half_panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;
    use crate::paths::{grover_path, linear_path, qlsp_path, GroverProblem, QlspProblem};

    fn constant_path() -> (crate::paths::LinearPath, GapModel) {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        (linear_path(h.clone(), h).unwrap(), GapModel::constant(1.0, 0.0))
    }

    #[test]
    fn constant_path_needs_no_jumps() {
        let (p, g) = constant_path();
        let s = constant_rate(&p, &g, 0.1, DerivativeSource::AnalyticBound).unwrap();
        assert_eq!(s.constants.b, Some(0.0));
        assert!(s.is_trivial());
        assert_eq!(error_bound(&p, &s, &g, DerivativeSource::AnalyticBound).unwrap(), 0.0);
        assert_eq!(expected_cost(&s, &g).unwrap().t_schedule, 0.0);
    }

    #[test]
    fn doubling_eps_halves_lambda() {
        let (p, g) = grover_path(&GroverProblem::new(16, 1).unwrap()).unwrap();
        let a = constant_rate(&p, &g, 0.1, DerivativeSource::AnalyticBound).unwrap();
        let b = constant_rate(&p, &g, 0.2, DerivativeSource::AnalyticBound).unwrap();
        assert!((a.lambda(0.3) / b.lambda(0.7) - 2.0).abs() < 1e-12);
    }

    /// Grover: ||H'|| = sqrt(1 - 1/N), H'' = 0, and int Delta^-2 has the
    /// closed form atan(sqrt((1-m)/m)) / sqrt(m(1-m)) with m = M/N.
    #[test]
    fn grover_constant_matches_closed_form() {
        let n = 64.0;
        let m: f64 = 1.0 / n;
        let (p, g) = grover_path(&GroverProblem::new(64, 1).unwrap()).unwrap();
        let h1 = (1.0 - m).sqrt();
        let int2 = ((1.0 - m) / m).sqrt().atan() / (m * (1.0 - m)).sqrt();
        let b = 2.0 * (2.0 * h1 + 4.0 * h1 * h1 * int2);
        let got = constant_rate_constant(&p, &g).unwrap();
        assert!((got - b).abs() / b < 1e-9, "{got} vs {b}");
    }

    #[test]
    fn constant_schedule_meets_its_own_bound() {
        let (p, g) = grover_path(&GroverProblem::new(16, 1).unwrap()).unwrap();
        for eps in [0.3, 0.1, 0.03] {
            let s = constant_rate(&p, &g, eps, DerivativeSource::AnalyticBound).unwrap();
            let bound = error_bound(&p, &s, &g, DerivativeSource::AnalyticBound).unwrap();
            assert!(bound <= eps * (1.0 + 1e-9), "{bound} > {eps}");
        }
    }

    #[test]
    fn measured_bound_below_analytic_bound() {
        let (p, g) = grover_path(&GroverProblem::new(16, 1).unwrap()).unwrap();
        let s = adaptive_rate(&p, &g, 0.1, 0.5).unwrap();
        let fd = error_bound(&p, &s, &g, DerivativeSource::FdMeasured).unwrap();
        let l4 = error_bound(&p, &s, &g, DerivativeSource::AnalyticBound).unwrap();
        assert!(fd <= l4, "{fd} > {l4}");
        let c = constant_rate(&p, &g, 0.1, DerivativeSource::FdMeasured).unwrap();
        let c4 = constant_rate(&p, &g, 0.1, DerivativeSource::AnalyticBound).unwrap();
        assert!(c.lambda(0.5) < c4.lambda(0.5));
    }

    #[test]
    fn constant_gap_makes_adaptive_rate_flat() {
        let h0 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let h1 = HermitianOperator::from_real_diagonal(&[0.0, 2.0]);
        let p = linear_path(h0, h1).unwrap();
        let g = GapModel::constant(1.0, 0.0);
        let c = adaptive_constants(&p, &g, 0.5).unwrap().c.unwrap();
        for q in [0.0, 0.5, 1.0] {
            let s = adaptive_rate(&p, &g, 0.1, q).unwrap();
            for x in [0.0, 0.4, 1.0] {
                assert!((s.lambda(x) - c / 0.1).abs() < 1e-9 * s.lambda(x));
            }
        }
    }

    #[test]
    fn adaptive_cost_below_closed_form_bound() {
        let (p, g) = grover_path(&GroverProblem::new(64, 1).unwrap()).unwrap();
        let s = adaptive_rate(&p, &g, 0.1, 0.5).unwrap();
        let t = expected_cost(&s, &g).unwrap().t_schedule;
        let k = s.constants;
        let bound = k.b1.unwrap() * k.c.unwrap() / (0.1 * g.delta_m);
        assert!(t <= bound * (1.0 + 1e-9));
        assert!((expected_cost(&s, &g).unwrap().t_physical / t - T0).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_constants_hold_with_equality() {
        let g = GapModel::qlsp(20.0);
        let inst = qlsp_path(&QlspProblem::diagonal_test(20.0).unwrap()).unwrap();
        let q = 0.75;
        let k = adaptive_constants(&inst.path, &g, q).unwrap();
        let oracle = |p: f64| composite_simpson(|s| g.delta(s).powf(-p), 0.0, 1.0, 400_000);
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        assert!(rel(k.b1.unwrap() * g.delta_m.powf(-q), oracle(1.0 + q)) < 1e-8);
        assert!(rel(k.b2.unwrap() * g.delta_m.powf(q - 1.0), oracle(2.0 - q)) < 1e-8);
        assert!(rel(b3_constant(&g, q).unwrap() * g.delta_m.powf(1.0 - 2.0 * q), oracle(2.0 * q)) < 1e-8);
    }

    #[test]
    fn adaptive_peak_sits_at_gap_minimum() {
        let kappa = 20.0;
        let inst = qlsp_path(&QlspProblem::diagonal_test(kappa).unwrap()).unwrap();
        let s = adaptive_rate(&inst.path, &inst.gap, 0.1, 0.5).unwrap();
        let grid = unit_grid(1025);
        let argmax = grid.iter().cloned().max_by(|a, b| s.lambda(*a).total_cmp(&s.lambda(*b))).unwrap();
        let argmin = grid
            .iter()
            .cloned()
            .min_by(|a, b| inst.gap.delta(*a).total_cmp(&inst.gap.delta(*b)))
            .unwrap();
        assert_eq!(argmax, argmin);
        assert!((argmax - kappa * kappa / (kappa * kappa + 1.0)).abs() < 1.0 / 1024.0);
    }

    #[test]
    fn lambda_integral_agrees_with_simpson() {
        let (p, g) = grover_path(&GroverProblem::new(256, 1).unwrap()).unwrap();
        let s = adaptive_rate(&p, &g, 0.1, 0.75).unwrap();
        let a = s.integral().unwrap();
        let b = lambda_integral_simpson(&s, 200_000);
        assert!((a - b).abs() / b < 1e-7);
    }

    #[test]
    fn rejects_bad_parameters() {
        let (p, g) = constant_path();
        assert!(constant_rate(&p, &g, 0.0, DerivativeSource::AnalyticBound).is_err());
        assert!(constant_rate(&p, &g, 1.0, DerivativeSource::AnalyticBound).is_err());
        assert!(adaptive_rate(&p, &g, 0.1, 1.5).is_err());
        assert!(adaptive_rate(&p, &g, 0.1, -0.1).is_err());
    }

    #[test]
    fn serialises_with_tabulation() {
        let (p, g) = grover_path(&GroverProblem::new(16, 1).unwrap()).unwrap();
        let s = adaptive_rate(&p, &g, 0.1, 0.5).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: Schedule = serde_json::from_str(&json).unwrap();
        assert_eq!(back.tabulation.len(), TABULATION_POINTS);
        assert_eq!(back.lambda(0.3), s.lambda(0.3));
        assert!(json.contains("\"kind\":\"adaptive\""));
    }
}
