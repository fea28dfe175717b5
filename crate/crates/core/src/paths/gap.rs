use serde::{Deserialize, Serialize};

use super::HamiltonianPath;
use crate::error::{invalid, Result, ZenoError};
use crate::quad::{integrate, unit_grid};

/// Numeric gap values are shrunk by this factor so that the piecewise-linear
/// interpolant stays below the true gap between nodes.
pub const NUMERIC_GAP_SAFETY: f64 = 0.99;

const NUMERIC_DERIV_STEP: f64 = 1e-4;
const GAP_CLOSED: f64 = 1e-10;

/// Functional form of a gap lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GapKind {
    /// `sqrt(1 - 4 (1 - M/N) s (1 - s))`, ground eigenvalue `(1 - gap) / 2`.
    AnalyticGrover { marked_fraction: f64 },
    /// `sqrt((1 - s)^2 + (s / kappa)^2)`, tracked eigenvalue 0.
    AnalyticQlsp { kappa: f64 },
    /// Piecewise-linear interpolation of tracked gaps on a grid.
    NumericTracked {
        grid: Vec<f64>,
        gaps: Vec<f64>,
        omega0: Vec<f64>,
    },
    Constant { gap: f64, omega0: f64 },
}

/// `Delta(s)`, `Delta_m` and the tracked eigenvalue `omega0(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapModel {
    pub kind: GapKind,
    pub delta_m: f64,
}

fn interp(grid: &[f64], values: &[f64], s: f64) -> f64 {
    let n = grid.len();
    if s <= grid[0] {
        return values[0];
    }
    if s >= grid[n - 1] {
        return values[n - 1];
    }
    let i = grid.partition_point(|&x| x <= s).min(n - 1).max(1);
    let (x0, x1) = (grid[i - 1], grid[i]);
    let t = (s - x0) / (x1 - x0);
    values[i - 1] * (1.0 - t) + values[i] * t
}

impl GapModel {
    pub fn grover(n: usize, m: usize) -> Self {
        let frac = m as f64 / n as f64;
        Self {
            kind: GapKind::AnalyticGrover {
                marked_fraction: frac,
            },
            delta_m: frac.sqrt(),
        }
    }

    /// `Delta_m = 1/(2 kappa)` for `kappa >= 2`, else the exact minimum.
    pub fn qlsp(kappa: f64) -> Self {
        let delta_m = if kappa >= 2.0 {
            1.0 / (2.0 * kappa)
        } else {
            (1.0 / (kappa * kappa + 1.0)).sqrt()
        };
        Self {
            kind: GapKind::AnalyticQlsp { kappa },
            delta_m,
        }
    }

    pub fn constant(gap: f64, omega0: f64) -> Self {
        Self {
            kind: GapKind::Constant { gap, omega0 },
            delta_m: gap,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GapKind::AnalyticGrover { .. } => "analytic-grover",
            GapKind::AnalyticQlsp { .. } => "analytic-qlsp",
            GapKind::NumericTracked { .. } => "numeric-tracked",
            GapKind::Constant { .. } => "constant",
        }
    }

    pub fn delta(&self, s: f64) -> f64 {
        match &self.kind {
            GapKind::AnalyticGrover { marked_fraction } => {
                (1.0 - 4.0 * (1.0 - marked_fraction) * s * (1.0 - s)).max(0.0).sqrt()
            }
            GapKind::AnalyticQlsp { kappa } => ((1.0 - s).powi(2) + (s / kappa).powi(2)).sqrt(),
            GapKind::NumericTracked { grid, gaps, .. } => interp(grid, gaps, s),
            GapKind::Constant { gap, .. } => *gap,
        }
    }

    /// `Delta'(s)`; analytic where available, central differences otherwise.
    pub fn delta_prime(&self, s: f64) -> f64 {
        match &self.kind {
            GapKind::AnalyticGrover { marked_fraction } => {
                -2.0 * (1.0 - marked_fraction) * (1.0 - 2.0 * s) / self.delta(s)
            }
            GapKind::AnalyticQlsp { kappa } => (s - 1.0 + s / (kappa * kappa)) / self.delta(s),
            GapKind::NumericTracked { .. } => {
                let h = NUMERIC_DERIV_STEP;
                let lo = (s - h).max(0.0);
                let hi = (s + h).min(1.0);
                (self.delta(hi) - self.delta(lo)) / (hi - lo)
            }
            GapKind::Constant { .. } => 0.0,
        }
    }

    /// Tracked eigenvalue `omega0(s)`.
    pub fn omega0(&self, s: f64) -> f64 {
        match &self.kind {
            GapKind::AnalyticGrover { .. } => 0.5 * (1.0 - self.delta(s)),
            GapKind::AnalyticQlsp { .. } => 0.0,
            GapKind::NumericTracked { grid, omega0, .. } => interp(grid, omega0, s),
            GapKind::Constant { omega0, .. } => *omega0,
        }
    }

    /// Location of the gap minimum, where integrands of `1/Delta^p` peak.
    pub fn minimiser(&self) -> Option<f64> {
        match &self.kind {
            GapKind::AnalyticGrover { .. } => Some(0.5),
            GapKind::AnalyticQlsp { kappa } => Some(kappa * kappa / (kappa * kappa + 1.0)),
            GapKind::NumericTracked { grid, gaps, .. } => gaps
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| grid[i]),
            GapKind::Constant { .. } => None,
        }
    }

    /// Quadrature breakpoints for integrands driven by this gap.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.minimiser().into_iter().collect();
        if let Some(m) = self.minimiser() {
            // Nested points around the minimum help the first refinement pass.
            let width = self.delta_m.min(0.25);
            for k in 0..4 {
                let d = width * 4f64.powi(-k);
                pts.push(m - d);
                pts.push(m + d);
            }
        }
        pts.retain(|&x| x > 0.0 && x < 1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Checks `Delta(s) >= Delta_m > 0` and that no other eigenvalue lies
    /// within `Delta(s)` of `omega0(s)`, on a uniform grid.
    pub fn check_against(&self, path: &dyn HamiltonianPath, grid_points: usize) -> Result<()> {
        if !(self.delta_m > 0.0) {
            return Err(invalid("delta_m", "must be positive"));
        }
        for s in unit_grid(grid_points) {
            let d = self.delta(s);
            if d < self.delta_m * (1.0 - 1e-12) {
                return Err(ZenoError::GapClosed { s, gap: d });
            }
            let spec = path.evaluate(s).spectral();
            let w0 = self.omega0(s);
            let (target, dist) = spec.nearest_cluster(w0);
            if dist > 1e-8 {
                return Err(ZenoError::Tracking {
                    s,
                    reason: format!("omega0 = {w0} is not an eigenvalue (nearest at distance {dist:e})"),
                });
            }
            for (i, c) in spec.clusters.iter().enumerate() {
                if i != target && (c.value - w0).abs() < d * (1.0 - 1e-9) {
                    return Err(ZenoError::Tracking {
                        s,
                        reason: format!("eigenvalue {} lies inside the gap window {d}", c.value),
                    });
                }
            }
        }
        Ok(())
    }
}

/// `int_0^1 Delta(s)^{-p} ds` by adaptive Simpson.
pub fn gap_integral(gap: &GapModel, p: f64, rel_tol: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(invalid("p", "must be non-negative"));
    }
    if let GapKind::Constant { gap: g, .. } = gap.kind {
        return Ok(g.powf(-p));
    }
    let r = integrate(|s| gap.delta(s).powf(-p), 0.0, 1.0, &gap.breakpoints(), rel_tol)?;
    Ok(r.value)
}

/// Gap model obtained by following the eigenvalue nearest to `omega0_at_0`
/// along the path by nearest-eigenvalue continuation.
pub fn numeric_gap_model(
    path: &dyn HamiltonianPath,
    omega0_at_0: f64,
    grid_points: usize,
) -> Result<GapModel> {
    if grid_points < 2 {
        return Err(invalid("grid_points", "need at least 2"));
    }
    let grid = unit_grid(grid_points);
    let fallback = 2.0 * path.sup_norm().max(0.5);
    let mut gaps = Vec::with_capacity(grid.len());
    let mut omegas: Vec<f64> = Vec::with_capacity(grid.len());
    let mut tracked_mult = 0;
    for (i, &s) in grid.iter().enumerate() {
        let predicted = match i {
            0 => omega0_at_0,
            1 => omegas[0],
            _ => 2.0 * omegas[i - 1] - omegas[i - 2],
        };
        let spec = path.evaluate(s).spectral();
        let (idx, _) = spec.nearest_cluster(predicted);
        let w = spec.clusters[idx].value;
        let mult = spec.clusters[idx].multiplicity;
        if i > 0 && mult != tracked_mult {
            // Two levels merged (or split) at the tracked eigenvalue.
            return Err(ZenoError::GapClosed { s, gap: 0.0 });
        }
        tracked_mult = mult;
        let g = spec
            .clusters
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, c)| (c.value - w).abs())
            .fold(f64::INFINITY, f64::min);
        if g < GAP_CLOSED {
            return Err(ZenoError::GapClosed { s, gap: g });
        }
        if i > 0 {
            let step = (w - omegas[i - 1]).abs();
            if step > 0.5 * g.min(gaps[i - 1] / NUMERIC_GAP_SAFETY) {
                return Err(ZenoError::Tracking {
                    s,
                    reason: format!("tracked eigenvalue jumped by {step:e}; refine the grid"),
                });
            }
        }
        omegas.push(w);
        gaps.push(NUMERIC_GAP_SAFETY * g.min(fallback));
    }
    let delta_m = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(GapModel {
        kind: GapKind::NumericTracked {
            grid,
            gaps,
            omega0: omegas,
        },
        delta_m,
    })
}
