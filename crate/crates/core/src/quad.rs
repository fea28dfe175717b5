//! Adaptive Simpson quadrature with interval bisection.

use crate::error::{Result, ZenoError};

/// Default relative tolerance for gap integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]`. `breakpoints` inside the interval become
/// panel edges (place them at peaks of the integrand). The result is
/// accepted when the estimated error is below `rel_tol * |value|`
/// (with an absolute floor of `rel_tol * 1e-3`).
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], rel_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut edges: Vec<f64> = vec![a, b];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut panels = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let step = (hi - lo) / INITIAL_PANELS as f64;
        for k in 0..INITIAL_PANELS {
            let pa = lo + step * k as f64;
            let pb = if k + 1 == INITIAL_PANELS { hi } else { pa + step };
            let (fa, fm, fb) = (f(pa), f(0.5 * (pa + pb)), f(pb));
            panels.push(Panel {
                a: pa,
                b: pb,
                fa,
                fm,
                fb,
                whole: simpson(pa, pb, fa, fm, fb),
            });
        }
    }
    let rough: f64 = panels.iter().map(|p| p.whole).sum();
    if !rough.is_finite() {
        return Err(ZenoError::Quadrature {
            estimate: rough,
            error: f64::INFINITY,
        });
    }
    let tol = rel_tol * rough.abs().max(1e-3);
    let width = b - a;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut failed = false;
    for p in panels {
        let share = tol * (p.b - p.a) / width;
        let (v, e, ok) = refine(&f, p, share, 0);
        value += v;
        error += e;
        failed |= !ok;
    }
    if failed || !value.is_finite() {
        return Err(ZenoError::Quadrature {
            estimate: value,
            error,
        });
    }
    Ok(QuadResult { value, error })
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> (f64, f64, bool) {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0, true);
    }
    if depth >= MAX_DEPTH || !delta.is_finite() {
        return (left + right + delta / 15.0, delta.abs() / 15.0, false);
    }
    let lp = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let rp = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    let (lv, le, lok) = refine(f, lp, 0.5 * tol, depth + 1);
    let (rv, re, rok) = refine(f, rp, 0.5 * tol, depth + 1);
    (lv + rv, le + re, lok && rok)
}

/// Composite Simpson on a uniform grid of `2 * half_panels` intervals.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, half_panels: usize) -> f64 {
    let n = 2 * half_panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Maximum of `f` on a uniform grid of `points` nodes over `[0, 1]`.
pub fn grid_sup<F: Fn(f64) -> f64>(f: F, points: usize) -> f64 {
    let n = points.max(2);
    (0..n)
        .map(|i| f(i as f64 / (n - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Uniform grid of `points` nodes on `[0, 1]`.
pub fn unit_grid(points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}
