//! Eigenstate filtering with Dolph-Chebyshev windows.
//!
//! A window of half-width `n` is a symmetric, nonnegative sequence `w_k`
//! summing to one. Its response `A(w) = sum_k w_k e^{-ikw}` equals one at the
//! target frequency and is at most `sqrt(eps)` on `[delta, pi]`, so applying
//! `A(H - omega0)` as a spectral channel suppresses every component outside
//! the target eigenspace.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::engine::rng::{substream, ZenoRng};
use crate::error::invalid;
use crate::format::sig17;
use crate::operator::{trace, C64, DensityMatrix, HermitianOperator};
use crate::{Result, ZenoError};

/// Retries allowed in [`filter_until_success`] before giving up.
pub const RETRY_CAP: usize = 1000;
/// Coefficients below this are treated as genuinely negative.
pub const NEGATIVITY_ABORT: f64 = -1e-9;
const RIPPLE_SLACK: f64 = 1e-6;
const SUCCESS_FLOOR: f64 = 1e-12;

/// Result of the window-size formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSize {
    pub n: usize,
    /// `acosh(1/sqrt(eps)) / acosh(sec(delta))` before rounding.
    pub exact: f64,
    /// `log(4/eps) / (2 delta)`.
    pub bound: f64,
}

fn check_band(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(invalid("delta", format!("stop-band edge must lie in (0, pi/2), got {delta}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("epsilon", format!("must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

pub fn window_size(delta: f64, eps: f64) -> Result<WindowSize> {
    check_band(delta)?;
    check_eps(eps)?;
    let exact = (1.0 / eps.sqrt()).acosh() / (1.0 / delta.cos()).acosh();
    let bound = (4.0 / eps).ln() / (2.0 * delta);
    if exact > bound * (1.0 + 1e-12) {
        return Err(invalid("delta", format!("size {exact} exceeds its analytic bound {bound}")));
    }
    let n = ((exact - 1e-9).ceil() as usize).max(1);
    Ok(WindowSize { n, exact, bound })
}

/// Chebyshev polynomial of the first kind, valid for any real argument.
fn cheb_t(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    if x.abs() <= 1.0 {
        (nf * x.acos()).cos()
    } else if x > 1.0 {
        (nf * x.acosh()).cosh()
    } else {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (nf * (-x).acosh()).cosh()
    }
}

/// Ripple of the optimal window of half-width `n` with stop-band edge `delta`.
pub fn chebyshev_ripple(n: usize, delta: f64) -> f64 {
    let half = (delta / 2.0).cos();
    let x = 2.0 / (half * half) - 1.0;
    1.0 / cheb_t(n, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterWindow {
    pub n: usize,
    /// `w_{-n}, ..., w_n`.
    pub coefficients: Vec<f64>,
    pub delta_band: f64,
    pub epsilon_target: f64,
    /// Largest `|A(w)|` found on `[delta, pi]`.
    pub realised_ripple: f64,
    /// Number of tiny negative coefficients zeroed during synthesis.
    pub clamped: usize,
}

impl FilterWindow {
    pub fn coefficient(&self, k: i64) -> f64 {
        let idx = k + self.n as i64;
        if idx < 0 || idx as usize >= self.coefficients.len() {
            0.0
        } else {
            self.coefficients[idx as usize]
        }
    }

    /// `A(w)`, evaluated by Clenshaw recurrence on the cosine series.
    pub fn response(&self, omega: f64) -> f64 {
        let n = self.n;
        let c = omega.cos();
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..=n).rev() {
            let b0 = 2.0 * self.coefficients[n + k] + 2.0 * c * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coefficients[n] + c * b1 - b2
    }

    /// Maximum of `|A|` on `[lo, pi]` over a uniform grid plus the
    /// equiripple extremal points of the Chebyshev design.
    pub fn stopband_max(&self, lo: f64, grid: usize) -> f64 {
        let mut best: f64 = 0.0;
        let grid = grid.max(2);
        for i in 0..=grid {
            let w = lo + (PI - lo) * i as f64 / grid as f64;
            best = best.max(self.response(w).abs());
        }
        let (alpha, beta) = warp(self.delta_band);
        for j in 0..=self.n {
            let x = ((j as f64 * PI / self.n as f64).cos() - beta) / alpha;
            if (-1.0..=1.0).contains(&x) {
                let w = x.acos();
                if w >= lo {
                    best = best.max(self.response(w).abs());
                }
            }
        }
        best
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// LCU cost of applying this window once with unit step time.
    pub fn cost(&self) -> f64 {
        lcu_cost(self.n, 1.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,w\n");
        for (i, w) in self.coefficients.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i as i64 - self.n as i64, sig17(*w)));
        }
        out
    }

    /// Samples of `(w, |A(w)|)` on `[0, pi]`, for plotting.
    pub fn response_csv(&self, points: usize) -> String {
        let mut out = String::from("omega,magnitude\n");
        for i in 0..=points {
            let w = PI * i as f64 / points as f64;
            out.push_str(&format!("{},{}\n", sig17(w), sig17(self.response(w).abs())));
        }
        out
    }
}

fn warp(delta: f64) -> (f64, f64) {
    let alpha = 2.0 / (1.0 + delta.cos());
    (alpha, alpha - 1.0)
}

pub fn chebyshev_window(n: usize, delta: f64) -> Result<FilterWindow> {
    chebyshev_window_for(n, delta, chebyshev_ripple(n, delta).powi(2))
}

fn chebyshev_window_for(n: usize, delta: f64, epsilon_target: f64) -> Result<FilterWindow> {
    if n == 0 {
        return Err(invalid("n", "window half-width must be at least 1"));
    }
    check_band(delta)?;
    let (alpha, beta) = warp(delta);
    let norm = cheb_t(n, alpha + beta);
    let m = 2 * n + 1;
    let samples: Vec<f64> = (0..m)
        .map(|j| {
            let w = 2.0 * PI * j as f64 / m as f64;
            cheb_t(n, alpha * w.cos() + beta) / norm
        })
        .collect();
    // The response is an even trigonometric polynomial of degree n, so
    // 2n + 1 samples determine it exactly.
    let mut coefficients = vec![0.0; m];
    for k in 0..=n {
        let mut acc = 0.0;
        for (j, a) in samples.iter().enumerate() {
            acc += a * (2.0 * PI * (k * j) as f64 / m as f64).cos();
        }
        let w = acc / m as f64;
        coefficients[n + k] = w;
        coefficients[n - k] = w;
    }
    let mut clamped = 0;
    for k in 0..=n {
        let w = coefficients[n + k];
        if w < NEGATIVITY_ABORT {
            return Err(ZenoError::NegativeCoefficient { k: k as i64, value: w });
        }
        if w < 0.0 {
            coefficients[n + k] = 0.0;
            coefficients[n - k] = 0.0;
            clamped += if k == 0 { 1 } else { 2 };
        }
    }
    let total: f64 = coefficients.iter().sum();
    coefficients.iter_mut().for_each(|w| *w /= total);
    let mut win = FilterWindow {
        n,
        coefficients,
        delta_band: delta,
        epsilon_target,
        realised_ripple: 0.0,
        clamped,
    };
    win.realised_ripple = win.stopband_max(delta, 32 * (n + 1));
    Ok(win)
}

/// Smallest window meeting the ripple target `sqrt(eps)` on `[delta, pi]`.
///
/// Starts from [`window_size`] and widens the window while the measured
/// ripple is above target.
pub fn design_window(delta: f64, eps: f64) -> Result<FilterWindow> {
    let size = window_size(delta, eps)?;
    let target = eps.sqrt() * (1.0 + RIPPLE_SLACK);
    let mut n = size.n;
    loop {
        let win = chebyshev_window_for(n, delta, eps)?;
        if win.realised_ripple <= target {
            return Ok(win);
        }
        if n > 2 * size.n + 8 {
            return Err(invalid("epsilon", format!("window ripple {} never reached {target}", win.realised_ripple)));
        }
        n += 1;
    }
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub state: DensityMatrix,
    pub success_prob: f64,
}

/// Applies `F = A(H - omega0)` to `rho` and renormalises the success branch.
pub fn apply_filter(h: &HermitianOperator, rho: &DensityMatrix, win: &FilterWindow, omega0: f64) -> Result<FilterOutcome> {
    if h.dim() != rho.dim() {
        return Err(ZenoError::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    let spec = h.spectral();
    if let Some(w) = spec.eigenvalues.iter().find(|w| (*w - omega0).abs() > PI) {
        return Err(invalid("omega0", format!("eigenvalue {w} lies more than pi from the target {omega0}")));
    }
    let f = spec.function(|w| C64::new(win.response(w - omega0), 0.0));
    let out = &f * rho.matrix() * f.adjoint();
    let success_prob = trace(&out).re;
    if success_prob < SUCCESS_FLOOR {
        return Err(ZenoError::FilterAnnihilated { prob: success_prob });
    }
    let state = DensityMatrix::from_evolved(out.unscale(success_prob));
    Ok(FilterOutcome { state, success_prob })
}

#[derive(Debug, Clone)]
pub struct FilterRun {
    pub state: DensityMatrix,
    pub success_prob: f64,
    pub repeats: usize,
    pub total_cost: f64,
}

/// Repeats preparation plus filtering until the success flag is observed.
///
/// Each attempt costs `prep_cost` plus one window application. Failure is a
/// Bernoulli event with the exact success probability.
pub fn filter_until_success(
    h: &HermitianOperator,
    rho: &DensityMatrix,
    win: &FilterWindow,
    omega0: f64,
    seed: u64,
    prep_cost: f64,
) -> Result<FilterRun> {
    let outcome = apply_filter(h, rho, win, omega0)?;
    let mut rng = substream(seed, 0);
    let repeats = geometric_attempts(outcome.success_prob, &mut rng)?;
    Ok(FilterRun {
        state: outcome.state,
        success_prob: outcome.success_prob,
        repeats,
        total_cost: repeats as f64 * (win.cost() + prep_cost),
    })
}

/// Number of Bernoulli(`p`) attempts up to and including the first success.
pub fn geometric_attempts(p: f64, rng: &mut ZenoRng) -> Result<usize> {
    for attempt in 1..=RETRY_CAP {
        if rng.random::<f64>() < p {
            return Ok(attempt);
        }
    }
    Err(ZenoError::RetryCap { cap: RETRY_CAP })
}

/// Fraction of `attempts` independent Bernoulli(`p`) trials that succeed,
/// trial `i` drawing from substream `i` of `seed`.
pub fn sample_success_rate(p: f64, attempts: usize, seed: u64) -> f64 {
    let hits = (0..attempts)
        .filter(|&i| substream(seed, i as u64).random::<f64>() < p)
        .count();
    hits as f64 / attempts as f64
}

pub fn lcu_cost(n: usize, t: f64) -> f64 {
    2.0 * n as f64 * t + n as f64
}

#[cfg(test)]
mod tests;
