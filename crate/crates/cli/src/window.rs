//! The `window` subcommand: design a filter window and write its taps.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use zeno_core::filter::{design_window, window_size, FilterWindow, WindowSize};
use zeno_core::format::sig17;

use crate::output::{to_json, write_text};

#[derive(Debug, Serialize)]
pub struct WindowReport {
    pub delta: f64,
    pub epsilon: f64,
    pub size: WindowSize,
    pub n: usize,
    pub realised_ripple: f64,
    pub ripple_target: f64,
    pub clamped: usize,
    pub coefficient_sum: f64,
    pub lcu_cost: f64,
    pub passed: bool,
}

impl WindowReport {
    pub fn of(win: &FilterWindow, eps: f64) -> Result<Self> {
        let size = window_size(win.delta_band, eps)?;
        let target = eps.sqrt();
        Ok(Self {
            delta: win.delta_band,
            epsilon: eps,
            size,
            n: win.n,
            realised_ripple: win.realised_ripple,
            ripple_target: target,
            clamped: win.clamped,
            coefficient_sum: win.sum(),
            lcu_cost: win.cost(),
            passed: win.realised_ripple <= target * (1.0 + 1e-6),
        })
    }
}

/// Taps as `k,w` rows under a `# n= delta= epsilon= ripple=` comment.
pub fn window_csv(win: &FilterWindow, eps: f64) -> String {
    format!(
        "# n={} delta={} epsilon={} ripple={}\n{}",
        win.n,
        sig17(win.delta_band),
        sig17(eps),
        sig17(win.realised_ripple),
        win.to_csv()
    )
}

/// Designs the window for `(delta, eps)` and writes `window.csv` and
/// `window.json`. Exit code 0 when the ripple target is met.
pub fn cmd_window(delta: f64, eps: f64, out_dir: &Path) -> Result<i32> {
    let win = design_window(delta, eps)?;
    let report = WindowReport::of(&win, eps)?;
    write_text(out_dir, "window.csv", &window_csv(&win, eps))?;
    write_text(out_dir, "window.json", &to_json(&report)?)?;
    println!(
        "window: n {} (formula {:.4}, bound {:.4}), ripple {:.3e} vs {:.3e}",
        report.n, report.size.exact, report.size.bound, report.realised_ripple, report.ripple_target
    );
    Ok(if report.passed { 0 } else { 1 })
}
