//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use rand::{Rng, SeedableRng};
use zeno_cli::manifest::{ExperimentManifest, FilterSpec, ScheduleSpec};
use zeno_cli::sweep::{sweep, Axis, SweepResult};
use zeno_cli::verify::{run_suite, Check, Suite, VerifyOptions};
use zeno_core::filter::{design_window, window_size};

const GROVER_N: [f64; 5] = [64.0, 256.0, 1024.0, 4096.0, 16384.0];
const KAPPAS: [f64; 5] = [8.0, 16.0, 32.0, 64.0, 128.0];
const FILTER_EPS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const SLOPE_TOL: f64 = 0.1;
const MIN_R2: f64 = 0.99;
const CONSTANT_RATIO_SPREAD: f64 = 2.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn suites(list: &[Suite]) -> Result<Vec<Check>> {
    let opts = VerifyOptions::default();
    let mut all = Vec::new();
    for &s in list {
        all.extend(run_suite(s, &opts)?);
    }
    Ok(all)
}

fn describe_failures(checks: &[Check]) -> String {
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    let mut s = format!("{} checks, {} failed", checks.len(), failed.len());
    for c in failed.iter().take(5) {
        s.push_str(&format!("; {} {} measured {:.4e} bound {:.4e}", c.suite, c.name, c.measured, c.bound));
    }
    s
}

fn battery(list: &[Suite], budget: Option<Duration>) -> Result<Outcome> {
    let t = Instant::now();
    let checks = suites(list)?;
    let elapsed = t.elapsed();
    let ok = checks.iter().all(|c| c.passed) && !checks.is_empty();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let mut detail = describe_failures(&checks);
    detail.push_str(&format!(", {:.1}s", elapsed.as_secs_f64()));
    if let Some(b) = budget {
        detail.push_str(&format!(" of {}s budget", b.as_secs()));
    }
    Ok(outcome(ok && in_time, detail))
}

fn slope_outcome(r: &SweepResult) -> (bool, String) {
    match &r.fit {
        Some(f) => (
            r.failed == 0 && (f.slope - 1.0).abs() <= SLOPE_TOL && f.r2 >= MIN_R2,
            format!("slope {:.4}, r2 {:.5}, {} failed points", f.slope, f.r2, r.failed),
        ),
        None => (false, format!("no fit, {} failed points", r.failed)),
    }
}

fn grover_scaling() -> Result<Outcome> {
    let adaptive = ExperimentManifest::grover(64, 1, ScheduleSpec::Adaptive { q: 0.5 }, 0.1);
    let (slope_ok, mut detail) = slope_outcome(&sweep(&adaptive, Axis::GroverN, &GROVER_N)?);
    let constant = ExperimentManifest::grover(64, 1, ScheduleSpec::Constant, 0.1);
    let r = sweep(&constant, Axis::GroverN, &GROVER_N)?;
    let ratios: Vec<f64> = r
        .points
        .iter()
        .map(|p| p.t_schedule.map(|t| t / (p.x.sqrt() * p.x.ln())))
        .collect::<Option<_>>()
        .context("constant-rate sweep point failed")?;
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let spread_ok = hi / lo <= CONSTANT_RATIO_SPREAD;
    detail.push_str(&format!("; constant T/(sqrt(N) ln N) in [{lo:.3}, {hi:.3}]"));
    Ok(outcome(slope_ok && spread_ok, detail))
}

fn qlsp_scaling() -> Result<Outcome> {
    let m = ExperimentManifest::qlsp_diagonal(8.0, ScheduleSpec::Adaptive { q: 0.5 }, 0.1);
    let (ok, detail) = slope_outcome(&sweep(&m, Axis::QlspKappa, &KAPPAS)?);
    Ok(outcome(ok, detail))
}

fn filtering() -> Result<Outcome> {
    let checks = suites(&[Suite::Filtering])?;
    let suite_ok = checks.iter().all(|c| c.passed);
    let mut m = ExperimentManifest::qlsp_diagonal(10.0, ScheduleSpec::Constant, 0.3);
    m.filter = Some(FilterSpec { epsilon: FILTER_EPS[0] });
    let r = sweep(&m, Axis::Epsilon, &FILTER_EPS)?;
    let post_ok = r.points.len() == FILTER_EPS.len()
        && r.points.iter().all(|p| p.final_infidelity.is_some_and(|f| f <= p.x));
    let (fit_ok, fit) = match &r.fit {
        Some(f) => (f.r2 >= MIN_R2, format!("cost vs ln(1/eps) slope {:.3}, r2 {:.6}", f.slope, f.r2)),
        None => (false, "no fit".into()),
    };
    Ok(outcome(
        suite_ok && post_ok && fit_ok && r.failed == 0,
        format!("{}; {fit}; post-filter targets met: {post_ok}", describe_failures(&checks)),
    ))
}

fn window_formula() -> Result<Outcome> {
    let size = window_size(0.1, 1e-8)?;
    let win = design_window(0.1, 1e-8)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let delta = rng.random_range(0.01..1.5);
        let eps = 10f64.powf(rng.random_range(-12.0..-1.0));
        let s = window_size(delta, eps)?;
        worst = worst.max(s.exact / s.bound);
    }
    Ok(outcome(
        size.n == 99 && win.n == 99 && win.realised_ripple <= 1e-4 && worst <= 1.0,
        format!(
            "n {} (designed {}), ripple {:.6e}, worst formula/bound over 20 pairs {worst:.4}",
            size.n, win.n, win.realised_ripple
        ),
    ))
}

fn zeno(dir: &Path, args: &[&str]) -> Result<i32> {
    let out = Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .current_dir(dir)
        .output()
        .context("launching zeno")?;
    let code = out.status.code().context("zeno killed by signal")?;
    ensure!(code != 2, "zeno {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(code)
}

const DETERMINISM_MANIFEST: &str = r#"{
  "problem": { "kind": "qlsp-diagonal", "kappa": 5.0 },
  "schedule": { "kind": "adaptive", "q": 0.5 },
  "epsilon": 0.1,
  "mode": "mc",
  "trajectories": 100,
  "seed": 11,
  "filter": { "epsilon": 1e-6 },
  "outputs": "out/run"
}
"#;

fn artifact_set(dir: &Path) -> Result<()> {
    fs::write(dir.join("m.json"), DETERMINISM_MANIFEST)?;
    zeno(dir, &["run", "--manifest", "m.json"])?;
    zeno(
        dir,
        &["sweep", "--manifest", "m.json", "--mode", "ode", "--axis", "qlsp-kappa", "--values", "4,8,16,32", "--out-dir", "out/sweep"],
    )?;
    zeno(dir, &["verify", "--suite", "lemma15", "--out-dir", "out/verify"])?;
    zeno(dir, &["window", "--delta", "0.2", "--filter-epsilon", "1e-6", "--out-dir", "out/window"])?;
    zeno(dir, &["plot", "out/run/trace.csv", "--kind", "trace"])?;
    zeno(dir, &["plot", "out/sweep/sweep.csv", "--kind", "sweep"])?;
    zeno(dir, &["plot", "out/window/window.csv", "--kind", "window"])?;
    Ok(())
}

fn collect(root: &Path, rel: &Path, into: &mut Vec<(String, Vec<u8>)>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(root.join(rel))?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let r = rel.join(e.file_name());
        if e.file_type()?.is_dir() {
            collect(root, &r, into)?;
        } else {
            into.push((r.display().to_string(), fs::read(root.join(&r))?));
        }
    }
    Ok(())
}

fn determinism() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut sets = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        fs::create_dir_all(&dir)?;
        artifact_set(&dir)?;
        let mut files = Vec::new();
        collect(&dir, Path::new("out"), &mut files)?;
        sets.push(files);
    }
    let (a, b) = (&sets[0], &sets[1]);
    let names_match = a.iter().map(|f| &f.0).eq(b.iter().map(|f| &f.0));
    let differing: Vec<&str> = a.iter().zip(b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.as_str()).collect();
    Ok(outcome(
        names_match && differing.is_empty() && a.len() >= 12,
        format!("{} artifacts compared, differing: {differing:?}", a.len()),
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Result<Outcome>);
    let criteria: [Criterion; 10] = [
        ("constant-rate soundness", || battery(&[Suite::ConstantRate], Some(Duration::from_secs(120)))),
        ("adaptive-rate soundness", || battery(&[Suite::AdaptiveRate], Some(Duration::from_secs(180)))),
        ("search scaling", grover_scaling),
        ("linear-system scaling", qlsp_scaling),
        ("eigenstate filtering", filtering),
        ("window size formula", window_formula),
        ("invariant batteries", || {
            battery(
                &[
                    Suite::ErrorBound,
                    Suite::ProjectorDerivatives,
                    Suite::PerturbedConjugation,
                    Suite::SearchGapIntegrals,
                    Suite::LinearSystemGapIntegrals,
                ],
                None,
            )
        }),
        ("trajectory/ODE consistency", || battery(&[Suite::McVsOde], None)),
        ("circuit model", || battery(&[Suite::CircuitConstant, Suite::CircuitAdaptive], None)),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e:#}")));
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
