//! Experiment manifests: the JSON description of one run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    /// Unstructured search over `n` items with `m` marked.
    Grover { n: usize, m: usize },
    /// Linear system read from Matrix Market files. Without `rhs` the
    /// right-hand side is the all-ones vector.
    Qlsp {
        matrix: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rhs: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
    },
    /// Built-in diagonal system with the given condition number.
    QlspDiagonal { kappa: f64 },
    /// `H(s) = (1 - s) H0 + s H1` from Matrix Market files, tracking the
    /// eigenvalue of `H0` nearest `omega0` (default: the lowest).
    Custom {
        h0: PathBuf,
        h1: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0: Option<f64>,
    },
    /// Seeded random Hermitian endpoints, normalised to unit norm.
    RandomHermitian { dim: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleSpec {
    Constant,
    Adaptive { q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Deterministic marginal equation.
    Ode,
    /// Monte Carlo trajectories.
    Mc,
    /// Monte Carlo with imperfect evolutions under circuit-model parameters.
    Noisy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerSpec {
    Ideal,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub epsilon: f64,
}

fn default_trajectories() -> usize {
    500
}

fn default_sampler() -> SamplerSpec {
    SamplerSpec::Gaussian
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn default_ode_tol() -> f64 {
    zeno_core::engine::DEFAULT_STEP_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub problem: ProblemSpec,
    pub schedule: ScheduleSpec,
    pub epsilon: f64,
    pub mode: Mode,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterSpec>,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default = "default_ode_tol")]
    pub ode_tol: f64,
}

/// Command-line values that take precedence over the manifest.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub trajectories: Option<usize>,
    pub mode: Option<Mode>,
    pub q: Option<f64>,
    pub epsilon: Option<f64>,
    pub filter_epsilon: Option<f64>,
}

impl ExperimentManifest {
    pub fn grover(n: usize, m: usize, schedule: ScheduleSpec, epsilon: f64) -> Self {
        Self::with_problem(ProblemSpec::Grover { n, m }, schedule, epsilon)
    }

    pub fn qlsp_diagonal(kappa: f64, schedule: ScheduleSpec, epsilon: f64) -> Self {
        Self::with_problem(ProblemSpec::QlspDiagonal { kappa }, schedule, epsilon)
    }

    pub fn with_problem(problem: ProblemSpec, schedule: ScheduleSpec, epsilon: f64) -> Self {
        Self {
            problem,
            schedule,
            epsilon,
            mode: Mode::Ode,
            trajectories: default_trajectories(),
            seed: 0,
            sampler: default_sampler(),
            filter: None,
            outputs: default_outputs(),
            ode_tol: default_ode_tol(),
        }
    }

    /// Reads a manifest, resolving relative file references against the
    /// manifest's own directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: Self = serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.resolve_paths(base);
        Ok(m)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.problem {
            ProblemSpec::Qlsp { matrix, rhs, .. } => {
                fix(matrix);
                if let Some(r) = rhs {
                    fix(r);
                }
            }
            ProblemSpec::Custom { h0, h1, initial, .. } => {
                fix(h0);
                fix(h1);
                if let Some(i) = initial {
                    fix(i);
                }
            }
            _ => {}
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.outputs = d.clone();
        }
        if let Some(t) = o.trajectories {
            self.trajectories = t;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(q) = o.q {
            self.schedule = ScheduleSpec::Adaptive { q };
        }
        if let Some(e) = o.epsilon {
            self.epsilon = e;
        }
        if let Some(e) = o.filter_epsilon {
            self.filter = Some(FilterSpec { epsilon: e });
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.epsilon > 0.0 && self.epsilon < 1.0, "epsilon must lie in (0, 1), got {}", self.epsilon);
        if let ScheduleSpec::Adaptive { q } = self.schedule {
            ensure!(q > 0.0 && q <= 1.0, "q must lie in (0, 1], got {q}");
        }
        if self.mode != Mode::Ode {
            ensure!(self.trajectories >= 1, "trajectory mode needs at least one trajectory");
        }
        if let Some(f) = &self.filter {
            ensure!(f.epsilon > 0.0 && f.epsilon < 1.0, "filter epsilon must lie in (0, 1), got {}", f.epsilon);
            ensure!(self.mode != Mode::Noisy, "filtering is only available in ode and mc modes");
        }
        ensure!(self.ode_tol > 0.0, "ode_tol must be positive");
        let exists = |p: &PathBuf| -> Result<()> {
            if !p.is_file() {
                bail!("referenced file {} does not exist", p.display());
            }
            Ok(())
        };
        match &self.problem {
            ProblemSpec::Grover { n, m } => ensure!(*m >= 1 && m < n, "grover needs 1 <= m < n"),
            ProblemSpec::Qlsp { matrix, rhs, .. } => {
                exists(matrix)?;
                if let Some(r) = rhs {
                    exists(r)?;
                }
            }
            ProblemSpec::QlspDiagonal { kappa } => ensure!(*kappa >= 1.0, "kappa must be at least 1"),
            ProblemSpec::Custom { h0, h1, initial, .. } => {
                exists(h0)?;
                exists(h1)?;
                if let Some(i) = initial {
                    exists(i)?;
                }
            }
            ProblemSpec::RandomHermitian { dim, .. } => ensure!(*dim >= 2, "random path needs dimension >= 2"),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_manifest_takes_defaults() {
        let m: ExperimentManifest = serde_json::from_str(
            r#"{"problem": {"kind": "grover", "n": 16, "m": 1},
                "schedule": {"kind": "adaptive", "q": 0.5},
                "epsilon": 0.1, "mode": "ode"}"#,
        )
        .unwrap();
        assert_eq!(m.trajectories, 500);
        assert_eq!(m.sampler, SamplerSpec::Gaussian);
        m.validate().unwrap();
        let back: ExperimentManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn overrides_win() {
        let mut m = ExperimentManifest::grover(8, 1, ScheduleSpec::Constant, 0.1);
        m.apply(&Overrides { q: Some(0.25), epsilon: Some(0.05), mode: Some(Mode::Mc), ..Default::default() })
            .unwrap();
        assert_eq!(m.schedule, ScheduleSpec::Adaptive { q: 0.25 });
        assert_eq!(m.epsilon, 0.05);
        assert!(m.apply(&Overrides { trajectories: Some(0), ..Default::default() }).is_err());
    }

    #[test]
    fn missing_files_are_rejected() {
        let m = ExperimentManifest::with_problem(
            ProblemSpec::Qlsp { matrix: "/nonexistent/a.mtx".into(), rhs: None, kappa: None },
            ScheduleSpec::Constant,
            0.1,
        );
        assert!(m.validate().is_err());
    }
}
