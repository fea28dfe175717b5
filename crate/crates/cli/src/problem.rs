//! Turning a problem description into a path, a gap model and a start state.

use anyhow::{Context, Result};
use zeno_core::engine::random_hermitian;
use zeno_core::engine::rng::substream;
use zeno_core::mmio::{read_matrix_market, read_vector_market};
use zeno_core::operator::{CVec, DensityMatrix, HermitianOperator, Projector, C64};
use zeno_core::paths::{
    grover_path, numeric_gap_model, qlsp_path, tracked_projector, GapModel, GroverProblem, HamiltonianPath, LinearPath,
    QlspProblem, SUP_GRID_POINTS,
};

use crate::manifest::ProblemSpec;

pub struct Problem {
    pub label: String,
    pub path: Box<dyn HamiltonianPath>,
    pub gap: GapModel,
    pub rho0: DensityMatrix,
    /// Target eigenspace of `H(1)` in the full space.
    pub target: Projector,
    pub kappa: Option<f64>,
    /// Whether the path is a restriction that omits spectator levels.
    pub restricted: bool,
}

/// Largest search size simulated with full `N x N` matrices; larger
/// instances use the exact two-level restriction.
pub const GROVER_FULL_SPACE_LIMIT: usize = 1024;

impl Problem {
    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    /// Eigenvalue followed at `s = 1`.
    pub fn final_eigenvalue(&self) -> f64 {
        self.gap.omega0(1.0)
    }
}

pub fn build_problem(spec: &ProblemSpec) -> Result<Problem> {
    match spec {
        ProblemSpec::Grover { n, m } if *n > GROVER_FULL_SPACE_LIMIT => {
            let prob = GroverProblem::new(*n, *m)?;
            let (_, gap) = grover_path(&prob)?;
            let (path, rho0, target) = prob.two_level();
            Ok(Problem {
                label: format!("grover-n{n}-m{m}"),
                path: Box::new(path),
                gap,
                rho0,
                target,
                kappa: None,
                restricted: true,
            })
        }
        ProblemSpec::Grover { n, m } => {
            let prob = GroverProblem::new(*n, *m)?;
            let (path, gap) = grover_path(&prob)?;
            Ok(Problem {
                label: format!("grover-n{n}-m{m}"),
                rho0: prob.initial_state(),
                target: prob.marked_projector(),
                path: Box::new(path),
                gap,
                kappa: None,
                restricted: false,
            })
        }
        ProblemSpec::QlspDiagonal { kappa } => qlsp(QlspProblem::diagonal_test(*kappa)?, format!("qlsp-diag-k{kappa}")),
        ProblemSpec::Qlsp { matrix, rhs, kappa } => {
            let a = read_matrix_market(matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let b = match rhs {
                Some(p) => read_vector_market(p).with_context(|| format!("reading {}", p.display()))?,
                None => CVec::from_element(a.nrows(), C64::new(1.0, 0.0)),
            };
            let stem = matrix.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            qlsp(QlspProblem::new(a, b, *kappa)?, format!("qlsp-{stem}"))
        }
        ProblemSpec::Custom { h0, h1, initial, omega0 } => {
            let h0m = HermitianOperator::new(read_matrix_market(h0).with_context(|| format!("reading {}", h0.display()))?)?;
            let h1m = HermitianOperator::new(read_matrix_market(h1).with_context(|| format!("reading {}", h1.display()))?)?;
            let psi = match initial {
                Some(p) => Some(read_vector_market(p).with_context(|| format!("reading {}", p.display()))?),
                None => None,
            };
            linear(h0m, h1m, *omega0, psi, "custom".into())
        }
        ProblemSpec::RandomHermitian { dim, seed } => {
            let mut rng = substream(*seed, 0);
            let mut unit = || {
                let g = random_hermitian(*dim, &mut rng);
                let op = HermitianOperator::new(g)?;
                let n = op.norm();
                Ok::<_, anyhow::Error>(op.scale(1.0 / n))
            };
            let (a, b) = (unit()?, unit()?);
            linear(a, b, None, None, format!("random-d{dim}-seed{seed}"))
        }
    }
}

fn qlsp(prob: QlspProblem, label: String) -> Result<Problem> {
    let kappa = prob.kappa;
    let inst = qlsp_path(&prob)?;
    Ok(Problem {
        label,
        path: Box::new(inst.path),
        gap: inst.gap,
        rho0: inst.initial_state,
        target: inst.target_projector,
        kappa: Some(kappa),
        restricted: false,
    })
}

fn linear(
    h0: HermitianOperator,
    h1: HermitianOperator,
    omega0: Option<f64>,
    psi: Option<CVec>,
    label: String,
) -> Result<Problem> {
    let spec0 = h0.spectral();
    let w0 = omega0.unwrap_or(spec0.eigenvalues[0]);
    let path = LinearPath::new(h0, h1)?;
    let gap = numeric_gap_model(&path, w0, SUP_GRID_POINTS)?;
    let rho0 = match psi {
        Some(v) => {
            let n = v.norm();
            anyhow::ensure!(n > 0.0, "initial vector is zero");
            DensityMatrix::pure(&v.unscale(n))
        }
        None => {
            let p = tracked_projector(&path, &gap, 0.0)?;
            if p.rank() == 1 {
                let (idx, _) = spec0.nearest_cluster(w0);
                let start = spec0.clusters[idx].start;
                DensityMatrix::pure(&spec0.eigenvectors.column(start).into_owned())
            } else {
                DensityMatrix::mixed_on(&p)
            }
        }
    };
    let target = tracked_projector(&path, &gap, 1.0)?;
    Ok(Problem { label, path: Box::new(path), gap, rho0, target, kappa: None, restricted: false })
}

/// Verification battery: four Grover instances, four diagonal linear
/// systems and one random Hermitian path.
pub fn battery() -> Vec<ProblemSpec> {
    let mut out: Vec<ProblemSpec> = [(8, 1), (16, 1), (64, 1), (16, 4)]
        .iter()
        .map(|&(n, m)| ProblemSpec::Grover { n, m })
        .collect();
    out.extend([5.0, 10.0, 20.0, 50.0].iter().map(|&kappa| ProblemSpec::QlspDiagonal { kappa }));
    out.push(ProblemSpec::RandomHermitian { dim: 8, seed: RANDOM_PATH_SEED });
    out
}

/// Seed of the random battery path.
pub const RANDOM_PATH_SEED: u64 = 7;
