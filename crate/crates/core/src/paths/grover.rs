use serde::{Deserialize, Serialize};

use super::{GapModel, HamiltonianPath};
use crate::error::{invalid, Result};
use crate::operator::{identity, CMat, CVec, DensityMatrix, HermitianOperator, Projector, C64};

/// Unstructured search over `n` basis states with `m` marked ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverProblem {
    pub n: usize,
    pub m: usize,
    pub marked: Vec<usize>,
}

impl GroverProblem {
    /// Marks the first `m` basis states.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_marked(n, (0..m).collect())
    }

    pub fn with_marked(n: usize, mut marked: Vec<usize>) -> Result<Self> {
        marked.sort_unstable();
        marked.dedup();
        let m = marked.len();
        if n < 2 {
            return Err(invalid("N", "need N >= 2"));
        }
        if m == 0 || m >= n {
            return Err(invalid("M", format!("need 1 <= M < N, got M = {m}, N = {n}")));
        }
        if let Some(&bad) = marked.iter().find(|&&i| i >= n) {
            return Err(invalid("marked", format!("index {bad} out of range for N = {n}")));
        }
        Ok(Self { n, m, marked })
    }

    /// Uniform superposition `|u>`.
    pub fn uniform(&self) -> CVec {
        CVec::from_element(self.n, C64::new(1.0 / (self.n as f64).sqrt(), 0.0))
    }

    /// `P_M`, the projector onto the marked subspace.
    pub fn marked_projector(&self) -> Projector {
        let mut v = CMat::zeros(self.n, self.m);
        for (col, &i) in self.marked.iter().enumerate() {
            v[(i, col)] = C64::new(1.0, 0.0);
        }
        Projector::from_orthonormal_columns(&v)
    }

    /// `H0 = 1 - |u><u|`.
    pub fn h0(&self) -> CMat {
        let u = self.uniform();
        identity(self.n) - &u * u.adjoint()
    }

    /// `H1 = 1 - P_M`.
    pub fn h1(&self) -> CMat {
        identity(self.n) - self.marked_projector().matrix()
    }

    /// Ground state of `H(0)`.
    pub fn initial_state(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.uniform())
    }

    /// `|| H' ||` in the full space: `sqrt(1 - M/N)` on the span of `|u>`
    /// and `P_M|u>`, and 1 on marked states orthogonal to `|u>` when `M > 1`.
    pub fn d1_norm(&self) -> f64 {
        if self.m > 1 {
            1.0
        } else {
            (1.0 - 1.0 / self.n as f64).sqrt()
        }
    }

    /// The path restricted to the plane spanned by the normalised marked and
    /// unmarked components of `|u>`, with the start state and target
    /// projector in that basis. The plane is invariant, so dynamics from
    /// `|u>` are exact; no `N x N` matrix is formed.
    pub fn two_level(&self) -> (GroverTwoLevelPath, DensityMatrix, Projector) {
        let f = self.m as f64 / self.n as f64;
        let u = CVec::from_vec(vec![C64::new(f.sqrt(), 0.0), C64::new((1.0 - f).sqrt(), 0.0)]);
        let h0 = identity(2) - &u * u.adjoint();
        let h1 = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]));
        let target = Projector::from_orthonormal_columns(&CMat::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
        (
            GroverTwoLevelPath { problem: self.clone(), h0, h1 },
            DensityMatrix::pure(&u),
            target,
        )
    }

    /// The four eigenvalue branches with multiplicities, ascending.
    pub fn analytic_spectrum(&self, s: f64) -> Vec<(f64, usize)> {
        let frac = self.m as f64 / self.n as f64;
        let root = (1.0 - 4.0 * (1.0 - frac) * s * (1.0 - s)).max(0.0).sqrt();
        let mut out = vec![(0.5 * (1.0 - root), 1), (0.5 * (1.0 + root), 1)];
        if self.m > 1 {
            out.push((1.0 - s, self.m - 1));
        }
        if self.n - self.m > 1 {
            out.push((1.0, self.n - self.m - 1));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// `H(s) = (1 - s)(1 - |u><u|) + s(1 - P_M)`. Matrices are built on demand,
/// norms are closed-form so large instances can be costed without them.
#[derive(Clone, Debug)]
pub struct GroverPath {
    problem: GroverProblem,
}

impl GroverPath {
    pub fn problem(&self) -> &GroverProblem {
        &self.problem
    }
}

impl HamiltonianPath for GroverPath {
    fn dim(&self) -> usize {
        self.problem.n
    }

    fn evaluate(&self, s: f64) -> HermitianOperator {
        HermitianOperator::from_hermitian(
            self.problem.h0().scale(1.0 - s) + self.problem.h1().scale(s),
        )
    }

    fn d1(&self, _s: f64) -> HermitianOperator {
        HermitianOperator::from_hermitian(self.problem.h1() - self.problem.h0())
    }

    fn d2(&self, _s: f64) -> HermitianOperator {
        HermitianOperator::zeros(self.problem.n)
    }

    fn d1_norm(&self, _s: f64) -> f64 {
        self.problem.d1_norm()
    }

    fn d2_norm(&self, _s: f64) -> f64 {
        0.0
    }

    fn sup_d1_norm(&self) -> f64 {
        self.d1_norm(0.0)
    }

    fn sup_d2_norm(&self) -> f64 {
        0.0
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn generators(&self) -> Vec<CMat> {
        vec![self.problem.h0(), self.problem.h1()]
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// Two-dimensional restriction of [`GroverPath`]. Operators act on the
/// invariant plane; derivative norms are those of the full space so rate
/// constants agree with the full path.
#[derive(Clone, Debug)]
pub struct GroverTwoLevelPath {
    problem: GroverProblem,
    h0: CMat,
    h1: CMat,
}

impl GroverTwoLevelPath {
    pub fn problem(&self) -> &GroverProblem {
        &self.problem
    }
}

impl HamiltonianPath for GroverTwoLevelPath {
    fn dim(&self) -> usize {
        2
    }

    fn evaluate(&self, s: f64) -> HermitianOperator {
        HermitianOperator::from_hermitian(self.h0.scale(1.0 - s) + self.h1.scale(s))
    }

    fn d1(&self, _s: f64) -> HermitianOperator {
        HermitianOperator::from_hermitian(&self.h1 - &self.h0)
    }

    fn d2(&self, _s: f64) -> HermitianOperator {
        HermitianOperator::zeros(2)
    }

    fn d1_norm(&self, _s: f64) -> f64 {
        self.problem.d1_norm()
    }

    fn d2_norm(&self, _s: f64) -> f64 {
        0.0
    }

    fn sup_d1_norm(&self) -> f64 {
        self.problem.d1_norm()
    }

    fn sup_d2_norm(&self) -> f64 {
        0.0
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn generators(&self) -> Vec<CMat> {
        vec![self.h0.clone(), self.h1.clone()]
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// Grover interpolation path together with its closed-form gap.
pub fn grover_path(prob: &GroverProblem) -> Result<(GroverPath, GapModel)> {
    if prob.m >= prob.n {
        return Err(invalid("M", "need M < N"));
    }
    Ok((
        GroverPath {
            problem: prob.clone(),
        },
        GapModel::grover(prob.n, prob.m),
    ))
}
