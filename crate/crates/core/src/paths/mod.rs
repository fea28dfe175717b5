//! Hamiltonian interpolation paths `s -> H(s)` on `[0, 1]` and the gap
//! models that accompany them.

mod gap;
mod grover;
mod qlsp;

pub use gap::{gap_integral, numeric_gap_model, GapKind, GapModel, NUMERIC_GAP_SAFETY};
pub use grover::{grover_path, GroverPath, GroverProblem, GroverTwoLevelPath};
pub use qlsp::{qlsp_path, QlspInstance, QlspProblem};

use crate::error::{Result, ZenoError};
use crate::operator::{hermitian_norm, projector_onto, CMat, HermitianOperator, Projector};
use crate::quad::grid_sup;

/// Grid used for suprema over `s`.
pub const SUP_GRID_POINTS: usize = 1025;

/// A twice-differentiable path of Hamiltonians.
pub trait HamiltonianPath: Send + Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, s: f64) -> HermitianOperator;

    /// `H'(s)`.
    fn d1(&self, s: f64) -> HermitianOperator;

    /// `H''(s)`.
    fn d2(&self, s: f64) -> HermitianOperator;

    fn d1_norm(&self, s: f64) -> f64 {
        self.d1(s).norm()
    }

    fn d2_norm(&self, s: f64) -> f64 {
        self.d2(s).norm()
    }

    fn sup_d1_norm(&self) -> f64 {
        grid_sup(|s| self.d1_norm(s), SUP_GRID_POINTS)
    }

    fn sup_d2_norm(&self) -> f64 {
        grid_sup(|s| self.d2_norm(s), SUP_GRID_POINTS)
    }

    /// `sup_s ||H(s)||`.
    fn sup_norm(&self) -> f64 {
        grid_sup(|s| self.evaluate(s).norm(), 65)
    }

    /// Operators whose real span contains every `H(s)`; used to find
    /// subspaces invariant along the whole path.
    fn generators(&self) -> Vec<CMat>;

    /// Whether `H'` is constant and `H''` vanishes.
    fn is_linear(&self) -> bool {
        false
    }
}

/// `H(s) = (1 - s) H0 + s H1`.
#[derive(Clone, Debug)]
pub struct LinearPath {
    h0: HermitianOperator,
    h1: HermitianOperator,
    diff: HermitianOperator,
    diff_norm: f64,
}

impl LinearPath {
    pub fn new(h0: HermitianOperator, h1: HermitianOperator) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(ZenoError::DimensionMismatch {
                expected: h0.dim(),
                got: h1.dim(),
            });
        }
        let diff = HermitianOperator::from_hermitian(h1.matrix() - h0.matrix());
        let diff_norm = diff.norm();
        Ok(Self {
            h0,
            h1,
            diff,
            diff_norm,
        })
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn h1(&self) -> &HermitianOperator {
        &self.h1
    }
}

pub fn linear_path(h0: HermitianOperator, h1: HermitianOperator) -> Result<LinearPath> {
    LinearPath::new(h0, h1)
}

impl HamiltonianPath for LinearPath {
    fn dim(&self) -> usize {
        self.h0.dim()
    }

    fn evaluate(&self, s: f64) -> HermitianOperator {
        HermitianOperator::from_hermitian(self.h0.matrix().scale(1.0 - s) + self.h1.matrix().scale(s))
    }

    fn d1(&self, _s: f64) -> HermitianOperator {
        self.diff.clone()
    }

    fn d2(&self, _s: f64) -> HermitianOperator {
        HermitianOperator::zeros(self.dim())
    }

    fn d1_norm(&self, _s: f64) -> f64 {
        self.diff_norm
    }

    fn d2_norm(&self, _s: f64) -> f64 {
        0.0
    }

    fn sup_d1_norm(&self) -> f64 {
        self.diff_norm
    }

    fn sup_d2_norm(&self) -> f64 {
        0.0
    }

    fn sup_norm(&self) -> f64 {
        // ||H(s)|| is convex in s, so the endpoints bound it.
        self.h0.norm().max(self.h1.norm())
    }

    fn generators(&self) -> Vec<CMat> {
        vec![self.h0.matrix().clone(), self.h1.matrix().clone()]
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// Projector onto the eigenspace of `H(s)` followed by `gap`: the cluster
/// nearest to `gap.omega0(s)`, which must be the only cluster within
/// `gap.delta(s) / 2`.
pub fn tracked_projector(path: &dyn HamiltonianPath, gap: &GapModel, s: f64) -> Result<Projector> {
    let h = path.evaluate(s);
    let spec = h.spectral();
    projector_onto(&spec, gap.omega0(s), 0.5 * gap.delta(s)).map_err(|e| ZenoError::Tracking {
        s,
        reason: e.to_string(),
    })
}

/// `||H1 - H0||` style helper for callers that hold raw matrices.
pub fn difference_norm(a: &CMat, b: &CMat) -> f64 {
    hermitian_norm(&(a - b))
}
