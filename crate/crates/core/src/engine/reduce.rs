//! Smallest subspace containing the initial state that every `H(s)` maps
//! into itself. Dynamics restricted to it are exact, and for the problem
//! families here it is tiny (2 for Grover, at most `2 dim A` for QLSP).

use crate::operator::{CMat, CVec, DensityMatrix, HermitianOperator, Projector, C64};
use crate::paths::{HamiltonianPath, LinearPath};
use crate::error::Result;

const DROP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct InvariantSubspace {
    /// Orthonormal columns spanning the subspace.
    basis: CMat,
}

fn orthogonalise(basis: &[CVec], mut w: CVec) -> CVec {
    // Two passes of classical Gram-Schmidt are enough for orthogonality to
    // working precision.
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
    }
    w
}

impl InvariantSubspace {
    /// Krylov closure of `start` under `generators`.
    pub fn krylov(start: &[CVec], generators: &[CMat]) -> Self {
        let scale = generators
            .iter()
            .map(|g| g.iter().fold(0.0f64, |m, z| m.max(z.norm())))
            .fold(1.0f64, f64::max);
        let mut basis: Vec<CVec> = Vec::new();
        for v in start {
            let w = orthogonalise(&basis, v.clone());
            let n = w.norm();
            if n > DROP_TOL {
                basis.push(w.unscale(n));
            }
        }
        let mut next = 0;
        while next < basis.len() {
            let v = basis[next].clone();
            next += 1;
            for g in generators {
                let w = orthogonalise(&basis, g * &v);
                let n = w.norm();
                if n > DROP_TOL * scale {
                    basis.push(w.unscale(n));
                }
            }
        }
        let dim = start.first().map(|v| v.len()).unwrap_or(0);
        let mut m = CMat::zeros(dim, basis.len());
        for (j, b) in basis.iter().enumerate() {
            m.set_column(j, b);
        }
        Self { basis: m }
    }

    /// Closure of the support of `rho` under the path's generators.
    pub fn for_state(path: &dyn HamiltonianPath, rho: &DensityMatrix) -> Self {
        let eig = rho.matrix().clone().symmetric_eigen();
        let start: Vec<CVec> = (0..rho.dim())
            .filter(|&i| eig.eigenvalues[i] > 1e-14)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        Self::krylov(&start, &path.generators())
    }

    /// The whole space (no reduction).
    pub fn full(dim: usize) -> Self {
        Self {
            basis: CMat::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn restrict(&self, m: &CMat) -> CMat {
        self.basis.adjoint() * m * &self.basis
    }

    pub fn restrict_vector(&self, v: &CVec) -> CVec {
        self.basis.adjoint() * v
    }

    pub fn restrict_state(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_evolved(self.restrict(rho.matrix()))
    }

    pub fn restrict_projector(&self, p: &Projector) -> Result<Projector> {
        Projector::new(self.restrict(p.matrix()))
    }

    pub fn lift(&self, m: &CMat) -> CMat {
        &self.basis * m * self.basis.adjoint()
    }

    pub fn lift_vector(&self, v: &CVec) -> CVec {
        &self.basis * v
    }

    /// Restriction of a path whose span of values is spanned by its
    /// generators. Linear paths stay linear.
    pub fn restrict_path(&self, path: &dyn HamiltonianPath) -> Result<LinearPath> {
        let h0 = HermitianOperator::new(self.restrict(path.evaluate(0.0).matrix()))?;
        let h1 = HermitianOperator::new(self.restrict(path.evaluate(1.0).matrix()))?;
        if !path.is_linear() {
            // A non-linear path can only be handled if it is affine after all;
            // check at the midpoint.
            let mid = self.restrict(path.evaluate(0.5).matrix());
            let lin = (h0.matrix() + h1.matrix()).scale(0.5);
            let dev = (mid - lin).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if dev > 1e-10 {
                return Err(crate::error::invalid(
                    "path",
                    "only affine paths can be restricted to an invariant subspace",
                ));
            }
        }
        LinearPath::new(h0, h1)
    }

    /// Residual `||(1 - VV^dag) G V||` for each generator; zero for an
    /// invariant subspace.
    pub fn leakage(&self, generators: &[CMat]) -> f64 {
        let proj = &self.basis * self.basis.adjoint();
        let n = self.ambient_dim();
        let q = CMat::identity(n, n) - proj;
        generators
            .iter()
            .map(|g| {
                (&q * g * &self.basis)
                    .iter()
                    .fold(0.0f64, |m, z: &C64| m.max(z.norm()))
            })
            .fold(0.0, f64::max)
    }
}
