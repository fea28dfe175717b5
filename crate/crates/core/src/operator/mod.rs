//! Dense complex linear algebra for Hermitian operators, density matrices
//! and spectral projectors.

mod fd;

pub use fd::{fd_projector_derivatives, FdDerivatives, TrackerState};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Result, ZenoError};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Absolute tolerance on `|H - H^dag|` accepted by [`HermitianOperator::new`],
/// scaled by the largest entry when that exceeds one.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative clustering tolerance used when none is given: eigenvalues closer
/// than `1e-8 * ||H||` are treated as degenerate.
pub const DEFAULT_CLUSTER_REL_TOL: f64 = 1e-8;

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(M + M^dag) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Largest |eigenvalue| of a matrix known to be Hermitian.
pub fn hermitian_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Dense Hermitian matrix with dimensionless entries.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMat,
}

impl HermitianOperator {
    /// Validates Hermiticity and stores the exactly-symmetrised matrix.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(ZenoError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(invalid("dim", "operator dimension must be at least 1"));
        }
        let deviation = hermitian_deviation(&m);
        if deviation > HERMITIAN_TOL * max_abs(&m).max(1.0) {
            return Err(ZenoError::NotHermitian { deviation });
        }
        Ok(Self { m: hermitize(&m) })
    }

    /// Wraps a matrix that is Hermitian by construction; symmetrises it.
    pub(crate) fn from_hermitian(m: CMat) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m: hermitize(&m) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVec::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            m: CMat::from_diagonal(&v),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMat::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        hermitian_norm(&self.m)
    }

    /// Spectral decomposition with the default clustering tolerance.
    pub fn spectral(&self) -> SpectralInfo {
        let (values, vectors) = sorted_eigen(&self.m);
        let scale = values.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        cluster_spectrum(values, vectors, DEFAULT_CLUSTER_REL_TOL * scale.max(f64::MIN_POSITIVE))
    }

    /// `U = exp(-i t H)`.
    pub fn propagator(&self, t: f64) -> CMat {
        self.spectral().function(|w| C64::new(0.0, -w * t).exp())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_hermitian(&self.m + &other.m)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            m: self.m.scale(a),
        }
    }
}

/// One group of (numerically) degenerate eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// Mean eigenvalue of the group.
    pub value: f64,
    /// Index of the first eigenvalue of the group in the sorted spectrum.
    pub start: usize,
    pub multiplicity: usize,
}

/// Sorted eigenvalues, unitary eigenvector matrix and degeneracy clusters.
#[derive(Clone, Debug)]
pub struct SpectralInfo {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    pub clusters: Vec<Cluster>,
}

impl SpectralInfo {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `(value, multiplicity)` pairs in ascending order.
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        self.clusters
            .iter()
            .map(|c| (c.value, c.multiplicity))
            .collect()
    }

    /// `V f(D) V^dag`.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> CMat {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &w) in self.eigenvalues.iter().enumerate() {
            let fw = f(w);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fw);
        }
        scaled * v.adjoint()
    }

    /// `V D V^dag`.
    pub fn reconstruct(&self) -> CMat {
        self.function(|w| C64::new(w, 0.0))
    }

    /// Projector onto the span of one cluster.
    pub fn cluster_projector(&self, idx: usize) -> Projector {
        let c = &self.clusters[idx];
        let cols = self.eigenvectors.columns(c.start, c.multiplicity);
        Projector {
            m: hermitize(&(cols * cols.adjoint())),
            rank: c.multiplicity,
        }
    }

    /// Index of the cluster nearest to `omega`, with its distance.
    pub fn nearest_cluster(&self, omega: f64) -> (usize, f64) {
        self.clusters
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c.value - omega).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("spectrum is never empty")
    }
}

fn sorted_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (eigenvalues, eigenvectors)
}

fn cluster_spectrum(eigenvalues: Vec<f64>, eigenvectors: CMat, cluster_tol: f64) -> SpectralInfo {
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, &w) in eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if w - eigenvalues[i - 1] <= cluster_tol => c.multiplicity += 1,
            _ => clusters.push(Cluster {
                value: w,
                start: i,
                multiplicity: 1,
            }),
        }
    }
    for c in &mut clusters {
        c.value = eigenvalues[c.start..c.start + c.multiplicity].iter().sum::<f64>()
            / c.multiplicity as f64;
    }
    SpectralInfo {
        eigenvalues,
        eigenvectors,
        clusters,
    }
}

/// Eigendecomposition of a Hermitian operator. Eigenvalues closer than
/// `cluster_tol` (chained) form one multiplicity entry.
pub fn spectral_decompose(h: &HermitianOperator, cluster_tol: f64) -> Result<SpectralInfo> {
    if !(cluster_tol >= 0.0) {
        return Err(invalid("cluster_tol", "must be non-negative"));
    }
    let (values, vectors) = sorted_eigen(h.matrix());
    Ok(cluster_spectrum(values, vectors, cluster_tol))
}

/// Orthogonal projector with known rank.
#[derive(Clone, Debug)]
pub struct Projector {
    m: CMat,
    rank: usize,
}

impl Projector {
    /// Validates `P^2 = P`, `P = P^dag` and integral trace.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(ZenoError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_TOL {
            return Err(ZenoError::NotHermitian { deviation: dev });
        }
        let idem = max_abs(&(&m * &m - &m));
        if idem > 1e-10 {
            return Err(invalid("projector", format!("P^2 - P has entry {idem:e}")));
        }
        let tr = trace(&m).re;
        let rank = tr.round();
        if (tr - rank).abs() > 1e-8 {
            return Err(invalid("projector", format!("trace {tr} is not integral")));
        }
        Ok(Self {
            m: hermitize(&m),
            rank: rank as usize,
        })
    }

    /// Projector onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(v: &CMat) -> Self {
        Self {
            m: hermitize(&(v * v.adjoint())),
            rank: v.ncols(),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `1 - P`.
    pub fn complement(&self) -> CMat {
        identity(self.dim()) - &self.m
    }

    /// `<psi|P|psi>` for a normalised state vector.
    pub fn expectation(&self, psi: &CVec) -> f64 {
        (psi.adjoint() * &self.m * psi)[(0, 0)].re
    }
}

/// Projector onto the unique eigenvalue cluster within `tol` of `omega0`.
pub fn projector_onto(spec: &SpectralInfo, omega0: f64, tol: f64) -> Result<Projector> {
    let hits: Vec<usize> = spec
        .clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| (c.value - omega0).abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    match hits.as_slice() {
        [] => Err(ZenoError::NoCluster { omega0, tol }),
        [i] => Ok(spec.cluster_projector(*i)),
        _ => Err(ZenoError::AmbiguousCluster {
            omega0,
            tol,
            count: hits.len(),
        }),
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
}

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(ZenoError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_TOL {
            return Err(ZenoError::NotHermitian { deviation: dev });
        }
        let tr = trace(&m).re;
        if (tr - 1.0).abs() > 1e-10 {
            return Err(invalid("rho", format!("trace is {tr}, expected 1")));
        }
        let m = hermitize(&m);
        let min_eig = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(invalid("rho", format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { m })
    }

    /// `|psi><psi|` for a state that is normalised here.
    pub fn pure(psi: &CVec) -> Self {
        let psi = psi.normalize();
        Self {
            m: hermitize(&(&psi * psi.adjoint())),
        }
    }

    /// Maximally mixed state on the range of a projector.
    pub fn mixed_on(p: &Projector) -> Self {
        Self {
            m: p.matrix().unscale(p.rank() as f64),
        }
    }

    /// Stores a matrix produced by a trace- and positivity-preserving map.
    pub(crate) fn from_evolved(m: CMat) -> Self {
        Self { m: hermitize(&m) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.m).re
    }

    /// `Tr(P rho)`.
    pub fn fidelity(&self, p: &Projector) -> f64 {
        trace_product(p.matrix(), &self.m).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `e^{-itH} rho e^{itH}`.
pub fn conjugate_evolution(rho: &DensityMatrix, h: &HermitianOperator, t: f64) -> DensityMatrix {
    if t == 0.0 {
        return rho.clone();
    }
    let u = h.propagator(t);
    DensityMatrix::from_evolved(&u * rho.matrix() * u.adjoint())
}

/// `P rho P + Q rho Q` computed as `rho - P rho - rho P + 2 P rho P`.
pub fn dephase_matrix(rho: &CMat, p: &CMat) -> CMat {
    let prho = p * rho;
    let rhop = rho * p;
    let prhop = &prho * p;
    hermitize(&(rho - prho - rhop + prhop.scale(2.0)))
}

/// Removes all coherences between the range of `P` and its complement.
pub fn ideal_dephase(rho: &DensityMatrix, p: &Projector) -> Result<DensityMatrix> {
    if rho.dim() != p.dim() {
        return Err(ZenoError::DimensionMismatch {
            expected: rho.dim(),
            got: p.dim(),
        });
    }
    Ok(DensityMatrix::from_evolved(dephase_matrix(
        rho.matrix(),
        p.matrix(),
    )))
}

/// Trace norm of `A rho A^dag - B rho B^dag`.
pub fn trace_norm_diff_of_conjugations(a: &CMat, b: &CMat, rho: &DensityMatrix) -> Result<f64> {
    for m in [a, b] {
        if m.nrows() != rho.dim() || m.ncols() != rho.dim() {
            return Err(ZenoError::DimensionMismatch {
                expected: rho.dim(),
                got: m.nrows(),
            });
        }
    }
    let r = rho.matrix();
    let diff = a * r * a.adjoint() - b * r * b.adjoint();
    Ok(diff.singular_values().iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn grover_h0(n: usize) -> HermitianOperator {
        let u = CVec::from_element(n, c(1.0 / (n as f64).sqrt()));
        HermitianOperator::new(identity(n) - &u * u.adjoint()).unwrap()
    }

    #[test]
    fn diagonal_spectrum() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let sp = spectral_decompose(&h, 1e-8).unwrap();
        assert_eq!(sp.eigenvalues, vec![0.0, 1.0]);
        assert_eq!(sp.multiplicities(), vec![(0.0, 1), (1.0, 1)]);
    }

    #[test]
    fn grover_h0_has_one_zero_and_triple_one() {
        let sp = spectral_decompose(&grover_h0(4), 1e-8).unwrap();
        let m = sp.multiplicities();
        assert_eq!(m.len(), 2);
        assert!(m[0].0.abs() < 1e-12 && m[0].1 == 1);
        assert!((m[1].0 - 1.0).abs() < 1e-12 && m[1].1 == 3);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let h = grover_h0(6);
        let sp = h.spectral();
        assert!(max_abs(&(sp.reconstruct() - h.matrix())) < 1e-10);
        let v = &sp.eigenvectors;
        assert!(max_abs(&(v.adjoint() * v - identity(6))) < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(ZenoError::NotHermitian { .. })
        ));
    }

    #[test]
    fn projector_onto_ground_state() {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let p = projector_onto(&h.spectral(), 0.0, 1e-6).unwrap();
        assert_eq!(p.rank(), 1);
        assert!((p.matrix()[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!(p.matrix()[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn projector_errors() {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 0.1, 1.0]);
        let sp = h.spectral();
        assert!(matches!(
            projector_onto(&sp, 0.5, 0.1),
            Err(ZenoError::NoCluster { .. })
        ));
        assert!(matches!(
            projector_onto(&sp, 0.05, 0.1),
            Err(ZenoError::AmbiguousCluster { count: 2, .. })
        ));
    }

    #[test]
    fn evolution_identity_cases() {
        let plus = CVec::from_element(2, c(std::f64::consts::FRAC_1_SQRT_2));
        let rho = DensityMatrix::pure(&plus);
        let h = HermitianOperator::from_real_diagonal(&[0.0, 0.7]);
        assert_eq!(conjugate_evolution(&rho, &h, 0.0), rho);
        let diag = DensityMatrix::new(CMat::from_diagonal(&CVec::from_vec(vec![c(0.3), c(0.7)])))
            .unwrap();
        let out = conjugate_evolution(&diag, &h, 1.3);
        assert!(max_abs(&(out.matrix() - diag.matrix())) < 1e-14);
    }

    #[test]
    fn qubit_phase() {
        // <0|rho(t)|1> = e^{-i 0 t} (1/2) e^{+i w t} for H = diag(0, w).
        let plus = CVec::from_element(2, c(std::f64::consts::FRAC_1_SQRT_2));
        let rho = DensityMatrix::pure(&plus);
        let (w, t) = (0.9, 2.1);
        let h = HermitianOperator::from_real_diagonal(&[0.0, w]);
        let out = conjugate_evolution(&rho, &h, t);
        let expected = C64::new(0.0, w * t).exp() * 0.5;
        assert!((out.matrix()[(0, 1)] - expected).norm() < 1e-12);
        assert!((out.matrix()[(1, 0)] - expected.conj()).norm() < 1e-12);
    }

    #[test]
    fn full_qubit_dephasing() {
        let plus = CVec::from_element(2, c(std::f64::consts::FRAC_1_SQRT_2));
        let rho = DensityMatrix::pure(&plus);
        let p = Projector::new(CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]))).unwrap();
        let out = ideal_dephase(&rho, &p).unwrap();
        let expected = CMat::from_diagonal(&CVec::from_vec(vec![c(0.5), c(0.5)]));
        assert!(max_abs(&(out.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn trace_norm_trivial_cases() {
        let plus = CVec::from_element(2, c(std::f64::consts::FRAC_1_SQRT_2));
        let rho = DensityMatrix::pure(&plus);
        let a = identity(2);
        assert!(trace_norm_diff_of_conjugations(&a, &a, &rho).unwrap() < 1e-14);
        let b = identity(2) * C64::from_polar(1.0, 0.77);
        assert!(trace_norm_diff_of_conjugations(&a, &b, &rho).unwrap() < 1e-14);
    }
}
