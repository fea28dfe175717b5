use super::{GapModel, LinearPath};
use crate::error::{invalid, Result, ZenoError};
use crate::operator::{identity, CMat, CVec, DensityMatrix, HermitianOperator, Projector, C64};

const SINGULAR_REL: f64 = 1e-12;
const KAPPA_HINT_REL: f64 = 0.01;

/// Linear system `A x = b` prepared for the eigenpath construction:
/// Hermitian-dilated when `A` is not Hermitian and rescaled to `||A|| = 1`.
#[derive(Clone, Debug)]
pub struct QlspProblem {
    pub a_raw: CMat,
    pub b_raw: CVec,
    /// Condition number computed from the singular values of `a_raw`.
    pub kappa: f64,
    pub hermitized: bool,
    pub dim_expanded: usize,
    working: CMat,
    b: CVec,
}

fn pauli_z() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]))
}

fn pauli_x() -> CMat {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    CMat::from_row_slice(2, 2, &[z, o, o, z])
}

/// `sigma_+ = |0><1|`.
fn sigma_plus() -> CMat {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    CMat::from_row_slice(2, 2, &[z, o, z, z])
}

/// `sigma_- = |1><0|`.
fn sigma_minus() -> CMat {
    sigma_plus().adjoint()
}

fn ket(bit: usize) -> CVec {
    let mut v = CVec::zeros(2);
    v[bit] = C64::new(1.0, 0.0);
    v
}

fn plus() -> CVec {
    CVec::from_element(2, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
}

impl QlspProblem {
    /// `kappa_hint`, when given, must agree with the computed condition
    /// number to within 1%.
    pub fn new(a_raw: CMat, b: CVec, kappa_hint: Option<f64>) -> Result<Self> {
        let n = a_raw.nrows();
        if n == 0 || a_raw.ncols() != n {
            return Err(invalid("A", "must be a non-empty square matrix"));
        }
        if b.len() != n {
            return Err(ZenoError::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let b_norm = b.norm();
        if !(b_norm > 0.0) {
            return Err(invalid("b", "must be non-zero"));
        }
        let sv = a_raw.singular_values();
        let s_max = sv.iter().cloned().fold(0.0, f64::max);
        let s_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(s_min >= SINGULAR_REL * s_max) || s_max == 0.0 {
            return Err(ZenoError::Singular { sigma_min: s_min });
        }
        let kappa = s_max / s_min;
        if let Some(hint) = kappa_hint {
            if ((hint - kappa) / kappa).abs() > KAPPA_HINT_REL {
                return Err(invalid(
                    "kappa",
                    format!("caller gave {hint}, singular values give {kappa}"),
                ));
            }
        }
        let scale = a_raw.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
        let deviation = (&a_raw - a_raw.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let hermitized = deviation > 1e-12 * scale;
        let b_unit = b.unscale(b_norm);
        let (mut working, b_work) = if hermitized {
            let mut big = CMat::zeros(2 * n, 2 * n);
            big.view_mut((0, n), (n, n)).copy_from(&a_raw);
            big.view_mut((n, 0), (n, n)).copy_from(&a_raw.adjoint());
            let mut bb = CVec::zeros(2 * n);
            bb.rows_mut(0, n).copy_from(&b_unit);
            (big, bb)
        } else {
            (a_raw.clone(), b_unit)
        };
        working.unscale_mut(s_max);
        if !hermitized {
            working = (&working + working.adjoint()).scale(0.5);
        }
        let dim_expanded = 4 * working.nrows();
        Ok(Self {
            a_raw,
            b_raw: b,
            kappa,
            hermitized,
            dim_expanded,
            working,
            b: b_work,
        })
    }

    /// `diag(1, 1/kappa)` with `b = (1, 1)/sqrt(2)`.
    pub fn diagonal_test(kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0) {
            return Err(invalid("kappa", "must be at least 1"));
        }
        let a = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(1.0 / kappa, 0.0),
        ]));
        let b = CVec::from_element(2, C64::new(1.0, 0.0));
        Self::new(a, b, None)
    }

    /// Preprocessed Hermitian matrix with unit norm.
    pub fn working_matrix(&self) -> &CMat {
        &self.working
    }

    pub fn working_rhs(&self) -> &CVec {
        &self.b
    }

    fn n(&self) -> usize {
        self.working.nrows()
    }

    /// `A(s) = (1 - s) sigma_z (x) 1 + s sigma_x (x) A`.
    pub fn a_of_s(&self, s: f64) -> CMat {
        pauli_z().kronecker(&identity(self.n())).scale(1.0 - s)
            + pauli_x().kronecker(&self.working).scale(s)
    }

    /// `|+> (x) |b>`.
    pub fn plus_b(&self) -> CVec {
        plus().kronecker(&self.b)
    }

    /// `Q_{b,+} = 1 - |+,b><+,b|`.
    pub fn q_bplus(&self) -> CMat {
        let v = self.plus_b();
        identity(2 * self.n()) - &v * v.adjoint()
    }

    fn endpoint(&self, a: &CMat) -> CMat {
        let q = self.q_bplus();
        sigma_plus().kronecker(&(a * &q)) + sigma_minus().kronecker(&(&q * a))
    }

    pub fn h0(&self) -> CMat {
        self.endpoint(&self.a_of_s(0.0))
    }

    pub fn h1(&self) -> CMat {
        self.endpoint(&self.a_of_s(1.0))
    }

    /// `|x(s)> = A(s)^{-1}(|+> (x) |b>)`, normalised.
    pub fn x_of_s(&self, s: f64) -> CVec {
        let x = self
            .a_of_s(s)
            .lu()
            .solve(&self.plus_b())
            .expect("A(s) is invertible for an invertible A");
        x.normalize()
    }

    /// `|0> (x) |x(s)>`.
    pub fn tracked_kernel_vector(&self, s: f64) -> CVec {
        ket(0).kronecker(&self.x_of_s(s))
    }

    /// `|1> (x) |+> (x) |b>`, the kernel vector that is never populated.
    pub fn spurious_kernel_vector(&self) -> CVec {
        ket(1).kronecker(&self.plus_b())
    }

    /// Normalised solution of the working system.
    pub fn solution(&self) -> CVec {
        self.working
            .clone()
            .lu()
            .solve(&self.b)
            .expect("working matrix is invertible")
            .normalize()
    }

    /// Normalised solution of the original system `A_raw x = b`.
    pub fn raw_solution(&self) -> CVec {
        let sol = self.solution();
        if self.hermitized {
            let n = self.a_raw.nrows();
            sol.rows(n, n).into_owned().normalize()
        } else {
            sol
        }
    }
}

/// Everything needed to run the eigenpath for a linear system.
#[derive(Clone, Debug)]
pub struct QlspInstance {
    pub path: LinearPath,
    pub gap: GapModel,
    /// `|0> (x) |x(0)> = |0> (x) |-> (x) |b>`.
    pub initial_state: DensityMatrix,
    /// Projector onto `|0> (x) |+> (x) |x>` with `x ∝ A^{-1} b`.
    pub target_projector: Projector,
}

pub fn qlsp_path(prob: &QlspProblem) -> Result<QlspInstance> {
    let h0 = HermitianOperator::new(prob.h0())?;
    let h1 = HermitianOperator::new(prob.h1())?;
    let path = LinearPath::new(h0, h1)?;
    let gap = GapModel::qlsp(prob.kappa);
    let initial_state = DensityMatrix::pure(&prob.tracked_kernel_vector(0.0));
    let target = ket(0).kronecker(&plus().kronecker(&prob.solution()));
    let target_projector = Projector::from_orthonormal_columns(&CMat::from_column_slice(
        target.len(),
        1,
        target.as_slice(),
    ));
    Ok(QlspInstance {
        path,
        gap,
        initial_state,
        target_projector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{hermitian_norm, projector_onto};
    use crate::paths::{numeric_gap_model, HamiltonianPath, NUMERIC_GAP_SAFETY};
    use crate::quad::unit_grid;

    fn max_abs(v: &CVec) -> f64 {
        v.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    #[test]
    fn kernel_vectors_annihilated_on_grid() {
        for kappa in [1.0, 10.0, 50.0] {
            let prob = QlspProblem::diagonal_test(kappa).unwrap();
            let inst = qlsp_path(&prob).unwrap();
            for s in unit_grid(33) {
                let h = inst.path.evaluate(s);
                assert!(max_abs(&(h.matrix() * prob.tracked_kernel_vector(s))) < 1e-9);
                assert!(max_abs(&(h.matrix() * prob.spurious_kernel_vector())) < 1e-9);
                let sp = h.spectral();
                let p = projector_onto(&sp, 0.0, 0.5 * inst.gap.delta(s)).unwrap();
                assert_eq!(p.rank(), 2);
            }
        }
    }

    #[test]
    fn endpoint_kernel_vectors() {
        let prob = QlspProblem::diagonal_test(10.0).unwrap();
        // x(0) = |->|b>, x(1) = |+> A^{-1}|b>
        let minus = CVec::from_vec(vec![
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let x0 = minus.kronecker(prob.working_rhs());
        assert!(max_abs(&(prob.x_of_s(0.0) - x0)) < 1e-12);
        let x1 = plus().kronecker(&prob.solution());
        assert!(max_abs(&(prob.x_of_s(1.0) - x1)) < 1e-12);
    }

    #[test]
    fn preprocessing_normalises() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[C64::new(3.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)],
        );
        let b = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let prob = QlspProblem::new(a.clone(), b.clone(), None).unwrap();
        assert!(prob.hermitized);
        assert_eq!(prob.dim_expanded, 16);
        let sv = prob.working_matrix().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((smax - 1.0).abs() < 1e-10);
        assert!((smin - 1.0 / prob.kappa).abs() < 1e-8);
        // The recovered solution solves the original system up to scale.
        let x = prob.raw_solution();
        let r = &a * &x;
        let ratio = r[0] / b[0];
        assert!(max_abs(&(r - b.scale(1.0) * ratio)) < 1e-10);
    }

    #[test]
    fn rejects_singular_and_bad_kappa_hint() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
        let b = CVec::from_element(2, C64::new(1.0, 0.0));
        assert!(matches!(
            QlspProblem::new(a, b.clone(), None),
            Err(ZenoError::Singular { .. })
        ));
        let a = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.1, 0.0)]));
        assert!(QlspProblem::new(a.clone(), b.clone(), Some(10.05)).is_ok());
        assert!(QlspProblem::new(a, b, Some(12.0)).is_err());
    }

    #[test]
    fn rescaling_invariance() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.5, 0.3), C64::new(0.5, -0.3), C64::new(-1.0, 0.0)],
        );
        let b = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let p1 = QlspProblem::new(a.clone(), b.clone(), None).unwrap();
        let p2 = QlspProblem::new(a.scale(7.5), b, None).unwrap();
        let diff = p1.working_matrix() - p2.working_matrix();
        assert!(diff.iter().all(|z| z.norm() < 1e-14));
        let (i1, i2) = (qlsp_path(&p1).unwrap(), qlsp_path(&p2).unwrap());
        assert!((i1.gap.delta_m - i2.gap.delta_m).abs() < 1e-14);
        assert!(hermitian_norm(&(i1.target_projector.matrix() - i2.target_projector.matrix())) < 1e-12);
    }

    #[test]
    fn gap_bound_below_tracked_gap() {
        let prob = QlspProblem::diagonal_test(10.0).unwrap();
        let inst = qlsp_path(&prob).unwrap();
        let numeric = numeric_gap_model(&inst.path, 0.0, 129).unwrap();
        for s in unit_grid(129) {
            assert!(numeric.delta(s) / NUMERIC_GAP_SAFETY >= inst.gap.delta(s) - 1e-12);
        }
        inst.gap.check_against(&inst.path, 65).unwrap();
    }

    #[test]
    fn gap_derivative_bound() {
        let kappa: f64 = 20.0;
        let gap = GapModel::qlsp(kappa);
        let bound = (1.0 + 1.0 / (kappa * kappa)).sqrt();
        assert!(unit_grid(1025).into_iter().all(|s| gap.delta_prime(s).abs() <= bound + 1e-12));
    }

    #[test]
    fn indefinite_hermitian_system() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-0.25, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let b = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let prob = QlspProblem::new(a, b, Some(4.0)).unwrap();
        assert!(!prob.hermitized);
        let inst = qlsp_path(&prob).unwrap();
        inst.gap.check_against(&inst.path, 33).unwrap();
        assert!(inst.path.sup_norm() <= 1.0 + 1e-12);
    }
}
