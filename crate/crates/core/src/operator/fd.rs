//! Finite-difference derivatives of a tracked spectral projector.

use super::{hermitian_norm, projector_onto, CMat};
use crate::error::{invalid, Result, ZenoError};
use crate::paths::{GapModel, HamiltonianPath};

/// Where the tracked eigenvalue sits at the stencil centre and how far the
/// rest of the spectrum is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerState {
    pub omega0: f64,
    pub gap: f64,
}

impl TrackerState {
    pub fn from_gap(gap: &GapModel, s: f64) -> Self {
        Self {
            omega0: gap.omega0(s),
            gap: gap.delta(s),
        }
    }
}

/// Richardson-extrapolated `P'` and `P''` with error estimates
/// (`|| D(h) - D(h/2) ||`).
#[derive(Clone, Debug)]
pub struct FdDerivatives {
    pub d1: CMat,
    pub d2: CMat,
    pub d1_err: f64,
    pub d2_err: f64,
}

impl FdDerivatives {
    pub fn d1_norm(&self) -> f64 {
        hermitian_norm(&self.d1)
    }

    pub fn d2_norm(&self) -> f64 {
        hermitian_norm(&self.d2)
    }
}

#[derive(Clone, Copy)]
enum Stencil {
    Central,
    Forward,
    Backward,
}

fn projector_at(
    path: &dyn HamiltonianPath,
    t: f64,
    tracker: &TrackerState,
) -> Result<CMat> {
    let spec = path.evaluate(t).spectral();
    projector_onto(&spec, tracker.omega0, 0.5 * tracker.gap)
        .map(|p| p.matrix().clone())
        .map_err(|e| ZenoError::Tracking {
            s: t,
            reason: e.to_string(),
        })
}

fn differences(
    path: &dyn HamiltonianPath,
    s: f64,
    h: f64,
    stencil: Stencil,
    tracker: &TrackerState,
) -> Result<(CMat, CMat)> {
    let p = |t: f64| projector_at(path, t, tracker);
    Ok(match stencil {
        Stencil::Central => {
            let (pm, p0, pp) = (p(s - h)?, p(s)?, p(s + h)?);
            let d1 = (&pp - &pm).unscale(2.0 * h);
            let d2 = (pp - p0.scale(2.0) + pm).unscale(h * h);
            (d1, d2)
        }
        Stencil::Forward | Stencil::Backward => {
            let sign = if matches!(stencil, Stencil::Forward) { 1.0 } else { -1.0 };
            let pts: Vec<CMat> = (0..4)
                .map(|k| p(s + sign * h * k as f64))
                .collect::<Result<_>>()?;
            let d1 = (pts[0].scale(-3.0) + pts[1].scale(4.0) - &pts[2]).unscale(2.0 * h * sign);
            let d2 = (pts[0].scale(2.0) - pts[1].scale(5.0) + pts[2].scale(4.0) - &pts[3])
                .unscale(h * h);
            (d1, d2)
        }
    })
}

/// `P'(s)` and `P''(s)` for the projector onto the eigenvalue tracked by
/// `tracker`, by second-order differences at steps `h` and `h/2` combined
/// with one Richardson level. One-sided stencils are used near the ends of
/// `[0, 1]`.
pub fn fd_projector_derivatives(
    path: &dyn HamiltonianPath,
    s: f64,
    h: f64,
    tracker: &TrackerState,
) -> Result<FdDerivatives> {
    if !(h > 0.0) || h > 0.05 {
        return Err(invalid("h", "step must lie in (0, 0.05]"));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid("s", "must lie in [0, 1]"));
    }
    let drift = 10.0 * h * path.d1_norm(s);
    if tracker.gap <= drift {
        return Err(ZenoError::Tracking {
            s,
            reason: format!(
                "gap {} does not exceed 10 h ||H'|| = {drift:e}; tracking would be ambiguous",
                tracker.gap
            ),
        });
    }
    let stencil = if s - h >= 0.0 && s + h <= 1.0 {
        Stencil::Central
    } else if s - h < 0.0 {
        Stencil::Forward
    } else {
        Stencil::Backward
    };
    let (a1, a2) = differences(path, s, h, stencil, tracker)?;
    let (b1, b2) = differences(path, s, 0.5 * h, stencil, tracker)?;
    let d1_err = hermitian_norm(&(&a1 - &b1));
    let d2_err = hermitian_norm(&(&a2 - &b2));
    let d1 = (b1.scale(4.0) - a1).unscale(3.0);
    let d2 = (b2.scale(4.0) - a2).unscale(3.0);
    Ok(FdDerivatives {
        d1: super::hermitize(&d1),
        d2: super::hermitize(&d2),
        d1_err,
        d2_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{HermitianOperator, C64};
    use crate::paths::{grover_path, linear_path, GroverProblem};

    fn sz() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0])
    }

    fn sx() -> HermitianOperator {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        HermitianOperator::new(CMat::from_row_slice(2, 2, &[z, o, o, z])).unwrap()
    }

    #[test]
    fn constant_path_has_vanishing_derivatives() {
        let path = linear_path(sz(), sz()).unwrap();
        let tr = TrackerState { omega0: -1.0, gap: 2.0 };
        for s in [0.0, 0.5, 1.0] {
            let d = fd_projector_derivatives(&path, s, 1e-4, &tr).unwrap();
            assert!(d.d1_norm() < 1e-12 && d.d2_norm() < 1e-12);
        }
    }

    /// Ground projector of `(1-s) Z + s X` is `(1 - n.sigma)/2` with
    /// `n = (s, 0, 1-s)/r`, so `P' = -(n'.sigma)/2`.
    #[test]
    fn qubit_path_matches_closed_form() {
        let path = linear_path(sz(), sx()).unwrap();
        for &s in &[0.0f64, 0.2, 0.5, 0.8, 1.0] {
            let r = (s * s + (1.0 - s) * (1.0 - s)).sqrt();
            let rp = (2.0 * s - 1.0) / r;
            let nx = s / r;
            let nz = (1.0 - s) / r;
            let nxp = (r - s * rp) / (r * r);
            let nzp = (-r - (1.0 - s) * rp) / (r * r);
            let _ = (nx, nz);
            let exact = CMat::from_row_slice(
                2,
                2,
                &[
                    C64::new(-nzp / 2.0, 0.0),
                    C64::new(-nxp / 2.0, 0.0),
                    C64::new(-nxp / 2.0, 0.0),
                    C64::new(nzp / 2.0, 0.0),
                ],
            );
            let tr = TrackerState { omega0: -r, gap: 2.0 * r };
            let d = fd_projector_derivatives(&path, s, 1e-4, &tr).unwrap();
            let err = hermitian_norm(&(&d.d1 - &exact));
            assert!(err < 1e-7, "s = {s}: err {err:e}");
        }
    }

    #[test]
    fn grover_midpoint_respects_projector_bound() {
        let prob = GroverProblem::new(16, 1).unwrap();
        let (path, gap) = grover_path(&prob).unwrap();
        let tr = TrackerState::from_gap(&gap, 0.5);
        let d = fd_projector_derivatives(&path, 0.5, 1e-4, &tr).unwrap();
        assert!(d.d1_norm() <= 2.0 * path.d1_norm(0.5) / gap.delta(0.5) + d.d1_err);
    }

    #[test]
    fn ambiguous_tracking_is_reported() {
        let path = linear_path(sz(), sx()).unwrap();
        let tr = TrackerState { omega0: 0.0, gap: 1e-4 };
        assert!(matches!(
            fd_projector_derivatives(&path, 0.5, 1e-4, &tr),
            Err(ZenoError::Tracking { .. })
        ));
    }
}
