use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::ZenoRng;
use crate::error::{invalid, Result};
use crate::operator::{CMat, C64};
use crate::schedule::Schedule;

/// Size of the simulation error at a jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseDelta {
    Constant { delta: f64 },
    /// `delta(s) = coeff / lambda(s)`, as in the circuit-model parameters.
    OverRate { coeff: f64 },
}

impl NoiseDelta {
    pub fn at(&self, s: f64, sched: &Schedule) -> f64 {
        match *self {
            Self::Constant { delta } => delta,
            Self::OverRate { coeff } => {
                let l = sched.lambda(s);
                if coeff == 0.0 {
                    0.0
                } else {
                    coeff / l
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Self::Constant { delta } => delta == 0.0,
            Self::OverRate { coeff } => coeff == 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseDirection {
    /// A fresh random Hermitian generator at every jump.
    RandomHermitian,
    /// One generator, drawn from `seed`, reused at every jump.
    Fixed { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta: NoiseDelta,
    pub direction: NoiseDirection,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            delta: NoiseDelta::Constant { delta: 0.0 },
            direction: NoiseDirection::RandomHermitian,
        }
    }

    /// `delta(s)` must stay below 1/2 on `[0, 1]`.
    pub fn validate(&self, sched: &Schedule) -> Result<()> {
        let worst = sched
            .tabulation
            .iter()
            .map(|&(s, _)| self.delta.at(s, sched))
            .fold(0.0f64, f64::max);
        if !(0.0..0.5).contains(&worst) {
            return Err(invalid("delta", format!("must lie in [0, 0.5); reaches {worst}")));
        }
        Ok(())
    }
}

/// What the noise did at one jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseEvent {
    pub s: f64,
    pub delta: f64,
    /// Norm of the state after the imperfect operation, before renormalising.
    pub renormalisation: f64,
}

/// Hermitian matrix with complex Gaussian entries, scaled by `1/sqrt(dim)`.
pub fn random_hermitian(dim: usize, rng: &mut ZenoRng) -> CMat {
    let scale = 1.0 / (dim as f64).sqrt();
    let x = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * scale
    });
    (&x + x.adjoint()).scale(0.5)
}

/// `A = U + E` with `E = delta D / ||D||` and `D = (e^{-iG} - 1) U`.
///
/// `e^{-iG} - 1` is normal, so `||D||` is the largest `|e^{-ig} - 1|` over the
/// eigenvalues `g` of `G`, and `||E|| = delta` exactly.
pub fn noisy_propagator(u: &CMat, g: &CMat, delta: f64) -> CMat {
    let n = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let mut defect = CMat::zeros(n, n);
    let mut norm = 0.0f64;
    for (i, &w) in eig.eigenvalues.iter().enumerate() {
        let d = C64::new(0.0, -w).exp() - C64::new(1.0, 0.0);
        norm = norm.max(d.norm());
        let v = eig.eigenvectors.column(i);
        defect += v * v.adjoint() * d;
    }
    if norm == 0.0 {
        return u.clone();
    }
    u + (defect * u).scale(delta / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::substream;
    use crate::operator::spectral_norm;

    #[test]
    fn error_norm_is_exactly_delta() {
        let mut rng = substream(5, 0);
        for dim in [2, 5, 16] {
            let g = random_hermitian(dim, &mut rng);
            let u = crate::operator::HermitianOperator::new(random_hermitian(dim, &mut rng))
                .unwrap()
                .propagator(0.7);
            for delta in [1e-3, 0.01, 0.3] {
                let a = noisy_propagator(&u, &g, delta);
                assert!((spectral_norm(&(a - &u)) - delta).abs() < 1e-10);
            }
        }
    }
}
