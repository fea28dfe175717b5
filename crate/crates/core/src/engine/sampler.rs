use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng::ZenoRng;
use crate::schedule::T0;

/// How a jump at `s` acts on the state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TauSampler {
    /// Exact dephasing `rho -> P rho P + Q rho Q`; the evolution time is
    /// imputed as `T0 / Delta(s)`.
    IdealDephase,
    /// `e^{-i tau H(s)}` with `tau ~ Normal(0, sigma^2)`, `sigma = calibration / Delta(s)`.
    /// The distribution is symmetric in `tau`.
    Gaussian { calibration: f64 },
}

impl TauSampler {
    /// Gaussian sampler with `E|tau| = T0 / Delta`.
    pub fn gaussian() -> Self {
        Self::Gaussian {
            calibration: T0 * (std::f64::consts::PI / 2.0).sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::IdealDephase => "ideal-dephase",
            Self::Gaussian { .. } => "gaussian",
        }
    }

    /// Draws `tau` for gap `delta`; zero for the ideal sampler.
    pub fn sample_tau(&self, delta: f64, rng: &mut ZenoRng) -> f64 {
        match *self {
            Self::IdealDephase => 0.0,
            Self::Gaussian { calibration } => Normal::new(0.0, calibration / delta)
                .expect("sigma is positive and finite")
                .sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::substream;

    #[test]
    fn gaussian_mean_absolute_time_is_calibrated() {
        let smp = TauSampler::gaussian();
        let mut rng = substream(11, 0);
        let delta = 0.37;
        let n = 100_000;
        let mean = (0..n).map(|_| smp.sample_tau(delta, &mut rng).abs()).sum::<f64>() / n as f64;
        let target = T0 / delta;
        assert!((mean - target).abs() / target < 0.01, "{mean} vs {target}");
    }
}
