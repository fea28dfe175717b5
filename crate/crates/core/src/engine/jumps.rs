use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::rng::ZenoRng;
use crate::error::{Result, ZenoError};
use crate::schedule::Schedule;

/// Margin applied to the grid maximum of `lambda` before thinning.
pub const RATE_BOUND_MARGIN: f64 = 1.01;

/// Jump points of one realisation of the Poisson process on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpSample {
    pub jump_points: Vec<f64>,
    pub rate_bound_used: f64,
}

/// Dominating constant rate for thinning.
pub fn rate_bound(sched: &Schedule) -> Result<f64> {
    let grid_max = sched
        .tabulation
        .iter()
        .map(|&(_, l)| l)
        .fold(0.0f64, f64::max)
        .max(sched.lambda(0.0))
        .max(sched.lambda(1.0));
    let bound = RATE_BOUND_MARGIN * grid_max.max(sched.lambda_max());
    if bound.is_finite() {
        Ok(bound)
    } else {
        Err(ZenoError::UnboundedRate)
    }
}

/// Inhomogeneous Poisson process with intensity `sched.lambda`, by thinning
/// a homogeneous process of rate [`rate_bound`].
pub fn sample_poisson_jumps(sched: &Schedule, rng: &mut ZenoRng) -> Result<JumpSample> {
    let bound = rate_bound(sched)?;
    let mut jump_points = Vec::new();
    if bound > 0.0 {
        let gaps = Exp::new(bound).map_err(|_| ZenoError::UnboundedRate)?;
        let mut s = 0.0;
        loop {
            s += gaps.sample(rng);
            if s >= 1.0 {
                break;
            }
            let accept: f64 = rng.random();
            if accept * bound < sched.lambda(s) {
                jump_points.push(s);
            }
        }
    }
    Ok(JumpSample {
        jump_points,
        rate_bound_used: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::substream;
    use crate::paths::{grover_path, GapModel, GroverProblem};
    use crate::schedule::adaptive_rate;

    #[test]
    fn zero_rate_has_no_jumps() {
        let s = Schedule::constant(0.0, 0.1, &GapModel::constant(1.0, 0.0)).unwrap();
        let j = sample_poisson_jumps(&s, &mut substream(1, 0)).unwrap();
        assert!(j.jump_points.is_empty());
    }

    #[test]
    fn constant_rate_counts_are_poisson() {
        let s = Schedule::constant(50.0, 0.1, &GapModel::constant(1.0, 0.0)).unwrap();
        let counts: Vec<f64> = (0..2000)
            .map(|i| {
                let j = sample_poisson_jumps(&s, &mut substream(7, i)).unwrap();
                assert!(j.jump_points.windows(2).all(|w| w[0] < w[1]));
                j.jump_points.len() as f64
            })
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 50.0).abs() <= 3.0 * (50.0f64 / 2000.0).sqrt(), "mean {mean}");
        assert!((0.9..=1.1).contains(&(var / mean)), "dispersion {}", var / mean);
    }

    /// Binned jump density against `lambda / int lambda`, chi-squared at 1%.
    #[test]
    fn adaptive_density_matches_rate() {
        let (p, g) = grover_path(&GroverProblem::new(64, 1).unwrap()).unwrap();
        let s = adaptive_rate(&p, &g, 0.3, 0.5).unwrap().scaled(0.05);
        let bins = 20;
        let mut hist = vec![0.0f64; bins];
        for i in 0..10_000 {
            for x in sample_poisson_jumps(&s, &mut substream(3, i)).unwrap().jump_points {
                hist[((x * bins as f64) as usize).min(bins - 1)] += 1.0;
            }
        }
        let total: f64 = hist.iter().sum();
        let mass: Vec<f64> = (0..bins)
            .map(|b| {
                let (a, c) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
                crate::quad::composite_simpson(|x| s.lambda(x), a, c, 200)
            })
            .collect();
        let msum: f64 = mass.iter().sum();
        let chi2: f64 = hist
            .iter()
            .zip(&mass)
            .map(|(o, m)| {
                let e = total * m / msum;
                (o - e).powi(2) / e
            })
            .sum();
        // 99th percentile of chi-squared with 19 degrees of freedom.
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }
}
