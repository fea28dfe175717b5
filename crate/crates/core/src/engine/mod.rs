//! Stochastic trajectories, the averaged (marginal) dynamics and ensemble
//! statistics.

mod jumps;
mod noise;
mod ode;
mod reduce;
pub mod rng;
mod sampler;
mod stats;

pub use jumps::{rate_bound, sample_poisson_jumps, JumpSample, RATE_BOUND_MARGIN};
pub use noise::{noisy_propagator, random_hermitian, NoiseDelta, NoiseDirection, NoiseEvent, NoiseSpec};
pub use ode::{run_marginal_ode, run_marginal_ode_in, OdeOptions, OdeResult, DEFAULT_STEP_TOL};
pub use reduce::InvariantSubspace;
pub use sampler::TauSampler;
pub use stats::{ensemble_statistics, CheckpointStat, EnsembleSummary};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operator::{
    dephase_matrix, projector_onto, trace_product, CMat, CVec, DensityMatrix, Projector,
    SpectralInfo, C64,
};
use crate::paths::{GapModel, HamiltonianPath, LinearPath};
use crate::schedule::{Schedule, T0};
use rng::{noise_substream, substream, ZenoRng, RNG_ALGORITHM};

/// Points where trajectories and the ODE report the fidelity for comparison.
pub const DEFAULT_CHECKPOINTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// A path, its gap model and an initial state, restricted to an invariant
/// subspace (or the full space).
pub struct Simulation<'a> {
    path: &'a dyn HamiltonianPath,
    gap: GapModel,
    sub: InvariantSubspace,
    reduced: LinearPath,
    rho0: DensityMatrix,
    checkpoints: Vec<(f64, Projector)>,
}

/// Evolving state of one trajectory.
#[derive(Clone, Debug)]
enum State {
    Mixed(CMat),
    Pure(CVec),
}

impl State {
    fn fidelity(&self, p: &Projector) -> f64 {
        match self {
            State::Mixed(m) => trace_product(p.matrix(), m).re,
            State::Pure(v) => p.expectation(v),
        }
    }
}

impl<'a> Simulation<'a> {
    /// Works in the smallest invariant subspace containing `rho0`.
    pub fn new(path: &'a dyn HamiltonianPath, gap: &GapModel, rho0: &DensityMatrix) -> Result<Self> {
        let sub = InvariantSubspace::for_state(path, rho0);
        Self::with_subspace(path, gap, rho0, sub)
    }

    /// Works in the full Hilbert space.
    pub fn full(path: &'a dyn HamiltonianPath, gap: &GapModel, rho0: &DensityMatrix) -> Result<Self> {
        Self::with_subspace(path, gap, rho0, InvariantSubspace::full(path.dim()))
    }

    fn with_subspace(
        path: &'a dyn HamiltonianPath,
        gap: &GapModel,
        rho0: &DensityMatrix,
        sub: InvariantSubspace,
    ) -> Result<Self> {
        if rho0.dim() != path.dim() {
            return Err(crate::error::ZenoError::DimensionMismatch {
                expected: path.dim(),
                got: rho0.dim(),
            });
        }
        let reduced = sub.restrict_path(path)?;
        let rho0 = sub.restrict_state(rho0);
        let mut sim = Self {
            path,
            gap: gap.clone(),
            sub,
            reduced,
            rho0,
            checkpoints: Vec::new(),
        };
        sim.checkpoints = DEFAULT_CHECKPOINTS
            .iter()
            .map(|&s| sim.projector(s).map(|p| (s, p)))
            .collect::<Result<_>>()?;
        Ok(sim)
    }

    pub fn path(&self) -> &dyn HamiltonianPath {
        self.path
    }

    pub fn gap(&self) -> &GapModel {
        &self.gap
    }

    pub fn subspace(&self) -> &InvariantSubspace {
        &self.sub
    }

    pub fn working_dim(&self) -> usize {
        self.sub.dim()
    }

    /// Initial state restricted to the working space.
    pub fn initial_state(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub(crate) fn spectral(&self, s: f64) -> SpectralInfo {
        use crate::paths::HamiltonianPath as _;
        self.reduced.evaluate(s).spectral()
    }

    pub(crate) fn projector_from(&self, spec: &SpectralInfo, s: f64) -> Result<Projector> {
        projector_onto(spec, self.gap.omega0(s), 0.5 * self.gap.delta(s)).map_err(|e| {
            crate::error::ZenoError::Tracking {
                s,
                reason: e.to_string(),
            }
        })
    }

    /// Tracked spectral projector `P(s)` in the working space.
    pub fn projector(&self, s: f64) -> Result<Projector> {
        self.projector_from(&self.spectral(s), s)
    }

    /// `Tr(P(1) rho)` for a working-space density matrix.
    pub fn final_fidelity(&self, rho: &CMat) -> f64 {
        let p = &self.checkpoints[self.checkpoints.len() - 1].1;
        trace_product(p.matrix(), rho).re
    }

    /// Initial state as a working-space vector when it is pure.
    fn pure_initial(&self) -> Option<CVec> {
        let eig = self.rho0.matrix().clone().symmetric_eigen();
        let (i, top) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        if (top - 1.0).abs() < 1e-10 {
            Some(eig.eigenvectors.column(i).into_owned())
        } else {
            None
        }
    }

    fn initial(&self, sampler: &TauSampler) -> Result<State> {
        Ok(match sampler {
            TauSampler::IdealDephase => State::Mixed(self.rho0.matrix().clone()),
            TauSampler::Gaussian { .. } => State::Pure(self.pure_initial().ok_or_else(|| {
                invalid("rho0", "the gaussian sampler evolves state vectors; start from a pure state")
            })?),
        })
    }
}

/// Outcome of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub index: u64,
    pub rng: String,
    pub sampler: String,
    pub jump_count: usize,
    /// Sum of `|tau|` in physical time units (imputed `T0/Delta` for the
    /// ideal sampler).
    pub total_evolution_time: f64,
    /// `(s, Tr(P(s) rho), cumulative time)` at `s = 0`, after every jump and at `s = 1`.
    pub fidelity_trace: Vec<(f64, f64, f64)>,
    /// `(s, Tr(P(s) rho(s)))` at [`DEFAULT_CHECKPOINTS`].
    pub checkpoints: Vec<(f64, f64)>,
    pub final_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<Vec<NoiseEvent>>,
}

impl RunRecord {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.final_fidelity
    }
}

/// Per-jump hook applying any extra operation after the ideal step.
trait JumpHook {
    fn apply(&mut self, s: f64, state: &mut State, u: Option<&CMat>) -> Result<()>;
}

struct NoHook;

impl JumpHook for NoHook {
    fn apply(&mut self, _: f64, _: &mut State, _: Option<&CMat>) -> Result<()> {
        Ok(())
    }
}

fn simulate(
    sim: &Simulation,
    sched: &Schedule,
    sampler: &TauSampler,
    seed: u64,
    index: u64,
    hook: &mut dyn JumpHook,
) -> Result<RunRecord> {
    let mut rng: ZenoRng = substream(seed, index);
    let jumps = sample_poisson_jumps(sched, &mut rng)?;
    let mut state = sim.initial(sampler)?;
    let p0 = sim.projector(0.0)?;
    let mut time = 0.0;
    let mut trace = vec![(0.0, state.fidelity(&p0), 0.0)];
    let mut checkpoints = Vec::with_capacity(sim.checkpoints.len());
    let mut next_cp = 0;
    for &s in &jumps.jump_points {
        while next_cp < sim.checkpoints.len() && sim.checkpoints[next_cp].0 < s {
            let (c, p) = &sim.checkpoints[next_cp];
            checkpoints.push((*c, state.fidelity(p)));
            next_cp += 1;
        }
        let spec = sim.spectral(s);
        let p = sim.projector_from(&spec, s)?;
        let delta = sim.gap.delta(s);
        let u = match (&mut state, sampler) {
            (State::Mixed(m), TauSampler::IdealDephase) => {
                *m = dephase_matrix(m, p.matrix());
                time += T0 / delta;
                None
            }
            (State::Pure(v), TauSampler::Gaussian { .. }) => {
                let tau = sampler.sample_tau(delta, &mut rng);
                let u = spec.function(|w| C64::new(0.0, -w * tau).exp());
                *v = &u * &*v;
                time += tau.abs();
                Some(u)
            }
            _ => unreachable!("state kind follows the sampler"),
        };
        hook.apply(s, &mut state, u.as_ref())?;
        trace.push((s, state.fidelity(&p), time));
    }
    while next_cp < sim.checkpoints.len() {
        let (c, p) = &sim.checkpoints[next_cp];
        checkpoints.push((*c, state.fidelity(p)));
        next_cp += 1;
    }
    let final_fidelity = checkpoints.last().map(|c| c.1).unwrap_or(f64::NAN);
    trace.push((1.0, final_fidelity, time));
    Ok(RunRecord {
        seed,
        index,
        rng: RNG_ALGORITHM.to_string(),
        sampler: sampler.name().to_string(),
        jump_count: jumps.jump_points.len(),
        total_evolution_time: time,
        fidelity_trace: trace,
        checkpoints,
        final_fidelity,
        noise: None,
    })
}

/// One realisation of the randomised-dephasing walk along the path.
pub fn run_trajectory_in(
    sim: &Simulation,
    sched: &Schedule,
    sampler: &TauSampler,
    seed: u64,
    index: u64,
) -> Result<RunRecord> {
    simulate(sim, sched, sampler, seed, index, &mut NoHook)
}

/// Single trajectory from a state vector, with the subspace reduction done
/// here.
pub fn run_trajectory(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    sched: &Schedule,
    sampler: &TauSampler,
    psi0: &CVec,
    seed: u64,
) -> Result<RunRecord> {
    let rho0 = DensityMatrix::pure(psi0);
    let sim = Simulation::new(path, gap, &rho0)?;
    run_trajectory_in(&sim, sched, sampler, seed, 0)
}

struct NoiseHook<'s> {
    spec: &'s NoiseSpec,
    sched: &'s Schedule,
    rng: ZenoRng,
    fixed: Option<CMat>,
    dim: usize,
    log: Vec<NoiseEvent>,
}

impl JumpHook for NoiseHook<'_> {
    fn apply(&mut self, s: f64, state: &mut State, u: Option<&CMat>) -> Result<()> {
        let delta = self.spec.delta.at(s, self.sched);
        if delta == 0.0 {
            self.log.push(NoiseEvent { s, delta, renormalisation: 1.0 });
            return Ok(());
        }
        let g = match &self.fixed {
            Some(g) => g.clone(),
            None => random_hermitian(self.dim, &mut self.rng),
        };
        let ident = CMat::identity(self.dim, self.dim);
        let base = u.cloned().unwrap_or(ident);
        let a = noisy_propagator(&base, &g, delta);
        let renormalisation = match state {
            State::Pure(v) => {
                let w = &a * &*v;
                let n = w.norm();
                *v = w.unscale(n);
                n
            }
            State::Mixed(m) => {
                let out = &a * &*m * a.adjoint();
                let tr = crate::operator::trace(&out).re;
                *m = crate::operator::hermitize(&out.unscale(tr));
                tr.sqrt()
            }
        };
        self.log.push(NoiseEvent { s, delta, renormalisation });
        Ok(())
    }
}

/// Trajectory in which every jump operation carries an error `E` with
/// `||E|| = delta(s)`. Runs in the space `sim` was built for; random noise
/// directions break invariant subspaces, so build it with [`Simulation::full`].
pub fn run_noisy_trajectory_in(
    sim: &Simulation,
    sched: &Schedule,
    sampler: &TauSampler,
    noise: &NoiseSpec,
    seed: u64,
    index: u64,
) -> Result<RunRecord> {
    let mut hook = NoiseHook {
        spec: noise,
        sched,
        rng: noise_substream(seed, index),
        fixed: match noise.direction {
            NoiseDirection::Fixed { seed } => {
                let mut r = substream(seed, 0);
                Some(random_hermitian(sim.working_dim(), &mut r))
            }
            NoiseDirection::RandomHermitian => None,
        },
        dim: sim.working_dim(),
        log: Vec::new(),
    };
    let mut rec = simulate(sim, sched, sampler, seed, index, &mut hook)?;
    rec.noise = Some(hook.log);
    Ok(rec)
}

/// Noisy trajectory from a state vector. With `delta = 0` this is exactly
/// [`run_trajectory`] plus an all-zero noise log.
pub fn run_noisy_trajectory(
    path: &dyn HamiltonianPath,
    gap: &GapModel,
    sched: &Schedule,
    sampler: &TauSampler,
    noise: &NoiseSpec,
    psi0: &CVec,
    seed: u64,
) -> Result<RunRecord> {
    noise.validate(sched)?;
    let rho0 = DensityMatrix::pure(psi0);
    let sim = if noise.delta.is_zero() {
        Simulation::new(path, gap, &rho0)?
    } else {
        Simulation::full(path, gap, &rho0)?
    };
    run_noisy_trajectory_in(&sim, sched, sampler, noise, seed, 0)
}

/// `trajectories` independent runs, in parallel; records come back in index
/// order regardless of scheduling.
pub fn run_ensemble(
    sim: &Simulation,
    sched: &Schedule,
    sampler: &TauSampler,
    trajectories: usize,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    (0..trajectories as u64)
        .into_par_iter()
        .map(|i| run_trajectory_in(sim, sched, sampler, seed, i))
        .collect()
}

pub fn run_noisy_ensemble(
    sim: &Simulation,
    sched: &Schedule,
    sampler: &TauSampler,
    noise: &NoiseSpec,
    trajectories: usize,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    noise.validate(sched)?;
    (0..trajectories as u64)
        .into_par_iter()
        .map(|i| run_noisy_trajectory_in(sim, sched, sampler, noise, seed, i))
        .collect()
}
