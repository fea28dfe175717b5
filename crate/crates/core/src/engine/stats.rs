use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{invalid, Result, ZenoError};

/// Normal-approximation 95% quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStat {
    pub s: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub trajectories: usize,
    pub mean_fidelity: f64,
    pub stderr_fidelity: f64,
    pub ci95: (f64, f64),
    pub mean_time: f64,
    pub stderr_time: f64,
    pub ci95_time: (f64, f64),
    pub mean_jumps: f64,
    pub stderr_jumps: f64,
    pub checkpoints: Vec<CheckpointStat>,
}

impl EnsembleSummary {
    pub fn mean_infidelity(&self) -> f64 {
        1.0 - self.mean_fidelity
    }
}

fn mean_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample statistics over trajectories. Records are sorted by index first so
/// the result does not depend on the order they were produced in.
pub fn ensemble_statistics(records: &[RunRecord]) -> Result<EnsembleSummary> {
    if records.is_empty() {
        return Err(ZenoError::Empty("ensemble"));
    }
    if records.len() < 2 {
        return Err(invalid("records", "need at least two trajectories"));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.index);
    let (mf, sf) = mean_stderr(sorted.iter().map(|r| r.final_fidelity));
    let (mt, st) = mean_stderr(sorted.iter().map(|r| r.total_evolution_time));
    let (mj, sj) = mean_stderr(sorted.iter().map(|r| r.jump_count as f64));
    let checkpoints = sorted[0]
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &(s, _))| {
            let (mean, stderr) = mean_stderr(sorted.iter().map(move |r| r.checkpoints[k].1));
            CheckpointStat { s, mean, stderr }
        })
        .collect();
    Ok(EnsembleSummary {
        trajectories: records.len(),
        mean_fidelity: mf,
        stderr_fidelity: sf,
        ci95: (mf - Z95 * sf, mf + Z95 * sf),
        mean_time: mt,
        stderr_time: st,
        ci95_time: (mt - Z95 * st, mt + Z95 * st),
        mean_jumps: mj,
        stderr_jumps: sj,
        checkpoints,
    })
}
