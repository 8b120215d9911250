//! Random-walk simulation and finite-scale recurrence diagnostics.

mod convolution;
mod resistance;

pub use convolution::{
    convolve_pmf, convolve_pmf_with, halfmass_check, ConvolutionMethod, ConvolutionOptions,
    ConvolvedPmf, HalfMass, DEFAULT_CAUCHY_RADIUS,
};
pub use resistance::{resistance_growth_diagnostic, GrowthRow, ResistanceGrowth};

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Point;
use crate::numerics::mean_and_se;
use crate::stepdist::StepDistribution;

/// Per-trajectory record.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    /// Times n ∈ {0,…,T} with S_n at the start; at least 1.
    pub visits_to_origin: u64,
    pub distinct_sites: u64,
    /// max_n ‖S_n‖∞, or 0 when no positions are known.
    pub max_displacement: u64,
    pub final_position: Vec<i64>,
}

/// Estimate of P(S_n = 0) across trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnEstimate {
    pub step: u64,
    pub probability: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkStats {
    pub steps: u64,
    pub trials: Vec<TrialSummary>,
    pub checkpoints: Vec<ReturnEstimate>,
}

impl WalkStats {
    pub(crate) fn from_trials(steps: u64, trials: Vec<TrialSummary>, checkpoints: &[u64], hits: &[u64]) -> Self {
        let m = trials.len() as f64;
        let checkpoints = checkpoints
            .iter()
            .zip(hits)
            .map(|(&step, &h)| {
                let p = h as f64 / m;
                ReturnEstimate {
                    step,
                    probability: p,
                    std_error: (p * (1.0 - p) / m).sqrt(),
                }
            })
            .collect();
        WalkStats {
            steps,
            trials,
            checkpoints,
        }
    }

    pub fn trial_count(&self) -> usize {
        self.trials.len()
    }

    /// Mean number of visits to the start and its standard error.
    pub fn mean_visits(&self) -> (f64, f64) {
        let v: Vec<f64> = self.trials.iter().map(|t| t.visits_to_origin as f64).collect();
        mean_and_se(&v)
    }

    pub fn mean_distinct_sites(&self) -> (f64, f64) {
        let v: Vec<f64> = self.trials.iter().map(|t| t.distinct_sites as f64).collect();
        mean_and_se(&v)
    }

    pub fn max_displacement(&self) -> u64 {
        self.trials.iter().map(|t| t.max_displacement).max().unwrap_or(0)
    }

    /// Mean and standard error of each coordinate of S_T.
    pub fn mean_final_position(&self) -> Vec<(f64, f64)> {
        let dim = self.trials.first().map_or(0, |t| t.final_position.len());
        (0..dim)
            .map(|i| {
                let v: Vec<f64> = self.trials.iter().map(|t| t.final_position[i] as f64).collect();
                mean_and_se(&v)
            })
            .collect()
    }
}

/// Reproducible generator for trial `trial` of the experiment seeded by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent walks of `steps` steps from the origin. Trial i
/// uses stream i of the seeded generator, so results do not depend on the
/// thread count.
pub fn simulate<const D: usize>(
    dist: &StepDistribution<D>,
    steps: u64,
    trials: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<WalkStats> {
    if steps == 0 || trials == 0 {
        return Err(Error::invalid("steps and trials must be at least 1"));
    }
    if let Some(&c) = checkpoints.iter().find(|&&c| c > steps) {
        return Err(Error::invalid(format!("checkpoint {c} exceeds the step count {steps}")));
    }
    let runs: Vec<(TrialSummary, Vec<bool>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut pos = Point::<D>::origin();
            let mut visited = HashSet::with_capacity(steps.min(1 << 20) as usize);
            visited.insert(pos);
            let mut visits = 1;
            let mut max_disp = 0;
            let mut at_origin = vec![false; checkpoints.len()];
            for n in 1..=steps {
                let step = dist.sample(&mut rng);
                for (c, s) in pos.0.iter_mut().zip(step.0) {
                    *c = c.saturating_add(s);
                }
                if pos.is_origin() {
                    visits += 1;
                }
                visited.insert(pos);
                max_disp = max_disp.max(pos.norm_max());
                for (flag, &c) in at_origin.iter_mut().zip(checkpoints) {
                    if c == n {
                        *flag = pos.is_origin();
                    }
                }
            }
            (
                TrialSummary {
                    visits_to_origin: visits,
                    distinct_sites: visited.len() as u64,
                    max_displacement: max_disp,
                    final_position: pos.0.to_vec(),
                },
                at_origin,
            )
        })
        .collect();
    let mut hits = vec![0u64; checkpoints.len()];
    let mut summaries = Vec::with_capacity(runs.len());
    for (summary, flags) in runs {
        for (h, f) in hits.iter_mut().zip(flags) {
            *h += f as u64;
        }
        summaries.push(summary);
    }
    Ok(WalkStats::from_trials(steps, summaries, checkpoints, &hits))
}
