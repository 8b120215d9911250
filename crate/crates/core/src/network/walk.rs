use std::collections::HashSet;

use rand::Rng;

use super::WeightedNetwork;
use crate::error::{Error, Result};
use crate::walks::{TrialSummary, WalkStats};

/// Trajectory of the reversible chain P(y → x) = c_{x,y} / Σ_{e ∋ y} c_e.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkWalk {
    pub trajectory: Vec<usize>,
    pub stats: WalkStats,
}

/// Runs `steps` steps from `start`. A vertex with no positive incident
/// conductance is absorbing. Displacements use vertex positions (∞-norm)
/// when the network carries them.
pub fn walk_on_network<R: Rng + ?Sized>(
    net: &WeightedNetwork,
    start: usize,
    steps: u64,
    rng: &mut R,
) -> Result<NetworkWalk> {
    if start >= net.vertex_count() {
        return Err(Error::invalid(format!("start vertex {start} out of range")));
    }
    let adj = net.adjacency();
    let mut trajectory = Vec::with_capacity(steps as usize + 1);
    trajectory.push(start);
    let mut cumulative: Vec<f64> = Vec::new();
    let mut here = start;
    for _ in 0..steps {
        let (targets, weights) = adj.slices(here);
        if !targets.is_empty() {
            cumulative.clear();
            let mut acc = 0.0;
            for &w in weights {
                acc += w;
                cumulative.push(acc);
            }
            let u = rng.random::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= u).min(targets.len() - 1);
            here = targets[k];
        }
        trajectory.push(here);
    }

    let displacement = |v: usize| -> u64 {
        net.positions().map_or(0, |p| {
            p.of(v)
                .iter()
                .zip(p.of(start))
                .map(|(a, b)| (a - b).unsigned_abs())
                .max()
                .unwrap_or(0)
        })
    };
    let visits = trajectory.iter().filter(|&&v| v == start).count() as u64;
    let distinct = trajectory.iter().collect::<HashSet<_>>().len() as u64;
    let max_displacement = trajectory.iter().map(|&v| displacement(v)).max().unwrap_or(0);
    let final_position = net
        .positions()
        .map_or_else(Vec::new, |p| p.of(here).to_vec());
    let summary = TrialSummary {
        visits_to_origin: visits,
        distinct_sites: distinct,
        max_displacement,
        final_position,
    };
    Ok(NetworkWalk {
        trajectory,
        stats: WalkStats::from_trials(steps, vec![summary], &[], &[]),
    })
}
