//! Collapse of a sample onto unit cells of Z², and walks on the result.
//!
//! The model lives on R² with Euclidean distances; once collapsed, cells are
//! lattice vertices and displacements are measured in the ∞-norm.

use std::collections::BTreeMap;

use rand::Rng;

use super::RcmSample;
use crate::error::{Error, Result};
use crate::network::{walk_on_network, WeightedNetwork};
use crate::walks::WalkStats;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteRcm {
    /// One vertex per cell v + [0, 1)², v ∈ {0, …, n − 1}², row-major.
    pub network: WeightedNetwork,
    pub cells_per_side: usize,
    pub side: f64,
    /// Cells without any inter-cell edge.
    pub isolated: Vec<usize>,
    pub inter_cell_edges: usize,
    /// Edges with both ends in one cell, which disappear.
    pub internal_edges: usize,
}

impl DiscreteRcm {
    pub fn cell(&self, v: usize) -> [usize; 2] {
        [v / self.cells_per_side, v % self.cells_per_side]
    }

    pub fn vertex(&self, cell: [usize; 2]) -> usize {
        cell[0] * self.cells_per_side + cell[1]
    }

    /// Boundary margin excluded from sampled-graph statistics: ⌈L/10⌉ cells.
    pub fn margin(&self) -> usize {
        (self.side / 10.0).ceil() as usize
    }

    pub fn is_interior(&self, v: usize) -> bool {
        let m = self.margin();
        let n = self.cells_per_side;
        self.cell(v).iter().all(|&c| c >= m && c + m < n)
    }

    pub fn total_weight(&self) -> f64 {
        self.network.edges().iter().map(|e| e.conductance).sum()
    }
}

/// Identifies all points in one unit cell; m parallel inter-cell edges
/// become one edge of conductance m.
pub fn discretize(sample: &RcmSample) -> Result<DiscreteRcm> {
    let n = (sample.side.ceil() as usize).max(1);
    let cell_of = |i: usize| -> usize {
        let p = sample.points[i].position;
        let c = |x: f64| ((x.floor().max(0.0)) as usize).min(n - 1);
        c(p[0]) * n + c(p[1])
    };
    let mut weights: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut internal = 0;
    for &(i, j) in &sample.edges {
        let (a, b) = (cell_of(i), cell_of(j));
        if a == b {
            internal += 1;
        } else {
            *weights.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut network = WeightedNetwork::new(n * n);
    for (&(a, b), &m) in &weights {
        network.add_edge(a, b, m as f64)?;
    }
    let coords = (0..n * n).map(|v| vec![(v / n) as i64, (v % n) as i64]).collect();
    network.set_positions(2, coords)?;
    Ok(DiscreteRcm {
        isolated: network.isolated_vertices(),
        network,
        cells_per_side: n,
        side: sample.side,
        inter_cell_edges: sample.edges.len() - internal,
        internal_edges: internal,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentWalk {
    /// Component label per vertex, labels 0, 1, … in order of first vertex.
    pub labels: Vec<usize>,
    /// Size of each component, indexed by label.
    pub sizes: Vec<usize>,
    pub start: usize,
    pub component_size: usize,
    pub stats: WalkStats,
}

impl ComponentWalk {
    pub fn largest_component(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Components by union-find, then `trials` walks of `steps` steps from the
/// vertex nearest the centre of the positions (vertex 0 without positions).
pub fn components_and_walk<R: Rng + ?Sized>(
    net: &WeightedNetwork,
    steps: u64,
    trials: usize,
    rng: &mut R,
) -> Result<ComponentWalk> {
    if net.vertex_count() == 0 {
        return Err(Error::invalid("network has no vertices"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let labels = net.component_labels();
    let mut sizes = vec![0; labels.iter().max().map_or(0, |m| m + 1)];
    for &l in &labels {
        sizes[l] += 1;
    }
    let start = net.positions().map_or(0, |pos| {
        let dim = pos.dim();
        let centre: Vec<f64> = (0..dim)
            .map(|i| {
                let (lo, hi) = (0..pos.len()).map(|v| pos.of(v)[i]).fold((i64::MAX, i64::MIN), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
                (lo + hi) as f64 / 2.0
            })
            .collect();
        let dist = |v: usize| -> f64 {
            pos.of(v).iter().zip(&centre).map(|(&x, c)| (x as f64 - c).powi(2)).sum()
        };
        (0..pos.len()).min_by(|&a, &b| dist(a).total_cmp(&dist(b))).unwrap_or(0)
    });
    let mut summaries = Vec::with_capacity(trials);
    for _ in 0..trials {
        let walk = walk_on_network(net, start, steps, rng)?;
        summaries.extend(walk.stats.trials);
    }
    Ok(ComponentWalk {
        component_size: sizes[labels[start]],
        labels,
        sizes,
        start,
        stats: WalkStats::from_trials(steps, summaries, &[], &[]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcm::{Kernel, KernelKind, PowerProfile, RcmPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn handmade(points: &[[f64; 2]], edges: Vec<(usize, usize)>) -> RcmSample {
        RcmSample {
            side: 3.0,
            kernel: Kernel::new(KernelKind::Min, 0.0, 1.0).unwrap(),
            profile: PowerProfile::new(2.0).unwrap(),
            seed: 0,
            points: points.iter().map(|&position| RcmPoint { position, weight: 0.5 }).collect(),
            edges,
        }
    }

    #[test]
    fn internal_edges_vanish_and_parallel_edges_add() {
        let pts = [[0.2, 0.3], [0.7, 0.9], [2.5, 0.1], [2.9, 0.8], [1.5, 1.5]];
        let s = handmade(&pts, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        let d = discretize(&s).unwrap();
        assert_eq!(d.cells_per_side, 3);
        assert_eq!(d.internal_edges, 1);
        assert_eq!(d.inter_cell_edges, 4);
        let edges = d.network.edges();
        assert_eq!(edges.len(), 1);
        assert_eq!((edges[0].u, edges[0].v, edges[0].conductance), (0, 6, 4.0));
        assert_eq!(d.cell(6), [2, 0]);
        // the cell holding point 4 has no edges, like the empty ones
        assert_eq!(d.isolated.len(), 7);
        assert!(d.isolated.contains(&d.vertex([1, 1])));
    }

    #[test]
    fn multiplicity_is_conserved() {
        let k = Kernel::new(KernelKind::PreferentialAttachment, 0.4, 1.0).unwrap();
        let s = crate::rcm::sample_rcm(12.0, k, PowerProfile::new(2.5).unwrap(), 5).unwrap();
        let d = discretize(&s).unwrap();
        assert_eq!(d.total_weight(), d.inter_cell_edges as f64);
        assert_eq!(d.internal_edges + d.inter_cell_edges, s.edges.len());
        assert_eq!(d.margin(), 2);
        assert!(d.is_interior(d.vertex([2, 9])) && !d.is_interior(d.vertex([1, 5])));
    }

    #[test]
    fn empty_network_walks_stay_put() {
        let d = discretize(&handmade(&[[0.5, 0.5], [2.5, 2.5]], vec![])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = components_and_walk(&d.network, 50, 3, &mut rng).unwrap();
        assert_eq!(w.sizes, vec![1; 9]);
        assert_eq!(w.start, d.vertex([1, 1]));
        assert_eq!(w.component_size, 1);
        assert!(w.stats.trials.iter().all(|t| t.visits_to_origin == 51 && t.max_displacement == 0));
    }

    #[test]
    fn components_partition_vertices() {
        let k = Kernel::new(KernelKind::Min, 0.3, 1.0).unwrap();
        let rho = PowerProfile::new(2.0).unwrap();
        let d = discretize(&crate::rcm::sample_rcm(10.0, k, rho, 2).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = components_and_walk(&d.network, 200, 4, &mut rng).unwrap();
        assert_eq!(w.sizes.iter().sum::<usize>(), d.network.vertex_count());
        assert_eq!(w.stats.trial_count(), 4);
        assert!(w.stats.trials.iter().all(|t| t.visits_to_origin >= 1));

        // sparse edges leave small components
        let sparse = Kernel::new(KernelKind::Min, 0.3, 0.05).unwrap();
        let d = discretize(&crate::rcm::sample_rcm(10.0, sparse, rho, 2).unwrap()).unwrap();
        let w = components_and_walk(&d.network, 10, 1, &mut rng).unwrap();
        assert!(w.largest_component() * 4 < d.network.vertex_count(), "{}", w.largest_component());
    }
}
