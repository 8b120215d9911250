//! Finite electric networks: conductance solves, flows, the box-chain flow,
//! contraction, walks on weighted graphs and the domination test.

mod domination;
mod flow;
mod io;
mod solve;
mod theorem1;
mod walk;

pub use domination::{
    domination_exact, domination_test, DominationReport, EdgeWeightSampler, ExactDomination,
    TwoPointWeights,
};
pub use flow::{check_unit_flow, flow_energy, Dyadic, FlowAssignment, FlowReport};
pub use io::{read_network, write_network, NetworkDocument};
pub use solve::{
    conjugate_gradient, dirichlet_energy, effective_conductance, effective_conductance_with,
    ConductanceSolution, CsrMatrix, SolveMethod, SolverOptions, SpdOperator,
};
pub use theorem1::{theorem1_flow, BlockFlow, MaterializedFlow, StageBox, Theorem1Flow};
pub use walk::{walk_on_network, NetworkWalk};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

/// Potential values per vertex.
pub type PotentialAssignment = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub conductance: f64,
}

/// Integer coordinates attached to the vertices of lattice-derived networks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positions {
    dim: usize,
    coords: Vec<i64>,
}

impl Positions {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn of(&self, v: usize) -> &[i64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Undirected graph with nonnegative conductances. Parallel edges are allowed
/// and act as one edge carrying the sum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedNetwork {
    vertex_count: usize,
    edges: Vec<Edge>,
    positions: Option<Positions>,
}

/// Neighbour lists restricted to edges with positive conductance.
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Adjacency {
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub(crate) fn slices(&self, v: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[v]..self.offsets[v + 1];
        (&self.targets[r.clone()], &self.weights[r])
    }
}

impl WeightedNetwork {
    pub fn new(vertex_count: usize) -> Self {
        WeightedNetwork {
            vertex_count,
            edges: Vec::new(),
            positions: None,
        }
    }

    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut net = WeightedNetwork::new(vertex_count);
        for (u, v, c) in edges {
            net.add_edge(u, v, c)?;
        }
        Ok(net)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn positions(&self) -> Option<&Positions> {
        self.positions.as_ref()
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertex_count += 1;
        if let Some(p) = self.positions.as_mut() {
            p.coords.extend(std::iter::repeat(0).take(p.dim));
        }
        self.vertex_count - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, conductance: f64) -> Result<()> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(Error::invalid(format!(
                "edge ({u}, {v}) refers to a vertex outside 0..{}",
                self.vertex_count
            )));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {u}")));
        }
        if !(conductance >= 0.0) || !conductance.is_finite() {
            return Err(Error::invalid(format!(
                "conductance {conductance} on edge ({u}, {v}) must be finite and nonnegative"
            )));
        }
        self.edges.push(Edge { u, v, conductance });
        Ok(())
    }

    pub fn set_positions(&mut self, dim: usize, coords: Vec<Vec<i64>>) -> Result<()> {
        if coords.len() != self.vertex_count {
            return Err(Error::invalid(format!(
                "{} positions given for {} vertices",
                coords.len(),
                self.vertex_count
            )));
        }
        let mut flat = Vec::with_capacity(dim * coords.len());
        for c in coords {
            if c.len() != dim {
                return Err(Error::invalid("position of wrong dimension"));
            }
            flat.extend(c);
        }
        self.positions = Some(Positions { dim, coords: flat });
        Ok(())
    }

    pub fn clear_positions(&mut self) {
        self.positions = None;
    }

    /// Same topology with the conductances replaced.
    pub fn with_conductances(&self, conductances: &[f64]) -> Result<Self> {
        if conductances.len() != self.edges.len() {
            return Err(Error::invalid("one conductance per edge required"));
        }
        let mut out = WeightedNetwork {
            vertex_count: self.vertex_count,
            edges: Vec::with_capacity(self.edges.len()),
            positions: self.positions.clone(),
        };
        for (e, &c) in self.edges.iter().zip(conductances) {
            out.add_edge(e.u, e.v, c)?;
        }
        Ok(out)
    }

    /// Σ_{e ∋ v} c_e for every vertex.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertex_count];
        for e in &self.edges {
            w[e.u] += e.conductance;
            w[e.v] += e.conductance;
        }
        w
    }

    /// Vertices whose incident conductances sum to zero.
    pub fn isolated_vertices(&self) -> Vec<usize> {
        self.vertex_weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w == 0.0)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut counts = vec![0usize; self.vertex_count + 1];
        for e in self.edges.iter().filter(|e| e.conductance > 0.0) {
            counts[e.u + 1] += 1;
            counts[e.v + 1] += 1;
        }
        for i in 0..self.vertex_count {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let total = offsets[self.vertex_count];
        let mut targets = vec![0; total];
        let mut weights = vec![0.0; total];
        for e in self.edges.iter().filter(|e| e.conductance > 0.0) {
            targets[fill[e.u]] = e.v;
            weights[fill[e.u]] = e.conductance;
            fill[e.u] += 1;
            targets[fill[e.v]] = e.u;
            weights[fill[e.v]] = e.conductance;
            fill[e.v] += 1;
        }
        Adjacency {
            offsets,
            targets,
            weights,
        }
    }

    /// Connected-component label per vertex, using positive edges only.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count);
        for e in self.edges.iter().filter(|e| e.conductance > 0.0) {
            uf.union(e.u, e.v);
        }
        uf.labels()
    }

    /// Summed conductance per unordered vertex pair.
    pub fn pair_conductances(&self) -> HashMap<(usize, usize), f64> {
        let mut map = HashMap::with_capacity(self.edges.len());
        for e in &self.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            *map.entry(key).or_insert(0.0) += e.conductance;
        }
        map
    }

    /// Merges `set` into one vertex. Edges inside the set are dropped and
    /// parallel edges summed. Returns the new network and the old→new vertex map.
    pub fn contract(&self, set: &[usize]) -> Result<(WeightedNetwork, Vec<usize>)> {
        if set.is_empty() {
            return Err(Error::invalid("contraction set must be nonempty"));
        }
        let mut in_set = vec![false; self.vertex_count];
        for &v in set {
            if v >= self.vertex_count {
                return Err(Error::invalid(format!("vertex {v} out of range")));
            }
            in_set[v] = true;
        }
        let first = *set.iter().min().expect("nonempty");
        let mut map = vec![0; self.vertex_count];
        let mut next = 0;
        for v in 0..self.vertex_count {
            if in_set[v] && v != first {
                continue;
            }
            map[v] = next;
            next += 1;
        }
        for v in 0..self.vertex_count {
            if in_set[v] {
                map[v] = map[first];
            }
        }
        let mut merged: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for e in &self.edges {
            let (a, b) = (map[e.u], map[e.v]);
            if a == b {
                continue;
            }
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += e.conductance;
        }
        let mut out = WeightedNetwork::new(next);
        for ((a, b), c) in merged {
            out.add_edge(a, b, c)?;
        }
        if let Some(p) = &self.positions {
            let mut coords = vec![Vec::new(); next];
            for v in 0..self.vertex_count {
                if !in_set[v] || v == first {
                    coords[map[v]] = p.of(v).to_vec();
                }
            }
            out.set_positions(p.dim, coords)?;
        }
        Ok((out, map))
    }
}

/// Free-function form of [`WeightedNetwork::contract`].
pub fn contract(net: &WeightedNetwork, set: &[usize]) -> Result<(WeightedNetwork, Vec<usize>)> {
    net.contract(set)
}
