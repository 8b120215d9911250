//! Unit flow to infinity through the box chain A_0, A_1, … with
//! A_k = {a_k,…,b_k} × {0,…,2^k−1}^{d−1}.

use super::flow::{Dyadic, FlowAssignment, FlowReport};
use super::WeightedNetwork;
use crate::error::{Error, Result};
use crate::lattice::Norm;
use crate::numerics::CompensatedSum;

/// One box of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageBox {
    pub k: u32,
    /// First coordinate range a_k..=b_k.
    pub first: i64,
    pub last: i64,
    /// Side 2^k of the transverse coordinates.
    pub width: i64,
    pub dim: usize,
}

impl StageBox {
    pub fn size(&self) -> u128 {
        (self.width as u128).pow(self.dim as u32)
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p[0] >= self.first
            && p[0] <= self.last
            && p[1..].iter().all(|&c| (0..self.width).contains(&c))
    }

    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.size() as usize);
        for x in self.first..=self.last {
            if self.dim == 1 {
                out.push(vec![x]);
            } else {
                for y in 0..self.width {
                    out.push(vec![x, y]);
                }
            }
        }
        out
    }
}

/// Uniform flows between whole boxes: every vertex of `from` sends
/// `per_edge` to every vertex of `to`.
#[derive(Clone, Debug)]
pub struct BlockFlow {
    /// Index 0 is the origin, index i ≥ 1 is box A_{K+i−1}.
    pub class_sizes: Vec<u128>,
    pub blocks: Vec<(usize, usize, f64)>,
    pub source_class: usize,
    pub sink_class: usize,
}

impl BlockFlow {
    /// Exact divergence check per vertex class. All vertices of a class see
    /// the same inflow and outflow, so one check per class covers them all.
    pub fn check(&self) -> FlowReport {
        let mut net_out = vec![Dyadic::zero(); self.class_sizes.len()];
        let mut report = FlowReport::default();
        for (i, &(from, to, q)) in self.blocks.iter().enumerate() {
            let Some(dq) = Dyadic::from_f64(q) else {
                report.non_finite.push((from, i));
                continue;
            };
            net_out[from].add_assign(&dq.mul_int(self.class_sizes[to]));
            net_out[to].sub_assign(&dq.mul_int(self.class_sizes[from]));
        }
        for (c, d) in net_out.iter().enumerate() {
            if c != self.source_class && c != self.sink_class && !d.is_zero() {
                report.divergence_violations.push((c, d.clone()));
            }
        }
        report.source_strength = Some(net_out[self.source_class].clone());
        report
    }
}

/// A finite prefix of the chain as an explicit network and flow.
#[derive(Clone, Debug)]
pub struct MaterializedFlow {
    pub network: WeightedNetwork,
    pub flow: FlowAssignment,
    /// Lattice coordinates per vertex; vertex 0 is the origin.
    pub points: Vec<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct Theorem1Flow {
    pub dim: usize,
    pub exponent: f64,
    pub start: u32,
    pub last_stage: u32,
    pub norm: Norm,
    /// A_K, …, A_{k_max+1}.
    pub boxes: Vec<StageBox>,
    /// Energy of the entry flow from the origin into A_K.
    pub entry_energy: f64,
    /// (k, E_k) for the flow from A_k to A_{k+1}, k = K..=k_max.
    pub stage_energies: Vec<(u32, f64)>,
}

/// a_k and b_k for k = 0..=k_last.
fn box_ranges(k_last: u32) -> Result<Vec<(i64, i64)>> {
    let mut out = vec![(0i64, 0i64)];
    for k in 0..k_last {
        let (_, b) = out[k as usize];
        let step = 1i64.checked_shl(k + 1).ok_or(Error::Overflow)?;
        let a_next = b.checked_add(step).ok_or(Error::Overflow)?;
        let b_next = a_next.checked_add(step - 1).ok_or(Error::Overflow)?;
        out.push((a_next, b_next));
    }
    Ok(out)
}

fn stage_box(k: u32, ranges: &[(i64, i64)], dim: usize) -> StageBox {
    let (first, last) = ranges[k as usize];
    StageBox {
        k,
        first,
        last,
        width: 1i64 << k,
        dim,
    }
}

/// #{(x, y) ∈ [x0,x1] × [y0,y1] : y − x = δ}.
fn difference_count(x0: i64, x1: i64, y0: i64, y1: i64, delta: i64) -> u128 {
    let lo = x0.max(y0 - delta);
    let hi = x1.min(y1 - delta);
    if hi < lo {
        0
    } else {
        (hi - lo + 1) as u128
    }
}

/// Multiplicities of |y − x| for x ∈ [x0,x1], y ∈ [y0,y1], indexed by |δ|.
fn abs_difference_counts(x0: i64, x1: i64, y0: i64, y1: i64) -> Vec<u128> {
    let dmin = y0 - x1;
    let dmax = y1 - x0;
    let top = dmin.abs().max(dmax.abs()) as usize;
    let mut out = vec![0u128; top + 1];
    for delta in dmin..=dmax {
        out[delta.unsigned_abs() as usize] += difference_count(x0, x1, y0, y1, delta);
    }
    out
}

/// Σ_{x ∈ P, y ∈ Q} ‖y − x‖^s for two product boxes given by their
/// per-coordinate ranges.
pub(crate) fn pair_power_sum(
    from: &[(i64, i64)],
    to: &[(i64, i64)],
    s: f64,
    norm: Norm,
) -> f64 {
    let counts: Vec<Vec<u128>> = from
        .iter()
        .zip(to)
        .map(|(&(x0, x1), &(y0, y1))| abs_difference_counts(x0, x1, y0, y1))
        .collect();
    match (norm, counts.len()) {
        (_, 1) => counts[0]
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(t, &m)| m as f64 * (t as f64).powf(s))
            .collect::<CompensatedSum>()
            .value(),
        (Norm::Max, 2) => {
            // count(max(|δ1|,|δ2|) ≤ t) = M1(t)·M2(t)
            let top = counts[0].len().max(counts[1].len());
            let cum = |c: &Vec<u128>| {
                let mut acc = 0u128;
                (0..top)
                    .map(|t| {
                        acc += c.get(t).copied().unwrap_or(0);
                        acc
                    })
                    .collect::<Vec<u128>>()
            };
            let (m1, m2) = (cum(&counts[0]), cum(&counts[1]));
            let mut prev = 0u128;
            let mut sum = CompensatedSum::new();
            for t in 0..top {
                let now = m1[t] * m2[t];
                let exact = now - prev;
                if exact > 0 && t > 0 {
                    sum.add(exact as f64 * (t as f64).powf(s));
                }
                prev = now;
            }
            sum.value()
        }
        (Norm::Euclidean, 2) => {
            let mut sum = CompensatedSum::new();
            for (t1, &m1) in counts[0].iter().enumerate().filter(|(_, &m)| m > 0) {
                for (t2, &m2) in counts[1].iter().enumerate().filter(|(_, &m)| m > 0) {
                    if t1 == 0 && t2 == 0 {
                        continue;
                    }
                    let r = ((t1 * t1 + t2 * t2) as f64).sqrt();
                    sum.add((m1 * m2) as f64 * r.powf(s));
                }
            }
            sum.value()
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

fn ranges_of(b: &StageBox) -> Vec<(i64, i64)> {
    let mut r = vec![(b.first, b.last)];
    for _ in 1..b.dim {
        r.push((0, b.width - 1));
    }
    r
}

/// Builds the chain for d ∈ {1,2}, d < s < 2d, from box A_K through
/// stage k_max, with conductances c = ‖x−y‖^{−s}.
pub fn theorem1_flow(dim: usize, s: f64, start: u32, last_stage: u32) -> Result<Theorem1Flow> {
    theorem1_flow_with_norm(dim, s, start, last_stage, Norm::Max)
}

pub fn theorem1_flow_with_norm(
    dim: usize,
    s: f64,
    start: u32,
    last_stage: u32,
    norm: Norm,
) -> Result<Theorem1Flow> {
    if !(1..=2).contains(&dim) {
        return Err(Error::invalid("dimension must be 1 or 2"));
    }
    if !(s > dim as f64 && s < 2.0 * dim as f64) {
        return Err(Error::invalid(format!(
            "exponent s = {s} must satisfy {dim} < s < {}",
            2 * dim
        )));
    }
    if last_stage <= start {
        return Err(Error::invalid("last stage must exceed the start stage"));
    }
    if last_stage > 40 {
        return Err(Error::invalid("last stage above 40 is out of range"));
    }
    let ranges = box_ranges(last_stage + 1)?;
    let boxes: Vec<StageBox> = (start..=last_stage + 1)
        .map(|k| stage_box(k, &ranges, dim))
        .collect();

    let entry_energy = if start == 0 {
        0.0
    } else {
        let target = &boxes[0];
        let q = 1.0 / target.size() as f64;
        let origin: Vec<(i64, i64)> = vec![(0, 0); dim];
        q * q * pair_power_sum(&origin, &ranges_of(target), s, norm)
    };
    let stage_energies = boxes
        .windows(2)
        .map(|w| {
            let q = 1.0 / (w[0].size() as f64 * w[1].size() as f64);
            (w[0].k, q * q * pair_power_sum(&ranges_of(&w[0]), &ranges_of(&w[1]), s, norm))
        })
        .collect();
    Ok(Theorem1Flow {
        dim,
        exponent: s,
        start,
        last_stage,
        norm,
        boxes,
        entry_energy,
        stage_energies,
    })
}

impl Theorem1Flow {
    pub fn total_energy(&self) -> f64 {
        let mut s = CompensatedSum::new();
        s.add(self.entry_energy);
        for &(_, e) in &self.stage_energies {
            s.add(e);
        }
        s.value()
    }

    /// Stage ratios E_{k+1}/E_k as (k, ratio).
    pub fn stage_ratios(&self) -> Vec<(u32, f64)> {
        self.stage_energies
            .windows(2)
            .map(|w| (w[0].0, w[1].1 / w[0].1))
            .collect()
    }

    /// Asymptotic stage ratio 2^{s−2d}.
    pub fn limiting_ratio(&self) -> f64 {
        2f64.powf(self.exponent - 2.0 * self.dim as f64)
    }

    /// C' = E_K / 2^{K(s−2d)}.
    pub fn fitted_constant(&self) -> f64 {
        let (k, e) = self.stage_energies[0];
        e / 2f64.powf(k as f64 * (self.exponent - 2.0 * self.dim as f64))
    }

    /// Uniform-block description of the whole flow.
    pub fn block_flow(&self) -> BlockFlow {
        let mut class_sizes = vec![1u128];
        class_sizes.extend(self.boxes.iter().map(|b| b.size()));
        let mut blocks = Vec::new();
        if self.start > 0 {
            blocks.push((0, 1, 1.0 / self.boxes[0].size() as f64));
        }
        for i in 0..self.boxes.len() - 1 {
            let q = 1.0 / (self.boxes[i].size() as f64 * self.boxes[i + 1].size() as f64);
            blocks.push((i + 1, i + 2, q));
        }
        BlockFlow {
            class_sizes,
            blocks,
            source_class: if self.start > 0 { 0 } else { 1 },
            sink_class: self.boxes.len(),
        }
    }

    /// Explicit network and flow for stages K..=`through`, with sink set
    /// A_{through+1}.
    pub fn materialize(&self, through: u32) -> Result<MaterializedFlow> {
        if through < self.start || through > self.last_stage {
            return Err(Error::invalid("materialized stage out of range"));
        }
        let used = (through - self.start + 2) as usize;
        let total: u128 = self.boxes[..used].iter().map(|b| b.size()).sum();
        if total > 1 << 22 {
            return Err(Error::invalid("materialized prefix too large"));
        }
        let mut points: Vec<Vec<i64>> = Vec::new();
        let mut class_ranges = Vec::new();
        if self.start > 0 {
            points.push(vec![0; self.dim]);
        }
        for b in &self.boxes[..used] {
            let begin = points.len();
            points.extend(b.points());
            class_ranges.push(begin..points.len());
        }
        let dist = |a: &[i64], b: &[i64]| -> f64 {
            match self.norm {
                Norm::Max => a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).unsigned_abs())
                    .max()
                    .unwrap_or(0) as f64,
                Norm::Euclidean => a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| ((x - y) as f64).powi(2))
                    .sum::<f64>()
                    .sqrt(),
            }
        };
        let mut net = WeightedNetwork::new(points.len());
        let source = 0;
        let sinks: Vec<usize> = class_ranges[used - 1].clone().collect();
        let mut flow = FlowAssignment::new(source, sinks);
        if self.start > 0 {
            let q = 1.0 / self.boxes[0].size() as f64;
            for y in class_ranges[0].clone() {
                net.add_edge(0, y, dist(&points[0], &points[y]).powf(-self.exponent))?;
                flow.set(0, y, q);
            }
        }
        for i in 0..used - 1 {
            let q = 1.0 / (self.boxes[i].size() as f64 * self.boxes[i + 1].size() as f64);
            for x in class_ranges[i].clone() {
                for y in class_ranges[i + 1].clone() {
                    net.add_edge(x, y, dist(&points[x], &points[y]).powf(-self.exponent))?;
                    flow.set(x, y, q);
                }
            }
        }
        net.set_positions(self.dim, points.clone())?;
        Ok(MaterializedFlow {
            network: net,
            flow,
            points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{check_unit_flow, flow_energy};

    #[test]
    fn first_boxes() {
        let r = box_ranges(3).unwrap();
        assert_eq!(r, vec![(0, 0), (2, 3), (7, 10), (18, 25)]);
        let f = theorem1_flow(2, 3.5, 0, 2).unwrap();
        let a1 = f.boxes[1];
        assert_eq!((a1.first, a1.last, a1.width, a1.size()), (2, 3, 2, 4));
        assert!(a1.contains(&[3, 1]) && !a1.contains(&[3, 2]));
    }

    #[test]
    fn rejects_parameters_outside_the_regime() {
        assert!(theorem1_flow(2, 4.0, 1, 3).is_err());
        assert!(theorem1_flow(2, 2.0, 1, 3).is_err());
        assert!(theorem1_flow(3, 4.0, 1, 3).is_err());
        assert!(theorem1_flow(2, 3.5, 3, 3).is_err());
    }

    fn brute_energy(points_a: &[Vec<i64>], points_b: &[Vec<i64>], s: f64, norm: Norm) -> f64 {
        let q = 1.0 / (points_a.len() as f64 * points_b.len() as f64);
        let mut sum = CompensatedSum::new();
        for x in points_a {
            for y in points_b {
                let d: f64 = match norm {
                    Norm::Max => x.iter().zip(y).map(|(a, b)| (a - b).abs()).max().unwrap() as f64,
                    Norm::Euclidean => x
                        .iter()
                        .zip(y)
                        .map(|(a, b)| ((a - b) as f64).powi(2))
                        .sum::<f64>()
                        .sqrt(),
                };
                sum.add(q * q * d.powf(s));
            }
        }
        sum.value()
    }

    #[test]
    fn stage_energies_match_brute_force() {
        for (dim, s) in [(1usize, 1.5), (2, 3.5), (2, 2.5)] {
            for norm in [Norm::Max, Norm::Euclidean] {
                let f = theorem1_flow_with_norm(dim, s, 1, 4, norm).unwrap();
                for (i, &(_, e)) in f.stage_energies.iter().enumerate() {
                    let b = brute_energy(&f.boxes[i].points(), &f.boxes[i + 1].points(), s, norm);
                    assert!((e - b).abs() <= 1e-12 * b, "{dim} {s} {norm:?} {e} {b}");
                }
                let origin = vec![vec![0; dim]];
                let b = brute_energy(&origin, &f.boxes[0].points(), s, norm);
                assert!((f.entry_energy - b).abs() <= 1e-12 * b);
            }
        }
    }

    #[test]
    fn block_and_explicit_checks_agree() {
        let f = theorem1_flow(2, 3.5, 2, 6).unwrap();
        assert!(f.block_flow().check().is_ok());
        let m = f.materialize(3).unwrap();
        let report = check_unit_flow(&m.flow);
        assert!(report.is_ok(), "{report:?}");
        let explicit = flow_energy(&m.network, &m.flow).unwrap();
        let analytic = f.entry_energy + f.stage_energies[0].1 + f.stage_energies[1].1;
        assert!((explicit - analytic).abs() < 1e-12 * analytic);
    }

    #[test]
    fn broken_block_flow_is_detected() {
        let f = theorem1_flow(2, 3.5, 2, 5).unwrap();
        let mut b = f.block_flow();
        b.blocks[1].2 *= 0.5;
        let r = b.check();
        assert!(!r.is_ok());
        assert_eq!(r.divergence_violations.len(), 2);
    }
}
