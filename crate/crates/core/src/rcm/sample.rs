//! Sampling the model on [0, L)² and its text format.
//!
//! Format: a `rcm-sample` line, then `side`, `kernel`, `gamma`, `beta`,
//! `delta`, `seed` header lines; `points N` followed by N lines `x y s`;
//! `edges M` followed by M lines `i j`. Reals are written in shortest
//! round-trip form, so a parsed sample equals its regeneration bit for bit.

use std::io::{BufRead, Write};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{Kernel, KernelKind, PowerProfile, ProfileFunction};
use crate::error::{Error, Result};

const MAGIC: &str = "rcm-sample";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RcmPoint {
    pub position: [f64; 2],
    /// Weight parameter in (0, 1).
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RcmSample {
    pub side: f64,
    pub kernel: Kernel,
    pub profile: PowerProfile,
    pub seed: u64,
    pub points: Vec<RcmPoint>,
    /// Pairs i < j, lexicographic.
    pub edges: Vec<(usize, usize)>,
}

impl RcmSample {
    /// ρ(g(s_i, s_j)·‖x_i − x_j‖²), Euclidean.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        pair_probability(&self.kernel, &self.profile, &self.points[i], &self.points[j])
    }

    /// Draws the sample again from its header.
    pub fn regenerate(&self) -> Result<RcmSample> {
        sample_rcm(self.side, self.kernel, self.profile, self.seed)
    }
}

fn pair_probability(kernel: &Kernel, profile: &PowerProfile, a: &RcmPoint, b: &RcmPoint) -> f64 {
    let dx = a.position[0] - b.position[0];
    let dy = a.position[1] - b.position[1];
    profile.eval(kernel.value(a.weight, b.weight) * (dx * dx + dy * dy))
}

/// Poisson(L²) points uniform on [0, L)² with uniform weight parameters;
/// then one uniform per pair (i < j, lexicographic) decides each edge.
pub fn sample_rcm(side: f64, kernel: Kernel, profile: PowerProfile, seed: u64) -> Result<RcmSample> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::invalid(format!("side {side} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = Poisson::new(side * side)
        .map_err(|e| Error::invalid(format!("Poisson intensity {}: {e}", side * side)))?
        .sample(&mut rng) as usize;
    let points: Vec<RcmPoint> = (0..count)
        .map(|_| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            let weight: f64 = rng.sample(Open01);
            RcmPoint { position: [x, y], weight }
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..count {
        for j in i + 1..count {
            let u: f64 = rng.random();
            if u < pair_probability(&kernel, &profile, &points[i], &points[j]) {
                edges.push((i, j));
            }
        }
    }
    Ok(RcmSample { side, kernel, profile, seed, points, edges })
}

pub fn write_sample<W: Write>(out: &mut W, sample: &RcmSample) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "side {:e}", sample.side)?;
    writeln!(out, "kernel {}", sample.kernel.kind())?;
    writeln!(out, "gamma {:e}", sample.kernel.gamma())?;
    writeln!(out, "beta {:e}", sample.kernel.beta())?;
    writeln!(out, "delta {:e}", sample.profile.delta())?;
    writeln!(out, "seed {}", sample.seed)?;
    writeln!(out, "points {}", sample.points.len())?;
    for p in &sample.points {
        writeln!(out, "{:e} {:e} {:e}", p.position[0], p.position[1], p.weight)?;
    }
    writeln!(out, "edges {}", sample.edges.len())?;
    for (i, j) in &sample.edges {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

struct Lines<I> {
    inner: I,
    line: usize,
}

impl<I: Iterator<Item = std::io::Result<String>>> Lines<I> {
    fn next_line(&mut self) -> Result<String> {
        loop {
            let text = self
                .inner
                .next()
                .ok_or_else(|| Error::parse(self.line, "unexpected end of input"))??;
            self.line += 1;
            if !text.trim().is_empty() {
                return Ok(text);
            }
        }
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let text = self.next_line()?;
        let mut toks = text.split_whitespace();
        if toks.next() != Some(key) {
            return Err(Error::parse(self.line, format!("expected '{key}'")));
        }
        let value = toks.next().ok_or_else(|| Error::parse(self.line, format!("'{key}' needs a value")))?;
        if toks.next().is_some() {
            return Err(Error::parse(self.line, "trailing tokens"));
        }
        value
            .parse()
            .map_err(|_| Error::parse(self.line, format!("bad value '{value}' for '{key}'")))
    }

    fn row<T: std::str::FromStr>(&mut self, width: usize) -> Result<Vec<T>> {
        let text = self.next_line()?;
        let values: Vec<T> = text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(self.line, format!("bad number '{t}'"))))
            .collect::<Result<_>>()?;
        if values.len() != width {
            return Err(Error::parse(self.line, format!("expected {width} values")));
        }
        Ok(values)
    }
}

pub fn read_sample<R: BufRead>(input: R) -> Result<RcmSample> {
    let mut lines = Lines { inner: input.lines(), line: 0 };
    if lines.next_line()?.trim() != MAGIC {
        return Err(Error::parse(lines.line, format!("expected '{MAGIC}'")));
    }
    let side: f64 = lines.field("side")?;
    let kind: KernelKind = lines.field::<String>("kernel")?.parse()?;
    let gamma: f64 = lines.field("gamma")?;
    let beta: f64 = lines.field("beta")?;
    let delta: f64 = lines.field("delta")?;
    let seed: u64 = lines.field("seed")?;
    let kernel = Kernel::new(kind, gamma, beta)?;
    let profile = PowerProfile::new(delta)?;

    let n: usize = lines.field("points")?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let v = lines.row::<f64>(3)?;
        if !(v[2] > 0.0 && v[2] < 1.0) {
            return Err(Error::parse(lines.line, format!("weight parameter {} outside (0, 1)", v[2])));
        }
        points.push(RcmPoint { position: [v[0], v[1]], weight: v[2] });
    }
    let m: usize = lines.field("edges")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let v = lines.row::<usize>(2)?;
        if v[0] >= v[1] || v[1] >= n {
            return Err(Error::parse(lines.line, format!("bad edge {} {}", v[0], v[1])));
        }
        edges.push((v[0], v[1]));
    }
    Ok(RcmSample { side, kernel, profile, seed, points, edges })
}
