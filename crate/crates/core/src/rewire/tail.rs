//! Empirical tails P̂(X > t) and the smallest Cauchy constant they support.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRow {
    pub threshold: f64,
    pub exceed: usize,
    /// P̂(X > threshold).
    pub probability: f64,
    /// threshold · P̂(X > threshold).
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailTable {
    pub samples: usize,
    pub rows: Vec<TailRow>,
    /// Smallest C with P̂(X > C·t) ≤ C/t at every threshold t.
    pub constant: f64,
}

impl TailTable {
    pub fn max_scaled(&self) -> f64 {
        self.rows.iter().map(|r| r.scaled).fold(0.0, f64::max)
    }
}

fn sorted_samples(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    if samples.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid("samples must be finite and nonnegative"));
    }
    let mut s = samples.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    Ok(s)
}

fn exceed(sorted: &[f64], t: f64) -> usize {
    sorted.len() - sorted.partition_point(|&x| x <= t)
}

pub fn cauchy_tail_estimate(samples: &[f64], thresholds: &[f64]) -> Result<TailTable> {
    let sorted = sorted_samples(samples)?;
    if thresholds.is_empty() || thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("thresholds must be positive"));
    }
    let n = sorted.len() as f64;
    let rows = thresholds
        .iter()
        .map(|&t| {
            let k = exceed(&sorted, t);
            let p = k as f64 / n;
            TailRow {
                threshold: t,
                exceed: k,
                probability: p,
                scaled: t * p,
            }
        })
        .collect();

    // P̂(X > C·t) falls and C/t grows with C, so the feasible set is a ray
    let feasible = |c: f64| thresholds.iter().all(|&t| exceed(&sorted, c * t) as f64 / n <= c / t);
    let mut hi = thresholds.iter().copied().fold(1.0, f64::max);
    let mut lo = hi * 1e-15;
    let constant = if feasible(lo) {
        lo
    } else {
        for _ in 0..200 {
            let m = (lo * hi).sqrt();
            if feasible(m) {
                hi = m;
            } else {
                lo = m;
            }
        }
        hi
    };
    Ok(TailTable {
        samples: sorted.len(),
        rows,
        constant,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSampleRow {
    pub threshold: f64,
    pub first: f64,
    pub second: f64,
    /// Difference of the two tail estimates in pooled standard errors.
    pub z: f64,
}

/// Compares P̂(X > t) between two samples at each threshold.
pub fn two_sample_tail_test(first: &[f64], second: &[f64], thresholds: &[f64]) -> Result<Vec<TwoSampleRow>> {
    let (a, b) = (sorted_samples(first)?, sorted_samples(second)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    Ok(thresholds
        .iter()
        .map(|&t| {
            let pa = exceed(&a, t) as f64 / na;
            let pb = exceed(&b, t) as f64 / nb;
            let se = (pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb).sqrt();
            let z = if pa == pb {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                (pa - pb) / se
            };
            TwoSampleRow {
                threshold: t,
                first: pa,
                second: pb,
                z,
            }
        })
        .collect())
}
