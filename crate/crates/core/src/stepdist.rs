//! Symmetric step laws on Z^D: the truncated power law and the
//! discretized Cauchy step.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::lattice::{Norm, Point};
use crate::network::WeightedNetwork;
use crate::numerics::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepKind {
    /// P(x) ∝ ‖x‖^{-exponent} on 0 < ‖x‖∞ ≤ radius.
    PowerLaw {
        exponent: f64,
        radius: u64,
        norm: Norm,
    },
    /// sgn(Y)·⌈|Y|⌉ for a standard Cauchy Y (D = 1 only).
    DiscretizedCauchy,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepKind::PowerLaw {
                exponent,
                radius,
                norm,
            } => write!(f, "power-law(s={exponent}, R={radius}, norm={norm})"),
            StepKind::DiscretizedCauchy => f.write_str("discretized-cauchy"),
        }
    }
}

/// Whether conductances are the probabilities themselves or the
/// unnormalized weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConductanceScale {
    #[default]
    Probability,
    Unnormalized,
}

enum Sampler<const D: usize> {
    /// Alias table over max-norm shells, then a uniform point on the shell.
    Shells(WeightedAliasIndex<f64>),
    /// Alias table over every support point.
    Points(Vec<Point<D>>, WeightedAliasIndex<f64>),
}

pub struct StepDistribution<const D: usize> {
    kind: StepKind,
    normalizer: f64,
    sampler: OnceLock<Sampler<D>>,
}

impl<const D: usize> Clone for StepDistribution<D> {
    fn clone(&self) -> Self {
        StepDistribution {
            kind: self.kind,
            normalizer: self.normalizer,
            sampler: OnceLock::new(),
        }
    }
}

impl<const D: usize> fmt::Debug for StepDistribution<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StepDistribution")
            .field("dim", &D)
            .field("kind", &self.kind)
            .field("normalizer", &self.normalizer)
            .finish()
    }
}

/// Number of points of Z^D with ‖x‖∞ = r.
pub fn shell_size(dim: usize, r: u64) -> f64 {
    if r == 0 {
        return 1.0;
    }
    let outer = (2 * r + 1) as f64;
    let inner = (2 * r - 1) as f64;
    outer.powi(dim as i32) - inner.powi(dim as i32)
}

fn for_each_in_cube<const D: usize>(radius: i64, mut f: impl FnMut(Point<D>)) {
    let side = 2 * radius + 1;
    let total = (side as u64).pow(D as u32);
    for mut i in 0..total {
        let mut c = [0i64; D];
        for k in (0..D).rev() {
            c[k] = (i % side as u64) as i64 - radius;
            i /= side as u64;
        }
        f(Point(c));
    }
}

impl<const D: usize> StepDistribution<D> {
    /// Truncated power law with exponent `s` and support radius `radius`.
    pub fn power_law(s: f64, radius: u64, norm: Norm) -> Result<Self> {
        if D == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !s.is_finite() || s <= D as f64 {
            return Err(Error::invalid(format!(
                "exponent s = {s} must exceed the dimension {D}"
            )));
        }
        if radius < 1 {
            return Err(Error::invalid("truncation radius must be at least 1"));
        }
        if radius > i64::MAX as u64 / 4 {
            return Err(Error::Overflow);
        }
        let normalizer = match norm {
            Norm::Max => (1..=radius)
                .map(|r| shell_size(D, r) * (r as f64).powf(-s))
                .collect::<CompensatedSum>()
                .value(),
            Norm::Euclidean => {
                let mut acc = CompensatedSum::new();
                for_each_in_cube::<D>(radius as i64, |p| {
                    if !p.is_origin() {
                        acc.add(p.norm_euclid().powf(-s));
                    }
                });
                acc.value()
            }
        };
        Ok(StepDistribution {
            kind: StepKind::PowerLaw {
                exponent: s,
                radius,
                norm,
            },
            normalizer,
            sampler: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> StepKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        D
    }

    /// Normalizing constant Z (1 for the Cauchy law).
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Largest ‖x‖∞ with positive mass, if finite.
    pub fn support_radius(&self) -> Option<u64> {
        match self.kind {
            StepKind::PowerLaw { radius, .. } => Some(radius),
            StepKind::DiscretizedCauchy => None,
        }
    }

    /// Unnormalized weight: ‖x‖^{-s}, or π·P(x) for the Cauchy law.
    pub fn weight(&self, x: &Point<D>) -> f64 {
        if x.is_origin() {
            return 0.0;
        }
        match self.kind {
            StepKind::PowerLaw {
                exponent,
                radius,
                norm,
            } => {
                if x.norm_max() > radius {
                    0.0
                } else {
                    x.norm(norm).powf(-exponent)
                }
            }
            StepKind::DiscretizedCauchy => {
                let a = x.0[0].unsigned_abs() as f64;
                (1.0 / (1.0 + a * (a - 1.0))).atan()
            }
        }
    }

    pub fn pmf(&self, x: &Point<D>) -> f64 {
        self.weight(x) / self.normalizer
    }

    /// P(‖X‖∞ > r).
    pub fn tail_mass(&self, r: u64) -> f64 {
        match self.kind {
            StepKind::DiscretizedCauchy => {
                if r == 0 {
                    1.0
                } else {
                    2.0 / PI * (1.0 / r as f64).atan()
                }
            }
            StepKind::PowerLaw {
                exponent,
                radius,
                norm,
            } => {
                if r >= radius {
                    return 0.0;
                }
                match norm {
                    Norm::Max => {
                        let tail: CompensatedSum = (r + 1..=radius)
                            .map(|k| shell_size(D, k) * (k as f64).powf(-exponent))
                            .collect();
                        tail.value() / self.normalizer
                    }
                    Norm::Euclidean => {
                        let mut acc = CompensatedSum::new();
                        for_each_in_cube::<D>(radius as i64, |p| {
                            if p.norm_max() > r {
                                acc.add(p.norm_euclid().powf(-exponent));
                            }
                        });
                        acc.value() / self.normalizer
                    }
                }
            }
        }
    }

    /// Every support point (power law only).
    pub fn support(&self) -> Option<Vec<Point<D>>> {
        let radius = self.support_radius()? as i64;
        let mut out = Vec::new();
        for_each_in_cube::<D>(radius, |p| {
            if !p.is_origin() {
                out.push(p);
            }
        });
        Some(out)
    }

    fn sampler(&self) -> &Sampler<D> {
        self.sampler.get_or_init(|| match self.kind {
            StepKind::PowerLaw {
                exponent,
                radius,
                norm: Norm::Max,
            } => {
                let w: Vec<f64> = (1..=radius)
                    .map(|r| shell_size(D, r) * (r as f64).powf(-exponent))
                    .collect();
                Sampler::Shells(WeightedAliasIndex::new(w).expect("positive shell weights"))
            }
            StepKind::PowerLaw { .. } => {
                let pts = self.support().expect("finite support");
                let w: Vec<f64> = pts.iter().map(|p| self.weight(p)).collect();
                Sampler::Points(pts, WeightedAliasIndex::new(w).expect("positive weights"))
            }
            StepKind::DiscretizedCauchy => unreachable!("cauchy steps are sampled directly"),
        })
    }

    /// One i.i.d. draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<D> {
        if let StepKind::DiscretizedCauchy = self.kind {
            let mut c = [0i64; D];
            c[0] = sample_discretized_cauchy(rng);
            return Point(c);
        }
        match self.sampler() {
            Sampler::Shells(alias) => {
                let r = alias.sample(rng) as u64 + 1;
                uniform_on_shell::<D, R>(r, rng)
            }
            Sampler::Points(pts, alias) => pts[alias.sample(rng)],
        }
    }
}

impl StepDistribution<1> {
    pub fn discretized_cauchy() -> Self {
        StepDistribution {
            kind: StepKind::DiscretizedCauchy,
            normalizer: PI,
            sampler: OnceLock::new(),
        }
    }

    /// P(X = y) for the one-dimensional law.
    pub fn pmf1(&self, y: i64) -> f64 {
        self.pmf(&Point([y]))
    }
}

/// Y = tan(π(U−½)), then sgn(Y)·⌈|Y|⌉; a zero draw is redrawn.
fn sample_discretized_cauchy<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    loop {
        let u: f64 = rng.random();
        let y = (PI * (u - 0.5)).tan();
        if y == 0.0 {
            continue;
        }
        let m = y.abs().ceil();
        let m = if m >= i64::MAX as f64 { i64::MAX } else { m as i64 };
        return if y > 0.0 { m } else { -m };
    }
}

/// Uniform point of Z^D with ‖x‖∞ = r, r ≥ 1.
fn uniform_on_shell<const D: usize, R: Rng + ?Sized>(r: u64, rng: &mut R) -> Point<D> {
    let ri = r as i64;
    if D == 2 {
        let i = rng.random_range(0..8 * ri);
        let side = i / (2 * ri);
        let t = i % (2 * ri);
        let mut c = [0i64; D];
        let (x, y) = match side {
            0 => (ri, -ri + t),
            1 => (ri - t, ri),
            2 => (-ri, ri - t),
            _ => (-ri + t, -ri),
        };
        c[0] = x;
        c[1] = y;
        return Point(c);
    }
    // The first coordinate attaining |x_j| = r is j with weight (2r−1)^j·2·(2r+1)^{D−1−j}.
    let inner = (2 * r - 1) as f64;
    let outer = (2 * r + 1) as f64;
    let weights: Vec<f64> = (0..D)
        .map(|j| inner.powi(j as i32) * 2.0 * outer.powi((D - 1 - j) as i32))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut j = D - 1;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            j = k;
            break;
        }
        u -= w;
    }
    let mut c = [0i64; D];
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = match k.cmp(&j) {
            std::cmp::Ordering::Less => rng.random_range(-ri + 1..ri),
            std::cmp::Ordering::Equal => {
                if rng.random::<bool>() {
                    ri
                } else {
                    -ri
                }
            }
            std::cmp::Ordering::Greater => rng.random_range(-ri..=ri),
        };
    }
    Point(c)
}

/// Total-variation distance between two truncated power laws.
pub fn total_variation<const D: usize>(
    a: &StepDistribution<D>,
    b: &StepDistribution<D>,
) -> Result<f64> {
    let ra = a
        .support_radius()
        .ok_or_else(|| Error::invalid("finite support required"))?;
    let rb = b
        .support_radius()
        .ok_or_else(|| Error::invalid("finite support required"))?;
    let radius = ra.max(rb) as i64;
    let mut acc = CompensatedSum::new();
    for_each_in_cube::<D>(radius, |p| {
        acc.add((a.pmf(&p) - b.pmf(&p)).abs());
    });
    Ok(0.5 * acc.value())
}

/// Complete graph on `window` with c_{a,b} = P(a − b) (or the unnormalized weight).
pub fn as_conductances<const D: usize>(
    dist: &StepDistribution<D>,
    window: &[Point<D>],
    scale: ConductanceScale,
) -> Result<WeightedNetwork> {
    let mut net = WeightedNetwork::new(window.len());
    for (i, a) in window.iter().enumerate() {
        for (j, b) in window.iter().enumerate().skip(i + 1) {
            let diff = a.checked_sub(b)?;
            let c = match scale {
                ConductanceScale::Probability => dist.pmf(&diff),
                ConductanceScale::Unnormalized => dist.weight(&diff),
            };
            net.add_edge(i, j, c)?;
        }
    }
    net.set_positions(D, window.iter().map(|p| p.0.to_vec()).collect())?;
    Ok(net)
}
