//! Random conductances ω with E[ω(e)] ≤ c_e never raise the expected
//! effective conductance above C_eff(c).

use rand::Rng;

use super::{effective_conductance, WeightedNetwork};
use crate::error::{Error, Result};
use crate::numerics::{mean_and_se, CompensatedSum};

/// Relative slack allowed when comparing an exact expectation with the
/// deterministic value; both sides carry solver round-off.
pub const EXACT_ROUNDOFF: f64 = 1e-11;

/// Law of the random weight ω(e) given the deterministic conductance c_e.
pub trait EdgeWeightSampler: Sync {
    fn sample(&self, conductance: f64, rng: &mut dyn rand::RngCore) -> f64;

    /// Finite list of (value, probability) if the law is discrete.
    fn outcomes(&self, conductance: f64) -> Option<Vec<(f64, f64)>>;

    fn mean(&self, conductance: f64) -> f64;
}

/// ω = c/p with probability p, otherwise 0; E[ω] = c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPointWeights {
    p: f64,
}

impl TwoPointWeights {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(format!("success probability {p} outside (0, 1]")));
        }
        Ok(TwoPointWeights { p })
    }

    pub fn probability(&self) -> f64 {
        self.p
    }
}

impl EdgeWeightSampler for TwoPointWeights {
    fn sample(&self, conductance: f64, rng: &mut dyn rand::RngCore) -> f64 {
        if rng.random::<f64>() < self.p {
            conductance / self.p
        } else {
            0.0
        }
    }

    fn outcomes(&self, conductance: f64) -> Option<Vec<(f64, f64)>> {
        if self.p == 1.0 {
            Some(vec![(conductance, 1.0)])
        } else {
            Some(vec![(conductance / self.p, self.p), (0.0, 1.0 - self.p)])
        }
    }

    fn mean(&self, conductance: f64) -> f64 {
        conductance
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominationReport {
    /// C_eff(A ↔ B; c).
    pub baseline: f64,
    /// Monte Carlo mean of C_eff(A ↔ B; ω).
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl DominationReport {
    /// mean ≤ baseline + 3·SE.
    pub fn holds(&self) -> bool {
        self.mean <= self.baseline + 3.0 * self.std_error
    }
}

fn check_sampler(net: &WeightedNetwork, sampler: &dyn EdgeWeightSampler) -> Result<()> {
    for e in net.edges() {
        let m = sampler.mean(e.conductance);
        if m > e.conductance * (1.0 + 1e-15) {
            return Err(Error::invalid(format!(
                "sampler mean {m} exceeds conductance {} on edge ({}, {})",
                e.conductance, e.u, e.v
            )));
        }
    }
    Ok(())
}

pub fn domination_test<R: Rng>(
    net: &WeightedNetwork,
    sampler: &dyn EdgeWeightSampler,
    a: &[usize],
    b: &[usize],
    trials: usize,
    rng: &mut R,
) -> Result<DominationReport> {
    if trials < 2 {
        return Err(Error::invalid("at least two trials are needed for an error bar"));
    }
    check_sampler(net, sampler)?;
    let baseline = effective_conductance(net, a, b)?.value;
    let mut values = Vec::with_capacity(trials);
    let mut omega = vec![0.0; net.edges().len()];
    for _ in 0..trials {
        for (w, e) in omega.iter_mut().zip(net.edges()) {
            *w = sampler.sample(e.conductance, rng);
        }
        let sampled = net.with_conductances(&omega)?;
        values.push(effective_conductance(&sampled, a, b)?.value);
    }
    let (mean, std_error) = mean_and_se(&values);
    Ok(DominationReport {
        baseline,
        mean,
        std_error,
        trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactDomination {
    pub baseline: f64,
    /// E[C_eff(ω)] summed over every outcome.
    pub expectation: f64,
    pub outcomes: u64,
}

impl ExactDomination {
    pub fn holds(&self) -> bool {
        self.expectation <= self.baseline * (1.0 + EXACT_ROUNDOFF) + f64::MIN_POSITIVE
    }
}

/// Enumerates every joint outcome of a discrete sampler (at most 2^20).
pub fn domination_exact(
    net: &WeightedNetwork,
    sampler: &dyn EdgeWeightSampler,
    a: &[usize],
    b: &[usize],
) -> Result<ExactDomination> {
    check_sampler(net, sampler)?;
    let laws: Vec<Vec<(f64, f64)>> = net
        .edges()
        .iter()
        .map(|e| {
            sampler
                .outcomes(e.conductance)
                .ok_or_else(|| Error::invalid("sampler has no finite outcome list"))
        })
        .collect::<Result<_>>()?;
    let total: u128 = laws.iter().map(|l| l.len() as u128).product();
    if total > 1 << 20 {
        return Err(Error::invalid(format!("{total} outcomes exceed the 2^20 limit")));
    }
    let baseline = effective_conductance(net, a, b)?.value;
    let mut digits = vec![0usize; laws.len()];
    let mut omega = vec![0.0; laws.len()];
    let mut expectation = CompensatedSum::new();
    for _ in 0..total {
        let mut prob = 1.0;
        for ((w, law), &d) in omega.iter_mut().zip(&laws).zip(&digits) {
            *w = law[d].0;
            prob *= law[d].1;
        }
        if prob > 0.0 {
            let c = effective_conductance(&net.with_conductances(&omega)?, a, b)?.value;
            expectation.add(prob * c);
        }
        for (d, law) in digits.iter_mut().zip(&laws) {
            *d += 1;
            if *d < law.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(ExactDomination {
        baseline,
        expectation: expectation.value(),
        outcomes: total as u64,
    })
}
