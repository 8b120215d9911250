//! Small values of the kernel and negative moments of small variables.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{integrate, mean_and_se, Quadrature};

fn check_pa(gamma: f64, beta: f64) -> Result<()> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(Error::invalid(format!("γ = {gamma} outside [0, 1/2)")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("β = {beta} must be positive")));
    }
    Ok(())
}

/// P(g^pa(S, T) ≤ ε) for independent uniform S, T and γ < 1/2.
///
/// With m = min, M = max and e = βε ≤ 1, the event is M ≤ (e·m^{−γ})^{1/(1−γ)},
/// which integrates to (e² − 2γ·e^{1/γ}) / (1 − 2γ).
pub fn pa_sublevel_probability(gamma: f64, beta: f64, eps: f64) -> Result<f64> {
    check_pa(gamma, beta)?;
    let e = beta * eps;
    if e <= 0.0 {
        return Ok(0.0);
    }
    if e >= 1.0 {
        return Ok(1.0);
    }
    let corner = if gamma == 0.0 { 0.0 } else { e.powf(1.0 / gamma) };
    Ok((e * e - 2.0 * gamma * corner) / (1.0 - 2.0 * gamma))
}

/// The same probability as 2∫₀^e (min(1, b(m)) − m)⁺ dm by quadrature,
/// b(m) = (e·m^{−γ})^{1/(1−γ)}.
pub fn pa_sublevel_quadrature(gamma: f64, beta: f64, eps: f64) -> Result<Quadrature> {
    check_pa(gamma, beta)?;
    let e = beta * eps;
    if e <= 0.0 || e >= 1.0 {
        let value = if e <= 0.0 { 0.0 } else { 1.0 };
        return Ok(Quadrature { value, error: 0.0, panels: 0 });
    }
    let corner = if gamma == 0.0 { 0.0 } else { e.powf(1.0 / gamma) };
    // m ≤ corner: M ranges over (m, 1)
    let head = corner - corner * corner / 2.0;
    let bound = |m: f64| (e * m.powf(-gamma)).powf(1.0 / (1.0 - gamma)).min(1.0);
    let lo = corner.max(e * 1e-300);
    let tail = integrate(
        |u: f64| {
            let m = u.exp();
            (bound(m) - m).max(0.0) * m
        },
        lo.ln(),
        e.ln(),
        &[],
        0.0,
        1e-12,
    )?;
    Ok(Quadrature {
        value: 2.0 * (head + tail.value),
        error: 2.0 * tail.error,
        panels: tail.panels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallValueRow {
    pub eps: f64,
    /// P(g ≤ ε), closed form.
    pub exact: f64,
    /// P(g ≤ ε) by quadrature.
    pub quadrature: f64,
    pub quadrature_error: f64,
    /// P(g ≤ ε)/ε²
    pub ratio: f64,
    /// P(g² ≤ ε)/ε
    pub squared_ratio: f64,
    /// log P(g ≤ ε) / log ε
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallValueTable {
    pub gamma: f64,
    pub beta: f64,
    pub rows: Vec<SmallValueRow>,
}

impl SmallValueTable {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn max_squared_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.squared_ratio).fold(0.0, f64::max)
    }

    /// Largest relative gap between the closed form and quadrature.
    pub fn max_discrepancy(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| ((r.quadrature - r.exact) / r.exact).abs())
            .fold(0.0, f64::max)
    }
}

pub fn pa_small_value_tail(gamma: f64, beta: f64, eps_list: &[f64]) -> Result<SmallValueTable> {
    check_pa(gamma, beta)?;
    if eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::invalid("ε values must lie in (0, 1)"));
    }
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let exact = pa_sublevel_probability(gamma, beta, eps)?;
            let q = pa_sublevel_quadrature(gamma, beta, eps)?;
            let squared = pa_sublevel_probability(gamma, beta, eps.sqrt())?;
            Ok(SmallValueRow {
                eps,
                exact,
                quadrature: q.value,
                quadrature_error: q.error,
                ratio: exact / (eps * eps),
                squared_ratio: squared / eps,
                exponent: exact.ln() / eps.ln(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SmallValueTable { gamma, beta, rows })
}

/// E[X^{−η}; X ≥ ε] and the conditional moment, from the law's CDF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdfMoment {
    pub eps: f64,
    /// P(X ≥ ε)
    pub mass: f64,
    pub partial: f64,
    /// E[X^{−η} | X ≥ ε]
    pub conditional: f64,
    /// ε^{η−1}·E[X^{−η} | X ≥ ε]
    pub scaled: f64,
    pub error: f64,
}

/// Integrates by parts: E[X^{−η}; X ≥ ε] = x̄^{−η} − ε^{−η}F(ε) + η∫_ε^x̄ x^{−η−1}F(x) dx
/// for X ∈ (0, x̄]. With ε = 0 this is the full moment, which needs
/// x^{−η}F(x) → 0.
pub fn moment_by_cdf<F: Fn(f64) -> f64>(cdf: F, upper: f64, eta: f64, eps: f64) -> Result<CdfMoment> {
    if !(eta > 0.0 && eta != 1.0) {
        return Err(Error::invalid(format!("η = {eta} must be positive and not 1")));
    }
    if !(upper > 0.0 && (0.0..upper).contains(&eps)) {
        return Err(Error::invalid(format!("need 0 ≤ ε < upper, got ε = {eps}, upper = {upper}")));
    }
    let lo = eps.max(upper * 1e-300);
    let q = integrate(
        |u: f64| {
            let x = u.exp();
            eta * x.powf(-eta) * cdf(x)
        },
        lo.ln(),
        upper.ln(),
        &[],
        0.0,
        1e-12,
    )?;
    let boundary = if eps > 0.0 { eps.powf(-eta) * cdf(eps) } else { 0.0 };
    let partial = upper.powf(-eta) - boundary + q.value;
    let mass = 1.0 - if eps > 0.0 { cdf(eps) } else { 0.0 };
    let conditional = partial / mass;
    Ok(CdfMoment {
        eps,
        mass,
        partial,
        conditional,
        scaled: if eps > 0.0 { eps.powf(eta - 1.0) * conditional } else { f64::NAN },
        error: q.error / mass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunningMoment {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalMoment {
    pub eps: f64,
    /// Samples with X ≥ ε.
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
    /// ε^{η−1}·mean
    pub scaled: f64,
    pub scaled_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub eta: f64,
    pub trials: usize,
    /// Running estimates of E[X^{−η}] at doubling sample sizes; only for η < 1.
    pub running: Vec<RunningMoment>,
    pub conditional: Vec<ConditionalMoment>,
}

impl MomentReport {
    /// Relative change of the running mean over its last doubling.
    pub fn running_drift(&self) -> Option<f64> {
        let n = self.running.len();
        (n >= 2).then(|| {
            let (a, b) = (self.running[n - 2].mean, self.running[n - 1].mean);
            ((b - a) / b).abs()
        })
    }
}

/// Monte Carlo negative moments of a positive variable drawn by `sampler`.
pub fn small_eps_moments<R: Rng + ?Sized, S: FnMut(&mut R) -> f64>(
    mut sampler: S,
    eta: f64,
    eps_list: &[f64],
    trials: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    if !(eta > 0.0 && eta != 1.0) {
        return Err(Error::invalid(format!("η = {eta} must be positive and not 1")));
    }
    if trials < 2 {
        return Err(Error::invalid("need at least two trials"));
    }
    let mut draws = Vec::with_capacity(trials);
    for _ in 0..trials {
        let x = sampler(rng);
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("sampler produced {x}; expected a positive value")));
        }
        draws.push(x);
    }
    let powers: Vec<f64> = draws.iter().map(|x| x.powf(-eta)).collect();

    let mut running = Vec::new();
    if eta < 1.0 {
        let mut n = 1024.min(trials);
        loop {
            let (mean, std_error) = mean_and_se(&powers[..n]);
            running.push(RunningMoment { samples: n, mean, std_error });
            if n == trials {
                break;
            }
            n = (2 * n).min(trials);
        }
    }
    let conditional = eps_list
        .iter()
        .map(|&eps| {
            let kept: Vec<f64> = draws
                .iter()
                .zip(&powers)
                .filter(|(x, _)| **x >= eps)
                .map(|(_, p)| *p)
                .collect();
            let (mean, std_error) = mean_and_se(&kept);
            let scale = eps.powf(eta - 1.0);
            ConditionalMoment {
                eps,
                count: kept.len(),
                mean,
                std_error,
                scaled: scale * mean,
                scaled_error: scale * std_error,
            }
        })
        .collect();
    Ok(MomentReport { eta, trials, running, conditional })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pa_closed_form_matches_quadrature() {
        for gamma in [0.0, 0.1, 0.25, 0.4, 0.49] {
            for n in [1, 3, 8, 15, 20] {
                let eps = 2f64.powi(-n);
                let exact = pa_sublevel_probability(gamma, 1.0, eps).unwrap();
                let q = pa_sublevel_quadrature(gamma, 1.0, eps).unwrap();
                assert!((q.value / exact - 1.0).abs() < 1e-9, "γ={gamma} ε={eps}: {} vs {exact}", q.value);
            }
        }
    }

    #[test]
    fn pa_probability_by_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (gamma, eps, n) = (0.3, 0.2, 400_000);
        let hits = (0..n)
            .filter(|_| {
                let (s, t): (f64, f64) = (rng.random(), rng.random());
                s.min(t).powf(gamma) * s.max(t).powf(1.0 - gamma) <= eps
            })
            .count() as f64
            / n as f64;
        let exact = pa_sublevel_probability(gamma, 1.0, eps).unwrap();
        assert!((hits - exact).abs() < 4.0 * (exact / n as f64).sqrt());
        // β rescales ε
        let scaled = pa_sublevel_probability(gamma, 2.0, eps / 2.0).unwrap();
        assert!((scaled - exact).abs() < 1e-15);
    }

    #[test]
    fn pa_ratio_bounded_and_exponent_two() {
        let eps: Vec<f64> = (1..=20).map(|n| 2f64.powi(-n)).collect();
        let t = pa_small_value_tail(0.4, 1.0, &eps).unwrap();
        assert!(t.max_ratio() <= 1.0 / 0.2);
        assert!(t.max_squared_ratio() <= 1.0 / 0.2);
        assert!(t.max_discrepancy() < 1e-9);
        let last = t.rows.last().unwrap();
        assert!((last.exponent - 2.0).abs() < 0.15);
        assert!(pa_small_value_tail(0.5, 1.0, &eps).is_err());
    }

    #[test]
    fn uniform_moments_by_cdf() {
        let full = moment_by_cdf(|x| x, 1.0, 0.5, 0.0).unwrap();
        assert!((full.conditional - 2.0).abs() < 1e-9);
        for eps in [1e-2, 1e-4, 1e-8] {
            let m = moment_by_cdf(|x| x, 1.0, 1.5, eps).unwrap();
            assert!((m.scaled - 2.0 / (1.0 + eps.sqrt())).abs() < 1e-9);
        }
        assert!(moment_by_cdf(|x| x, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn uniform_moments_by_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = small_eps_moments(|g: &mut ChaCha8Rng| g.random::<f64>(), 0.5, &[], 200_000, &mut rng).unwrap();
        let last = r.running.last().unwrap();
        assert_eq!(last.samples, 200_000);
        assert!((last.mean - 2.0).abs() < 4.0 * last.std_error);
        assert!(r.running_drift().unwrap() < 0.05);

        let eps = [1e-2, 1e-3];
        let r = small_eps_moments(|g: &mut ChaCha8Rng| g.random::<f64>(), 1.5, &eps, 200_000, &mut rng).unwrap();
        assert!(r.running.is_empty());
        for row in &r.conditional {
            let exact = 2.0 / (1.0 + row.eps.sqrt());
            assert!((row.scaled - exact).abs() < 4.0 * row.scaled_error, "{row:?}");
        }
    }
}
