//! P(r) = ∫∫ ρ(g(s, t)·r²) ds dt and what follows from it.

use rayon::prelude::*;

use super::{Kernel, KernelKind, PowerProfile, ProfileFunction};
use crate::error::{Error, Result};
use crate::numerics::{integrate, linear_fit};

const INNER_REL_TOL: f64 = 1e-11;
const OUTER_REL_TOL: f64 = 1e-9;
/// Below this the integrands are dropped (their mass is at most this much).
const TINY: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionProbability {
    pub distance: f64,
    pub value: f64,
    /// Absolute error estimate.
    pub error: f64,
}

impl ConnectionProbability {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.error / self.value
        }
    }
}

/// Connection probability of two points at distance `r`, averaged over
/// independent uniform weight parameters.
///
/// By symmetry P = 2∫₀¹ F(s) ds with F(s) = ∫₀^s ρ(g(s,t)r²) dt. On the
/// plateau of ρ the inner integrand is 1, which splits F at t*(s); the
/// remaining pieces run in log coordinates, where the endpoint blow-ups of
/// the kernels turn into smooth exponential tails.
pub fn connection_probability<P: ProfileFunction>(kernel: &Kernel, profile: &P, r: f64) -> Result<ConnectionProbability> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("distance {r} must be positive")));
    }
    let r2 = r * r;
    if kernel.is_constant() {
        return Ok(ConnectionProbability {
            distance: r,
            value: profile.eval(kernel.degenerate_value() * r2),
            error: 0.0,
        });
    }
    let level = profile.plateau() / r2;
    let full = kernel.diagonal_crossing(level);
    if full >= 1.0 {
        return Ok(ConnectionProbability {
            distance: r,
            value: 1.0,
            error: 0.0,
        });
    }

    let mut failure: Option<Error> = None;
    let mut worst_inner = 0.0f64;
    let mut inner = |s: f64| -> f64 {
        let t_star = kernel.lower_crossing(s, level);
        let lo = t_star.max(s * TINY);
        if lo >= s {
            return s;
        }
        let tail = integrate(
            |u: f64| {
                let t = u.exp();
                t * profile.eval(kernel.value(s, t) * r2)
            },
            lo.ln(),
            s.ln(),
            &[],
            0.0,
            INNER_REL_TOL,
        );
        match tail {
            Ok(q) => {
                let f = t_star + q.value;
                if f > 0.0 {
                    worst_inner = worst_inner.max(q.error / f);
                }
                f
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let lo = full.max(TINY);
    let outer = integrate(
        |v: f64| {
            let s = v.exp();
            s * inner(s)
        },
        lo.ln(),
        0.0,
        &[],
        0.0,
        OUTER_REL_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer.map_err(|e| Error::Quadrature(format!("P({r}) for {kernel:?}: {e}")))?;
    let value = 2.0 * (full * full / 2.0 + outer.value);
    Ok(ConnectionProbability {
        distance: r,
        value,
        error: 2.0 * outer.error + worst_inner * value,
    })
}

fn check_distances(r_list: &[f64], min: f64) -> Result<()> {
    if r_list.len() < 2 {
        return Err(Error::invalid("need at least two distances"));
    }
    if r_list.iter().any(|&r| !(r > min && r.is_finite())) || r_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("distances must be increasing and above {min}")));
    }
    Ok(())
}

fn probabilities<P: ProfileFunction>(kernel: &Kernel, profile: &P, r_list: &[f64]) -> Result<Vec<ConnectionProbability>> {
    r_list
        .par_iter()
        .map(|&r| connection_probability(kernel, profile, r))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateRow {
    pub distance: f64,
    pub probability: f64,
    pub error: f64,
    /// r⁴·P(r)
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailCertificate {
    pub rows: Vec<CertificateRow>,
    pub sup: f64,
    /// Least-squares slope of log(r⁴P) against log r.
    pub slope: f64,
}

impl TailCertificate {
    pub fn bounded(&self, tolerance: f64) -> bool {
        self.slope <= tolerance
    }

    pub fn max_relative_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| if r.probability > 0.0 { r.error / r.probability } else { 0.0 })
            .fold(0.0, f64::max)
    }
}

pub fn tail_certificate<P: ProfileFunction>(kernel: &Kernel, profile: &P, r_list: &[f64]) -> Result<TailCertificate> {
    check_distances(r_list, 0.0)?;
    let rows: Vec<CertificateRow> = probabilities(kernel, profile, r_list)?
        .into_iter()
        .map(|p| CertificateRow {
            distance: p.distance,
            probability: p.value,
            error: p.error,
            scaled: p.distance.powi(4) * p.value,
        })
        .collect();
    if rows.iter().any(|r| r.scaled <= 0.0) {
        return Err(Error::Quadrature("connection probability underflowed to zero".into()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.distance.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.scaled.ln()).collect();
    let (slope, _) = linear_fit(&x, &y);
    let sup = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    Ok(TailCertificate { rows, sup, slope })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaEffRow {
    pub distance: f64,
    pub probability: f64,
    /// −log P(r) / log r²
    pub estimate: f64,
    /// −Δlog P / Δlog r² against the previous distance (NaN on the first row).
    pub local: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaEff {
    pub rows: Vec<DeltaEffRow>,
    /// Intercept of the estimates fitted linearly in 1/log r.
    pub extrapolated: f64,
    /// Whether the known parameter conditions predict δ_eff < 2.
    pub predicted_below_two: bool,
}

impl DeltaEff {
    pub fn below_two(&self) -> bool {
        self.extrapolated < 2.0
    }

    pub fn min_estimate(&self) -> f64 {
        self.rows.iter().map(|r| r.estimate).fold(f64::INFINITY, f64::min)
    }
}

/// Parameter conditions under which δ_eff < 2 is known: δ < 2 always; for
/// δ ≥ 2, γ > 1/2 for the product kernel and γ > (δ − 1)/δ otherwise.
pub fn known_below_two(kind: KernelKind, delta: f64, gamma: f64) -> bool {
    if delta < 2.0 {
        return true;
    }
    match kind {
        KernelKind::Product => gamma > 0.5,
        _ => gamma > (delta - 1.0) / delta,
    }
}

/// Finite-r estimates of δ_eff = −lim log P(r) / log r².
pub fn delta_eff(kernel: &Kernel, profile: &PowerProfile, r_list: &[f64]) -> Result<DeltaEff> {
    check_distances(r_list, 1.0)?;
    let probs = probabilities(kernel, profile, r_list)?;
    let mut rows: Vec<DeltaEffRow> = Vec::with_capacity(probs.len());
    for p in &probs {
        if p.value <= 0.0 {
            return Err(Error::Quadrature(format!("P({}) underflowed to zero", p.distance)));
        }
        let log_r2 = 2.0 * p.distance.ln();
        let local = rows.last().map_or(f64::NAN, |prev| {
            -(p.value.ln() - prev.probability.ln()) / (log_r2 - 2.0 * prev.distance.ln())
        });
        rows.push(DeltaEffRow {
            distance: p.distance,
            probability: p.value,
            estimate: -p.value.ln() / log_r2,
            local,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| 1.0 / r.distance.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
    let (_, extrapolated) = linear_fit(&x, &y);
    Ok(DeltaEff {
        rows,
        extrapolated,
        predicted_below_two: known_below_two(kernel.kind(), profile.delta(), kernel.gamma()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(kind: KernelKind, gamma: f64, delta: f64) -> (Kernel, PowerProfile) {
        (Kernel::new(kind, gamma, 1.0).unwrap(), PowerProfile::new(delta).unwrap())
    }

    fn powers_of_two() -> Vec<f64> {
        (1..=10).map(|j| 2f64.powi(j)).collect()
    }

    /// Midpoint rule on a graded grid s = u^4, t = v^4.
    fn brute_force(kernel: &Kernel, profile: &PowerProfile, r: f64, n: usize) -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let s = u.powi(4);
            for j in 0..n {
                let v = (j as f64 + 0.5) / n as f64;
                let t = v.powi(4);
                let jac = 16.0 * (u * v).powi(3) / (n * n) as f64;
                total += jac * profile.eval(kernel.value(s, t) * r * r);
            }
        }
        total
    }

    #[test]
    fn degenerate_kernel_is_the_profile() {
        for kind in [KernelKind::Min, KernelKind::Product] {
            let (k, rho) = setup(kind, 0.0, 2.0);
            for r in [0.5, 1.0, 3.0, 100.0] {
                let p = connection_probability(&k, &rho, r).unwrap();
                assert_eq!(p.value, rho.eval(r * r));
                assert_eq!(p.error, 0.0);
            }
        }
        // the sum kernel is 1/4 at γ = 0
        let (k, rho) = setup(KernelKind::Sum, 0.0, 2.0);
        assert_eq!(connection_probability(&k, &rho, 10.0).unwrap().value, rho.eval(25.0));
        // pa is max(s, t) at γ = 0: P = ∫ 2m·min(1, (m r²)^{−2}) dm
        let (k, rho) = setup(KernelKind::PreferentialAttachment, 0.0, 2.0);
        let r: f64 = 3.0;
        let a = r.powi(-2);
        let exact = a * a + 2.0 * r.powi(-4) * (-a.ln());
        let p = connection_probability(&k, &rho, r).unwrap();
        assert!((p.value / exact - 1.0).abs() < 1e-9, "{} vs {exact}", p.value);
    }

    #[test]
    fn matches_brute_force() {
        for kind in KernelKind::ALL {
            let (k, rho) = setup(kind, 0.3, 2.0);
            for r in [1.5, 4.0] {
                let p = connection_probability(&k, &rho, r).unwrap();
                let b = brute_force(&k, &rho, r, 1200);
                assert!((p.value / b - 1.0).abs() < 2e-3, "{kind} r={r}: {} vs {b}", p.value);
                assert!(p.relative_error() < 1e-6);
            }
        }
    }

    #[test]
    fn min_kernel_closed_form() {
        // γ = 1/2, δ = 2: for s ≤ t, min = s and ρ = min(1, 1/(s r⁴))
        let (k, rho) = setup(KernelKind::Min, 0.5, 2.0);
        for r in [2.0f64, 10.0] {
            let a = r.powi(-4);
            // P(min ≤ a) + ∫_a^1 2(1−m)/(m r⁴) dm
            let exact = 1.0 - (1.0 - a).powi(2) + 2.0 * a * (-(a.ln()) - (1.0 - a));
            let p = connection_probability(&k, &rho, r).unwrap();
            assert!((p.value / exact - 1.0).abs() < 1e-9, "{} vs {exact}", p.value);
        }
    }

    #[test]
    fn probability_is_non_increasing() {
        for kind in KernelKind::ALL {
            let (k, rho) = setup(kind, 0.45, 2.5);
            let mut last = 1.0;
            for j in 0..30 {
                let r = 1.3f64.powi(j) * 0.2;
                let p = connection_probability(&k, &rho, r).unwrap().value;
                assert!(p <= last * (1.0 + 1e-9), "{kind} r={r}");
                assert!(p > 0.0 && p <= 1.0);
                last = p;
            }
        }
    }

    #[test]
    fn min_kernel_scaled_tail_below_moment_bound() {
        let (k, rho) = setup(KernelKind::Min, 0.4, 2.0);
        let cert = tail_certificate(&k, &rho, &powers_of_two()).unwrap();
        // r⁴P ≤ E[min(S,T)^{−0.8}] = 2/(0.2·1.2)
        assert!(cert.sup <= 2.0 / (0.2 * 1.2));
        assert!(cert.sup <= 25.0);
        assert!(cert.max_relative_error() < 1e-6);
        // r⁴P = E[min(r⁴, min(S,T)^{−0.8})] climbs to its limit, so the slope
        // only flattens once r is large
        assert!(cert.rows.windows(2).all(|w| w[0].scaled < w[1].scaled));
        let late = tail_certificate(&k, &rho, &powers_of_two()[4..]).unwrap();
        assert!(late.bounded(0.01), "{late:?}");
    }

    #[test]
    fn slow_decay_diverges() {
        let (k, rho) = setup(KernelKind::Min, 0.0, 1.5);
        let cert = tail_certificate(&k, &rho, &powers_of_two()).unwrap();
        assert!((cert.slope - 1.0).abs() < 1e-12);
        assert!(!cert.bounded(0.05));
        assert!(tail_certificate(&k, &rho, &[4.0, 2.0]).is_err());
    }

    #[test]
    fn delta_eff_estimates() {
        let (k, rho) = setup(KernelKind::Min, 0.0, 1.5);
        let d = delta_eff(&k, &rho, &powers_of_two()).unwrap();
        assert!(d.rows.iter().all(|r| (r.estimate - 1.5).abs() < 1e-12));
        assert!(d.below_two() && d.predicted_below_two);

        let (k, rho) = setup(KernelKind::Min, 0.4, 2.5);
        let d = delta_eff(&k, &rho, &powers_of_two()).unwrap();
        // log P/log r² approaches 5/2 from below; local slopes exceed 2 early
        assert!(d.rows[2..].iter().all(|r| r.local > 2.0), "{d:?}");
        assert!(d.extrapolated >= 2.0 && !d.below_two());
        assert!(!d.predicted_below_two);
        assert!(delta_eff(&k, &rho, &[0.5, 2.0]).is_err());
    }

    #[test]
    fn known_conditions() {
        assert!(known_below_two(KernelKind::Min, 1.9, 0.0));
        assert!(known_below_two(KernelKind::PreferentialAttachment, 2.0, 0.6));
        assert!(!known_below_two(KernelKind::PreferentialAttachment, 2.0, 0.4));
        assert!(known_below_two(KernelKind::Product, 3.0, 0.6));
        assert!(!known_below_two(KernelKind::Sum, 3.0, 0.6));
    }
}
