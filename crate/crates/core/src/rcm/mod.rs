//! Weight-dependent random connection model on R².
//!
//! Points of a unit-intensity Poisson process carry weight parameters
//! s ∈ (0, 1); two points at Euclidean distance r are joined with
//! probability ρ(g(s, t)·r²). Small weight parameters mean strong vertices.

mod discrete;
mod integrals;
mod sample;
mod small;

pub use discrete::{components_and_walk, discretize, ComponentWalk, DiscreteRcm};
pub use integrals::{
    connection_probability, delta_eff, known_below_two, tail_certificate, CertificateRow,
    ConnectionProbability, DeltaEff, DeltaEffRow, TailCertificate,
};
pub use sample::{read_sample, sample_rcm, write_sample, RcmPoint, RcmSample};
pub use small::{
    moment_by_cdf, pa_small_value_tail, pa_sublevel_probability, pa_sublevel_quadrature,
    small_eps_moments, CdfMoment, ConditionalMoment, MomentReport, RunningMoment, SmallValueRow,
    SmallValueTable,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// (s^{−γ/2} + t^{−γ/2})^{−2}
    Sum,
    /// min(s, t)^γ
    Min,
    /// (s·t)^γ
    Product,
    /// min(s, t)^γ · max(s, t)^{1−γ}
    PreferentialAttachment,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Sum,
        KernelKind::Min,
        KernelKind::Product,
        KernelKind::PreferentialAttachment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Sum => "sum",
            KernelKind::Min => "min",
            KernelKind::Product => "prod",
            KernelKind::PreferentialAttachment => "pa",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown kernel '{s}' (sum, min, prod, pa)")))
    }
}

/// g(s, t) = g₀(s, t)/β in dimension two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    gamma: f64,
    beta: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, gamma: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid(format!("γ = {gamma} outside [0, 1)")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("β = {beta} must be positive")));
        }
        Ok(Kernel { kind, gamma, beta })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !(open(s) && open(t)) {
            return Err(Error::invalid(format!("weight parameters ({s}, {t}) outside (0, 1)")));
        }
        Ok(self.value(s, t))
    }

    /// Unchecked evaluation for s, t ∈ (0, 1].
    pub(crate) fn value(&self, s: f64, t: f64) -> f64 {
        let g = self.gamma;
        let raw = match self.kind {
            KernelKind::Sum => (s.powf(-g / 2.0) + t.powf(-g / 2.0)).powi(-2),
            KernelKind::Min => s.min(t).powf(g),
            KernelKind::Product => (s * t).powf(g),
            KernelKind::PreferentialAttachment => s.min(t).powf(g) * s.max(t).powf(1.0 - g),
        };
        raw / self.beta
    }

    /// At γ = 0 every kernel but pa is constant; pa becomes max(s, t)/β.
    pub fn is_constant(&self) -> bool {
        self.gamma == 0.0 && self.kind != KernelKind::PreferentialAttachment
    }

    fn degenerate_value(&self) -> f64 {
        self.value(0.5, 0.5)
    }

    /// Largest t ∈ [0, s] with g(s, t) ≤ level.
    pub(crate) fn lower_crossing(&self, s: f64, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        if self.is_constant() {
            return if self.degenerate_value() <= level { s } else { 0.0 };
        }
        let g = self.gamma;
        let c = level * self.beta;
        if g == 0.0 {
            return if s <= c { s } else { 0.0 };
        }
        let t = match self.kind {
            KernelKind::Min => c.powf(1.0 / g),
            KernelKind::Product => c.powf(1.0 / g) / s,
            KernelKind::PreferentialAttachment => (c / s.powf(1.0 - g)).powf(1.0 / g),
            KernelKind::Sum => {
                let gap = c.powf(-0.5) - s.powf(-g / 2.0);
                if gap <= 0.0 {
                    s
                } else {
                    gap.powf(-2.0 / g)
                }
            }
        };
        t.clamp(0.0, s)
    }

    /// Largest s ∈ [0, 1] with g(s, s) ≤ level.
    pub(crate) fn diagonal_crossing(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        if self.is_constant() {
            return if self.degenerate_value() <= level { 1.0 } else { 0.0 };
        }
        let g = self.gamma;
        let c = level * self.beta;
        if g == 0.0 {
            return c.clamp(0.0, 1.0);
        }
        let s = match self.kind {
            KernelKind::Min => c.powf(1.0 / g),
            KernelKind::Product => c.powf(0.5 / g),
            KernelKind::PreferentialAttachment => c,
            KernelKind::Sum => (4.0 * c).powf(1.0 / g),
        };
        s.clamp(0.0, 1.0)
    }
}

/// Non-increasing ρ: [0, ∞) → [0, 1].
pub trait ProfileFunction: Sync {
    fn eval(&self, x: f64) -> f64;

    /// ρ ≡ 1 on [0, plateau]; 0 if no such interval is known.
    fn plateau(&self) -> f64 {
        0.0
    }
}

/// ρ(x) = min(1, x^{−δ}).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerProfile {
    delta: f64,
}

impl PowerProfile {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 1.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("δ = {delta} must exceed 1")));
        }
        Ok(PowerProfile { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl ProfileFunction for PowerProfile {
    fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            x.powf(-self.delta)
        }
    }

    fn plateau(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(kind: KernelKind, gamma: f64) -> Kernel {
        Kernel::new(kind, gamma, 1.0).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert!((kernel(KernelKind::Min, 0.5).eval(0.25, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let near_one = 1.0 - 1e-12;
        let sum = kernel(KernelKind::Sum, 0.5).eval(near_one, near_one).unwrap();
        assert!((sum - 0.25).abs() < 1e-10);
        for (s, t) in [(0.1, 0.7), (0.9, 0.2), (0.33, 0.33)] {
            let pa = kernel(KernelKind::PreferentialAttachment, 0.5).eval(s, t).unwrap();
            let prod = kernel(KernelKind::Product, 0.5).eval(s, t).unwrap();
            assert!((pa - prod).abs() < 1e-15);
            assert!((prod - (s * t as f64).sqrt()).abs() < 1e-15);
        }
        let k = Kernel::new(KernelKind::Min, 0.5, 4.0).unwrap();
        assert!((k.eval(0.25, 0.9).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn kernel_rejects_bad_input() {
        let k = kernel(KernelKind::Min, 0.3);
        assert!(k.eval(0.0, 0.5).is_err());
        assert!(k.eval(0.5, 1.0).is_err());
        assert!(Kernel::new(KernelKind::Min, 1.0, 1.0).is_err());
        assert!(Kernel::new(KernelKind::Min, -0.1, 1.0).is_err());
        assert!(Kernel::new(KernelKind::Min, 0.1, 0.0).is_err());
        assert!("foo".parse::<KernelKind>().is_err());
        for kind in KernelKind::ALL {
            assert_eq!(kind.name().parse::<KernelKind>().unwrap(), kind);
        }
    }

    #[test]
    fn kernels_are_symmetric_and_monotone() {
        let grid: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
        for kind in KernelKind::ALL {
            let k = Kernel::new(kind, 0.37, 2.0).unwrap();
            for w in grid.windows(2) {
                for &t in &grid {
                    let (a, b) = (k.value(w[0], t), k.value(w[1], t));
                    assert!(a > 0.0 && a <= b * (1.0 + 1e-14), "{kind} at ({}, {t})", w[0]);
                    assert_eq!(k.value(w[0], t), k.value(t, w[0]));
                }
            }
        }
    }

    #[test]
    fn sum_and_min_kernels_are_comparable() {
        for gamma in [0.0, 0.2, 0.5, 0.9] {
            let sum = kernel(KernelKind::Sum, gamma);
            let min = kernel(KernelKind::Min, gamma);
            for i in 1..=100 {
                for j in 1..=100 {
                    let (s, t) = (i as f64 / 101.0, j as f64 / 101.0);
                    let (a, b) = (sum.value(s, t), min.value(s, t));
                    assert!(a <= b * (1.0 + 1e-14) && b <= 4.0 * a * (1.0 + 1e-14));
                }
            }
        }
    }

    #[test]
    fn crossings_bracket_the_level() {
        for kind in KernelKind::ALL {
            let k = Kernel::new(kind, 0.45, 1.5).unwrap();
            for level in [1e-3, 0.05, 0.3] {
                for s in [0.01, 0.2, 0.7, 0.999] {
                    let t = k.lower_crossing(s, level);
                    if t > 0.0 {
                        assert!(k.value(s, t) <= level * (1.0 + 1e-9), "{kind}");
                    }
                    if t < s {
                        assert!(k.value(s, t * (1.0 + 1e-6) + 1e-300) > level * (1.0 - 1e-9), "{kind}");
                    }
                }
                let d = k.diagonal_crossing(level);
                if d > 0.0 && d < 1.0 {
                    assert!((k.value(d, d) / level - 1.0).abs() < 1e-9, "{kind}");
                }
            }
        }
    }

    #[test]
    fn power_profile() {
        let rho = PowerProfile::new(2.0).unwrap();
        assert_eq!(rho.eval(0.5), 1.0);
        assert_eq!(rho.eval(4.0), 1.0 / 16.0);
        for r in [1.0f64, 2.5, 1e3, 1e9] {
            assert!((r.powf(2.0) * rho.eval(r) - 1.0).abs() < 1e-12);
        }
        assert!(PowerProfile::new(1.0).is_err());
    }
}
