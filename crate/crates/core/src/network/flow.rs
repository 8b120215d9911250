use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::WeightedNetwork;
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// Exact binary fraction m·2^e. Every finite f64 is one, so sums of
/// flow values can be checked without rounding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & 0x000f_ffff_ffff_ffff;
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let mut d = Dyadic {
            mantissa: BigInt::from(mant) * sign,
            exponent: exp,
        };
        d.normalize();
        Some(d)
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i64;
        }
    }

    pub fn add_assign(&mut self, other: &Dyadic) {
        if other.mantissa.is_zero() {
            return;
        }
        if self.mantissa.is_zero() {
            *self = other.clone();
            return;
        }
        if other.exponent < self.exponent {
            let shift = (self.exponent - other.exponent) as usize;
            self.mantissa <<= shift;
            self.exponent = other.exponent;
            self.mantissa += &other.mantissa;
        } else {
            let shift = (other.exponent - self.exponent) as usize;
            self.mantissa += &other.mantissa << shift;
        }
        self.normalize();
    }

    pub fn sub_assign(&mut self, other: &Dyadic) {
        self.add_assign(&other.neg());
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa.clone(),
            exponent: self.exponent,
        }
    }

    pub fn mul_int(&self, k: u128) -> Dyadic {
        let mut d = Dyadic {
            mantissa: &self.mantissa * BigInt::from(k),
            exponent: self.exponent,
        };
        d.normalize();
        d
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.mantissa.is_one() && self.exponent == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let keep = 60;
        let (m, e) = if bits > keep {
            let shift = bits - keep;
            (&self.mantissa >> shift as usize, self.exponent + shift)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let mut v = m.to_f64().unwrap_or(f64::NAN);
        let mut e = e.clamp(-4000, 4000);
        // scale in pieces so that 2^e itself never under- or overflows
        while e != 0 {
            let part = e.clamp(-1000, 1000);
            v *= 2f64.powi(part as i32);
            e -= part;
        }
        v
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            write!(f, "{}", &self.mantissa << self.exponent as usize)
        } else if self.mantissa.is_negative() {
            write!(f, "-{}/2^{}", -self.mantissa.clone(), -self.exponent)
        } else {
            write!(f, "{}/2^{}", self.mantissa, -self.exponent)
        }
    }
}

/// Oriented edge flow θ with a source and sink set.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment {
    source: usize,
    sinks: BTreeSet<usize>,
    values: BTreeMap<(usize, usize), f64>,
}

impl FlowAssignment {
    pub fn new(source: usize, sinks: impl IntoIterator<Item = usize>) -> Self {
        FlowAssignment {
            source,
            sinks: sinks.into_iter().collect(),
            values: BTreeMap::new(),
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sinks(&self) -> &BTreeSet<usize> {
        &self.sinks
    }

    /// Sets θ(x,y) = value and θ(y,x) = −value.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.values.insert((x, y), value);
        self.values.insert((y, x), -value);
    }

    /// Adds `value` to θ(x,y), keeping antisymmetry.
    pub fn add(&mut self, x: usize, y: usize, value: f64) {
        *self.values.entry((x, y)).or_insert(0.0) += value;
        *self.values.entry((y, x)).or_insert(0.0) -= value;
    }

    /// Sets a single oriented entry without touching the reverse one.
    pub fn set_oriented(&mut self, x: usize, y: usize, value: f64) {
        self.values.insert((x, y), value);
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        if let Some(&v) = self.values.get(&(x, y)) {
            v
        } else if let Some(&v) = self.values.get(&(y, x)) {
            -v
        } else {
            0.0
        }
    }

    /// Oriented entries as stored.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    /// θ(x,y) for each unordered pair x < y carrying a stored value.
    pub fn pairs(&self) -> Vec<((usize, usize), f64)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(x, y) in self.values.keys() {
            let key = (x.min(y), x.max(y));
            if seen.insert(key) {
                out.push((key, self.get(key.0, key.1)));
            }
        }
        out
    }
}

/// Σ θ(e)²/c_e over unordered pairs.
pub fn flow_energy(net: &WeightedNetwork, theta: &FlowAssignment) -> Result<f64> {
    let cond = net.pair_conductances();
    let mut sum = CompensatedSum::new();
    for ((u, v), value) in theta.pairs() {
        if value == 0.0 {
            continue;
        }
        let c = cond.get(&(u, v)).copied().unwrap_or(0.0);
        if c <= 0.0 {
            return Err(Error::FlowOnZeroEdge { u, v, flow: value });
        }
        sum.add(value * value / c);
    }
    Ok(sum.value())
}

/// Result of validating a unit flow.
#[derive(Clone, Debug, Default)]
pub struct FlowReport {
    /// Pairs with θ(x,y) ≠ −θ(y,x).
    pub antisymmetry_violations: Vec<(usize, usize)>,
    /// Non-terminal vertices with nonzero net outflow, with the exact value.
    pub divergence_violations: Vec<(usize, Dyadic)>,
    /// Exact net outflow at the source.
    pub source_strength: Option<Dyadic>,
    pub non_finite: Vec<(usize, usize)>,
}

impl FlowReport {
    pub fn unit_strength(&self) -> bool {
        self.source_strength.as_ref().is_some_and(Dyadic::is_one)
    }

    pub fn is_ok(&self) -> bool {
        self.antisymmetry_violations.is_empty()
            && self.divergence_violations.is_empty()
            && self.non_finite.is_empty()
            && self.unit_strength()
    }
}

/// Verifies antisymmetry, zero divergence away from the terminals and unit
/// strength at the source, in exact arithmetic.
pub fn check_unit_flow(theta: &FlowAssignment) -> FlowReport {
    let mut report = FlowReport::default();
    let mut net_out: BTreeMap<usize, Dyadic> = BTreeMap::new();
    let mut checked = BTreeSet::new();
    for ((x, y), v) in theta.entries() {
        let key = (x.min(y), x.max(y));
        if !checked.insert(key) {
            continue;
        }
        let forward = theta.values.get(&(x, y)).copied();
        let backward = theta.values.get(&(y, x)).copied();
        let (fx, bx) = match (forward, backward) {
            (Some(f), Some(b)) => (f, b),
            (Some(f), None) => (f, -f),
            _ => (v, -v),
        };
        let (Some(df), Some(db)) = (Dyadic::from_f64(fx), Dyadic::from_f64(bx)) else {
            report.non_finite.push((x, y));
            continue;
        };
        if forward.is_some() && backward.is_some() {
            let mut s = df.clone();
            s.add_assign(&db);
            if !s.is_zero() {
                report.antisymmetry_violations.push((x, y));
            }
        }
        net_out.entry(x).or_insert_with(Dyadic::zero).add_assign(&df);
        net_out.entry(y).or_insert_with(Dyadic::zero).add_assign(&db);
    }
    for (&v, d) in &net_out {
        if v == theta.source || theta.sinks.contains(&v) {
            continue;
        }
        if !d.is_zero() {
            report.divergence_violations.push((v, d.clone()));
        }
    }
    report.source_strength = Some(
        net_out
            .get(&theta.source)
            .cloned()
            .unwrap_or_else(Dyadic::zero),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_roundtrip_and_sums() {
        for x in [0.0, 1.0, -0.375, 1e-300, 3.0e300, f64::MIN_POSITIVE / 8.0, 0.1] {
            assert_eq!(Dyadic::from_f64(x).unwrap().to_f64(), x);
        }
        let mut s = Dyadic::zero();
        for _ in 0..10 {
            s.add_assign(&Dyadic::from_f64(0.1).unwrap());
        }
        // ten copies of the double nearest 0.1 are not exactly one
        assert!(!s.is_one());
        let mut t = Dyadic::zero();
        for _ in 0..8 {
            t.add_assign(&Dyadic::from_f64(0.125).unwrap());
        }
        assert!(t.is_one());
        assert_eq!(Dyadic::from_f64(0.25).unwrap().mul_int(4), Dyadic::one());
        assert_eq!(format!("{}", Dyadic::from_f64(-0.375).unwrap()), "-3/2^3");
    }

    #[test]
    fn single_edge_energy() {
        let net = WeightedNetwork::from_edges(2, [(0, 1, 4.0)]).unwrap();
        let mut f = FlowAssignment::new(0, [1]);
        f.set(0, 1, 1.0);
        assert_eq!(flow_energy(&net, &f).unwrap(), 0.25);
        assert!(check_unit_flow(&f).is_ok());
    }

    #[test]
    fn split_flow_energy() {
        let net = WeightedNetwork::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let mut f = FlowAssignment::new(0, [2]);
        f.set(0, 2, 0.5);
        f.set(0, 1, 0.5);
        f.set(1, 2, 0.5);
        assert!(check_unit_flow(&f).is_ok());
        assert!((flow_energy(&net, &f).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn flow_on_missing_edge_is_an_error() {
        let net = WeightedNetwork::from_edges(3, [(0, 1, 1.0), (1, 2, 0.0)]).unwrap();
        let mut f = FlowAssignment::new(0, [2]);
        f.set(0, 1, 1.0);
        f.set(1, 2, 1.0);
        assert!(matches!(
            flow_energy(&net, &f),
            Err(Error::FlowOnZeroEdge { u: 1, v: 2, .. })
        ));
    }

    #[test]
    fn perturbed_edge_violates_at_two_vertices() {
        let mut f = FlowAssignment::new(0, [3]);
        f.set(0, 1, 1.0);
        f.set(1, 2, 1.0);
        f.set(2, 3, 1.0);
        assert!(check_unit_flow(&f).is_ok());
        f.set(1, 2, 0.75);
        let r = check_unit_flow(&f);
        let bad: Vec<usize> = r.divergence_violations.iter().map(|(v, _)| *v).collect();
        assert_eq!(bad, vec![1, 2]);
        assert!(r.unit_strength());
    }

    #[test]
    fn zero_flow_fails_unit_strength() {
        let f = FlowAssignment::new(0, [1]);
        let r = check_unit_flow(&f);
        assert!(!r.unit_strength());
        assert!(!r.is_ok());
    }

    #[test]
    fn broken_antisymmetry_is_reported() {
        let mut f = FlowAssignment::new(0, [1]);
        f.set_oriented(0, 1, 1.0);
        f.set_oriented(1, 0, -0.5);
        let r = check_unit_flow(&f);
        assert_eq!(r.antisymmetry_violations, vec![(0, 1)]);
    }
}
