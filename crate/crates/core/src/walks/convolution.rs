//! Exact n-fold convolution of one-dimensional step laws on a finite window.
//!
//! Mass that would land outside the window, or that sits in step-law tails
//! beyond the step radius, is killed and accounted for. Every reported value
//! is therefore a lower bound for the untruncated probability.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::stepdist::StepDistribution;

/// Default window radius for the Cauchy checks.
pub const DEFAULT_CAUCHY_RADIUS: u64 = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConvolutionMethod {
    /// FFT above a size threshold, direct summation below it.
    #[default]
    Auto,
    Direct,
    Fft,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvolutionOptions {
    /// Window radius W for S_n.
    pub radius: u64,
    /// Step-law truncation radius M; defaults to W.
    pub step_radius: Option<u64>,
    /// Largest admissible P(|X| > M).
    pub per_step_tolerance: f64,
    pub method: ConvolutionMethod,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        ConvolutionOptions {
            radius: DEFAULT_CAUCHY_RADIUS,
            step_radius: None,
            per_step_tolerance: 1e-9,
            method: ConvolutionMethod::Auto,
        }
    }
}

impl ConvolutionOptions {
    pub fn with_radius(radius: u64) -> Self {
        ConvolutionOptions {
            radius,
            ..Default::default()
        }
    }

    /// Window of radius `radius` whose step-tail tolerance is just loose
    /// enough for the Cauchy law, whose tail at radius r is about 2/(πr).
    pub fn cauchy(radius: u64) -> Self {
        let tail = StepDistribution::<1>::discretized_cauchy().tail_mass(radius);
        ConvolutionOptions {
            radius,
            per_step_tolerance: tail * (1.0 + 1e-12),
            ..Default::default()
        }
    }

    fn step_radius(&self) -> u64 {
        self.step_radius.unwrap_or(self.radius)
    }
}

/// Truncated pmf of S_n on {−W,…,W}.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolvedPmf {
    pub steps: usize,
    pub radius: u64,
    /// values[j + W] = P(S_n = j, never killed).
    pub values: Vec<f64>,
    /// 1 − Σ values: total killed mass.
    pub truncated_mass: f64,
    /// The part of `truncated_mass` removed by the step-law truncation.
    pub step_tail_loss: f64,
}

impl ConvolvedPmf {
    pub fn at(&self, x: i64) -> f64 {
        let w = self.radius as i64;
        if x.abs() > w {
            0.0
        } else {
            self.values[(x + w) as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value()
    }

    /// Smallest |x| among the maximizers, with sign.
    pub fn argmax(&self) -> i64 {
        let w = self.radius as i64;
        let mut best = (f64::NEG_INFINITY, 0i64);
        for (i, &v) in self.values.iter().enumerate() {
            let x = i as i64 - w;
            if v > best.0 || (v == best.0 && x.abs() < best.1.abs()) {
                best = (v, x);
            }
        }
        best.1
    }

    /// Σ_{|x| ≤ r} P(S_n = x).
    pub fn mass_within(&self, r: u64) -> f64 {
        let r = r.min(self.radius) as i64;
        (-r..=r).map(|x| self.at(x)).collect::<CompensatedSum>().value()
    }

    fn point_mass(radius: u64) -> Self {
        let mut values = vec![0.0; 2 * radius as usize + 1];
        values[radius as usize] = 1.0;
        ConvolvedPmf {
            steps: 0,
            radius,
            values,
            truncated_mass: 0.0,
            step_tail_loss: 0.0,
        }
    }
}

/// Exact pmf of S_n with the default options.
pub fn convolve_pmf(dist: &StepDistribution<1>, n: usize, radius: u64) -> Result<ConvolvedPmf> {
    convolve_pmf_with(dist, n, &ConvolutionOptions::with_radius(radius), |_| {})
}

/// Exact pmf of S_n, calling `visit` on every intermediate S_0, …, S_n.
pub fn convolve_pmf_with(
    dist: &StepDistribution<1>,
    n: usize,
    options: &ConvolutionOptions,
    mut visit: impl FnMut(&ConvolvedPmf),
) -> Result<ConvolvedPmf> {
    let w = options.radius;
    if w == 0 {
        return Err(Error::WindowTooSmall("convolution radius must be positive".into()));
    }
    let m = match dist.support_radius() {
        Some(r) => r.min(options.step_radius()),
        None => options.step_radius(),
    };
    let tail = dist.tail_mass(m);
    if tail > options.per_step_tolerance {
        return Err(Error::Truncation {
            mass: tail,
            tolerance: options.per_step_tolerance,
        });
    }
    let step: Vec<f64> = (0..=m as i64).map(|y| dist.pmf1(y)).collect();
    let method = match options.method {
        ConvolutionMethod::Auto if (w as u128) * (m as u128) > 4_000_000 => ConvolutionMethod::Fft,
        ConvolutionMethod::Auto => ConvolutionMethod::Direct,
        other => other,
    };
    let mut current = ConvolvedPmf::point_mass(w);
    visit(&current);
    let mut fft = (method == ConvolutionMethod::Fft).then(|| FftConvolver::new(w, &step));
    for k in 1..=n {
        let mut next = match fft.as_mut() {
            Some(f) => f.step(&current.values),
            None => direct_step(&current.values, w, &step),
        };
        symmetrize(&mut next);
        let kept: f64 = next.iter().copied().collect::<CompensatedSum>().value();
        let prev_kept = 1.0 - current.truncated_mass;
        current = ConvolvedPmf {
            steps: k,
            radius: w,
            values: next,
            truncated_mass: (1.0 - kept).max(0.0),
            step_tail_loss: current.step_tail_loss + prev_kept * tail,
        };
        visit(&current);
    }
    Ok(current)
}

/// new[x] = Σ_y old[y]·p(x − y) for x ≥ 0, mirrored to x < 0.
fn direct_step(old: &[f64], w: u64, step: &[f64]) -> Vec<f64> {
    let w = w as i64;
    let m = step.len() as i64 - 1;
    let mut out = vec![0.0; old.len()];
    for x in 0..=w {
        let lo = (x - m).max(-w);
        let hi = (x + m).min(w);
        let mut acc = CompensatedSum::new();
        for y in lo..=hi {
            let v = old[(y + w) as usize];
            if v != 0.0 {
                acc.add(v * step[(x - y).unsigned_abs() as usize]);
            }
        }
        out[(x + w) as usize] = acc.value();
        out[(w - x) as usize] = acc.value();
    }
    out
}

/// Forces ρ(j) = ρ(−j) bit for bit and clears round-off negatives.
fn symmetrize(values: &mut [f64]) {
    let len = values.len();
    for i in 0..len / 2 {
        let j = len - 1 - i;
        let v = (0.5 * (values[i] + values[j])).max(0.0);
        values[i] = v;
        values[j] = v;
    }
    let mid = len / 2;
    values[mid] = values[mid].max(0.0);
}

struct FftConvolver {
    size: usize,
    w: usize,
    step_spectrum: Vec<Complex<f64>>,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buffer: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl FftConvolver {
    fn new(w: u64, step: &[f64]) -> Self {
        let m = step.len() - 1;
        let w = w as usize;
        // linear support of the product is 2(W+M)+1, so no wrap-around
        let size = (2 * (w + m) + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut step_spectrum = vec![Complex::new(0.0, 0.0); size];
        for (y, &p) in step.iter().enumerate() {
            step_spectrum[y].re = p;
            if y > 0 {
                step_spectrum[size - y].re = p;
            }
        }
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let mut scratch = vec![Complex::new(0.0, 0.0); scratch_len];
        forward.process_with_scratch(&mut step_spectrum, &mut scratch);
        FftConvolver {
            size,
            w,
            step_spectrum,
            forward,
            inverse,
            buffer: vec![Complex::new(0.0, 0.0); size],
            scratch,
        }
    }

    fn step(&mut self, old: &[f64]) -> Vec<f64> {
        let (size, w) = (self.size, self.w as i64);
        self.buffer.fill(Complex::new(0.0, 0.0));
        for (i, &v) in old.iter().enumerate() {
            let x = i as i64 - w;
            self.buffer[x.rem_euclid(size as i64) as usize].re = v;
        }
        self.forward.process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (b, s) in self.buffer.iter_mut().zip(&self.step_spectrum) {
            *b *= *s;
        }
        self.inverse.process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 1.0 / size as f64;
        (0..old.len())
            .map(|i| {
                let x = i as i64 - w;
                self.buffer[x.rem_euclid(size as i64) as usize].re * scale
            })
            .collect()
    }
}

/// P(|S_n| ≤ 3n) for discretized Cauchy steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfMass {
    pub n: usize,
    /// Lower bound: mass of the killed walk inside the band.
    pub probability: f64,
    /// Mass whose location is unresolved; probability + this bounds it above.
    pub truncated_mass: f64,
}

impl HalfMass {
    pub fn upper_bound(&self) -> f64 {
        (self.probability + self.truncated_mass).min(1.0)
    }

    pub fn holds(&self) -> bool {
        self.probability >= 0.5
    }
}

pub fn halfmass_check(n: usize, options: &ConvolutionOptions) -> Result<HalfMass> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let band = 3 * n as u64;
    if options.radius < band {
        return Err(Error::WindowTooSmall(format!(
            "radius {} does not cover the band |x| ≤ {band}",
            options.radius
        )));
    }
    let dist = StepDistribution::<1>::discretized_cauchy();
    let pmf = convolve_pmf_with(&dist, n, options, |_| {})?;
    Ok(HalfMass {
        n,
        probability: pmf.mass_within(band),
        truncated_mass: pmf.truncated_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Norm;
    use std::f64::consts::PI;

    fn opts(radius: u64, method: ConvolutionMethod) -> ConvolutionOptions {
        ConvolutionOptions {
            method,
            ..ConvolutionOptions::cauchy(radius)
        }
    }

    #[test]
    fn zero_steps_is_point_mass() {
        let d = StepDistribution::<1>::power_law(2.0, 3, Norm::Max).unwrap();
        let p = convolve_pmf(&d, 0, 5).unwrap();
        assert_eq!(p.at(0), 1.0);
        assert_eq!(p.total(), 1.0);
    }

    #[test]
    fn simple_walk_matches_binomial() {
        let d = StepDistribution::<1>::power_law(2.0, 1, Norm::Max).unwrap();
        let p = convolve_pmf(&d, 10, 20).unwrap();
        assert!((p.at(0) - 252.0 / 1024.0).abs() < 1e-15);
        assert!((p.at(4) - 120.0 / 1024.0).abs() < 1e-15);
        assert_eq!(p.at(1), 0.0);
        assert!(p.truncated_mass < 1e-15);
    }

    #[test]
    fn strict_default_tolerance_rejects_cauchy() {
        let d = StepDistribution::<1>::discretized_cauchy();
        let err = convolve_pmf(&d, 2, DEFAULT_CAUCHY_RADIUS).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn fft_agrees_with_direct() {
        let d = StepDistribution::<1>::discretized_cauchy();
        let a = convolve_pmf_with(&d, 6, &opts(400, ConvolutionMethod::Direct), |_| {}).unwrap();
        let b = convolve_pmf_with(&d, 6, &opts(400, ConvolutionMethod::Fft), |_| {}).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-14, "{x} {y}");
        }
        assert!((a.truncated_mass - b.truncated_mass).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_mass_accounted() {
        let d = StepDistribution::<1>::discretized_cauchy();
        let p = convolve_pmf_with(&d, 4, &opts(300, ConvolutionMethod::Direct), |_| {}).unwrap();
        for x in 0..=300 {
            assert_eq!(p.at(x), p.at(-x));
        }
        assert!((p.total() + p.truncated_mass - 1.0).abs() < 1e-14);
        assert!(p.step_tail_loss <= p.truncated_mass + 1e-15);
    }

    #[test]
    fn two_step_cauchy_peaks_at_zero() {
        let d = StepDistribution::<1>::discretized_cauchy();
        let p = convolve_pmf_with(&d, 2, &opts(2000, ConvolutionMethod::Auto), |_| {}).unwrap();
        assert_eq!(p.argmax(), 0);
        assert!(p.at(0) * 13.0 >= 0.5);
    }

    #[test]
    fn halfmass_one_step_closed_form() {
        let h = halfmass_check(1, &ConvolutionOptions::cauchy(100)).unwrap();
        let exact = 2.0 / PI * 3f64.atan();
        assert!((h.probability - exact).abs() < 1e-14);
        assert!(h.holds());
    }

    #[test]
    fn halfmass_ten_steps() {
        let h = halfmass_check(10, &ConvolutionOptions::cauchy(DEFAULT_CAUCHY_RADIUS)).unwrap();
        assert!(h.holds(), "{h:?}");
    }
}
