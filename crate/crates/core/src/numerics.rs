//! Small numeric helpers shared across modules.

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Least-squares line through (x, y); returns (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

// Gauss–Kronrod 7/15 nodes on [−1, 1] (non-negative half) and weights.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd-indexed nodes 1, 3, 5, 7.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (estimate, |Kronrod − Gauss|).
fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in GK_NODES.iter().zip(&KRONROD_WEIGHTS).enumerate() {
        let fx = if x == 0.0 { f(c) } else { f(c - h * x) + f(c + h * x) };
        kronrod += wk * fx;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * fx;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integral estimate with its error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive Gauss–Kronrod on [a, b]; the panel with the largest error is
/// bisected until the total error is below max(abs_tol, rel_tol·|value|).
/// `breaks` are interior points (kinks) used as initial panel edges.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> crate::error::Result<Quadrature> {
    const MAX_PANELS: usize = 4000;
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    edges.extend(inner);
    edges.push(b);
    edges.dedup();
    // (error, lo, hi, value)
    let mut panels: Vec<(f64, f64, f64, f64)> = edges
        .windows(2)
        .map(|w| {
            let (v, e) = kronrod_panel(&mut f, w[0], w[1]);
            (e, w[0], w[1], v)
        })
        .collect();
    loop {
        let value = compensated_sum(panels.iter().map(|p| p.3));
        let error: f64 = panels.iter().map(|p| p.0).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(crate::error::Error::Quadrature(format!(
                "non-finite estimate {value} ± {error} on [{a}, {b}]"
            )));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error, panels: panels.len() });
        }
        if panels.len() >= MAX_PANELS {
            return Err(crate::error::Error::Quadrature(format!(
                "{value} ± {error} on [{a}, {b}] after {} panels",
                panels.len()
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (_, lo, hi, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(crate::error::Error::Quadrature(format!(
                "panel [{lo}, {hi}] cannot be split further"
            )));
        }
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e) = kronrod_panel(&mut f, l, h);
            panels.push((e, l, h, v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }

    #[test]
    fn fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let (m, b) = linear_fit(&x, &y);
        assert!((m - 2.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_se_of_constant() {
        let (m, se) = mean_and_se(&[3.0; 5]);
        assert_eq!(m, 3.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let q = integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, &[], 1e-10, 0.0).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
        assert_eq!(q.panels, 1);
    }

    #[test]
    fn adaptive_handles_kinks_and_endpoint_singularities() {
        let q = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-13, 0.0).unwrap();
        assert!((q.value - (0.045 + 0.245)).abs() < 1e-13);
        // ∫₀¹ x^{-1/2} = 2 under x = e^u
        let q = integrate(|u: f64| (0.5 * u).exp(), -80.0, 0.0, &[], 1e-12, 1e-12).unwrap();
        assert!((q.value - 2.0).abs() < 1e-10);
        assert!(q.error < 1e-10);
    }

    #[test]
    fn reports_failure() {
        assert!(integrate(|x: f64| 1.0 / x, -1.0, 1.0, &[], 1e-12, 0.0).is_err());
    }
}
