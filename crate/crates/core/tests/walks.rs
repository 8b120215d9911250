use proptest::prelude::*;

use rwlab::lattice::{Norm, Point};
use rwlab::stepdist::StepDistribution;
use rwlab::walks::{convolve_pmf, convolve_pmf_with, halfmass_check, simulate, ConvolutionOptions};

/// Exact n-fold self-convolution by the schoolbook recursion.
fn naive_pmf(step: &[(i64, f64)], n: usize) -> std::collections::BTreeMap<i64, f64> {
    let mut current = std::collections::BTreeMap::from([(0i64, 1.0)]);
    for _ in 0..n {
        let mut next = std::collections::BTreeMap::new();
        for (&x, &p) in &current {
            for &(y, q) in step {
                *next.entry(x + y).or_insert(0.0) += p * q;
            }
        }
        current = next;
    }
    current
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncated_power_law_is_a_symmetric_pmf(s in 1.2f64..4.0, radius in 1u64..40) {
        let d = StepDistribution::<1>::power_law(s, radius, Norm::Max).unwrap();
        let total: f64 = (-(radius as i64)..=radius as i64).map(|y| d.pmf(&Point([y]))).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for y in 1..=radius as i64 {
            prop_assert_eq!(d.pmf(&Point([y])), d.pmf(&Point([-y])));
            prop_assert!(d.pmf(&Point([y])) <= d.pmf(&Point([y - 1])) || y == 1);
        }
        prop_assert_eq!(d.pmf(&Point([0])), 0.0);
    }

    #[test]
    fn convolution_matches_schoolbook(s in 1.5f64..3.5, radius in 1u64..6, n in 1usize..6) {
        let d = StepDistribution::<1>::power_law(s, radius, Norm::Max).unwrap();
        let step: Vec<(i64, f64)> = (-(radius as i64)..=radius as i64).map(|y| (y, d.pmf(&Point([y])))).collect();
        let window = radius * n as u64;
        let fast = convolve_pmf(&d, n, window).unwrap();
        for (x, p) in naive_pmf(&step, n) {
            prop_assert!((fast.at(x) - p).abs() < 1e-12, "x={x}: {} vs {p}", fast.at(x));
        }
        prop_assert!(fast.truncated_mass.abs() < 1e-12);
    }

    #[test]
    fn cauchy_pmf_is_symmetric_and_decays(n in 1usize..12) {
        let d = StepDistribution::<1>::discretized_cauchy();
        let p = convolve_pmf_with(&d, n, &ConvolutionOptions::cauchy(2000), |_| {}).unwrap();
        for x in 1..50 {
            prop_assert!((p.at(x) - p.at(-x)).abs() <= 1e-15);
        }
        // near the origin parity effects win (steps are never zero); beyond 2n the tail decays
        for x in 2 * n as i64 + 1..80 {
            prop_assert!(p.at(x) <= p.at(x - 1) + 1e-15);
        }
        prop_assert!((p.total() + p.truncated_mass - 1.0).abs() < 1e-12);
    }
}

#[test]
fn simulated_returns_match_the_exact_pmf() {
    // P(S_2 = 0) for the nearest-neighbour-dominated law, exact vs 40k walks
    let d = StepDistribution::<1>::power_law(3.0, 4, Norm::Max).unwrap();
    let exact = convolve_pmf(&d, 2, 8).unwrap().at(0);
    let stats = simulate(&d, 2, 40_000, &[2], 5).unwrap();
    let r = stats.checkpoints[0];
    assert!((r.probability - exact).abs() < 4.0 * r.std_error, "{} vs {exact}", r.probability);
}

#[test]
fn simulation_is_reproducible() {
    let d = StepDistribution::<2>::power_law(3.5, 50, Norm::Euclidean).unwrap();
    let a = simulate(&d, 300, 20, &[100, 300], 9).unwrap();
    let b = simulate(&d, 300, 20, &[100, 300], 9).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate(&d, 300, 20, &[100, 300], 10).unwrap());
}

#[test]
fn halfmass_for_small_n() {
    for n in [1, 2, 5, 10, 20] {
        let h = halfmass_check(n, &ConvolutionOptions::cauchy(10_000)).unwrap();
        assert!(h.holds(), "n = {n}: {}", h.probability);
    }
}
