//! The twelve acceptance criteria. Each test prints one PASS/FAIL line with
//! the measured quantities, then asserts the criterion at its stated tolerance.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rwlab::lattice::{box_of, Norm, Orientation, Point, Point2, ShortEdge};
use rwlab::network::{
    dirichlet_energy, domination_exact, domination_test, effective_conductance, flow_energy, theorem1_flow,
    FlowAssignment, TwoPointWeights, WeightedNetwork,
};
use rwlab::rcm::{
    moment_by_cdf, small_eps_moments, tail_certificate, Kernel, KernelKind, PowerProfile,
};
use rwlab::rewire::{
    cauchy_tail_estimate, conductivity_comparison, edge_loads, gamma_path, load_bound_checks, rewired_weight,
    shift_tail_checks, two_sample_tail_test, EdgeWindow, LoadSemantics, ShiftVector, BOX_GAP,
};
use rwlab::stepdist::StepDistribution;
use rwlab::walks::{convolve_pmf_with, resistance_growth_diagnostic, trial_rng, ConvolutionOptions};

fn verdict(criterion: u32, pass: bool, started: Instant, detail: String) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:>2}: {word} [{:.1}s] {detail}", started.elapsed().as_secs_f64());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_load_histogram_bounds() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for k in [1, 2] {
        let table = edge_loads(k, 7).unwrap();
        for c in load_bound_checks(&table, LoadSemantics::PerPair) {
            if c.bound > 0 {
                worst = worst.max(c.count as f64 / c.bound as f64);
            }
            if !c.holds() {
                failures.push(format!("k={k} {:?} l={:?}: {} > {}", c.orientation, c.scale, c.count, c.bound));
            }
        }
    }
    verdict(1, failures.is_empty(), t, format!("worst count/bound {worst:.3}; violations {failures:?}"));
}

#[test]
fn criterion_02_gamma_path_length() {
    let t = Instant::now();
    let mut violations = 0u64;
    let mut checked = 0u64;
    let mut longest = [0usize; 4];
    let mut check = |x: &Point2, y: &Point2, k: u32| {
        if let Some(p) = gamma_path(x, y, k).unwrap() {
            checked += 1;
            longest[k as usize] = longest[k as usize].max(p.len());
            if p.len() as i64 > 10 * 3i64.pow(k) {
                violations += 1;
            }
        }
    };
    // exhaustive for k ≤ 2: paths are invariant under translation by 3^k,
    // so x ranges over one box and y over every partner box
    for k in [1u32, 2] {
        let side = 3i64.pow(k);
        for x in (0..side * side).map(|i| Point([i / side, i % side])) {
            for bx in -7i64..=7 {
                for by in -7i64..=7 {
                    if !BOX_GAP.contains(&bx.unsigned_abs().max(by.unsigned_abs())) {
                        continue;
                    }
                    for o in 0..side * side {
                        check(&x, &Point([bx * side + o / side, by * side + o % side]), k);
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let side = 27i64;
    let mut sampled = 0;
    while sampled < 100_000 {
        let x = Point([rng.random_range(-1000..1000), rng.random_range(-1000..1000)]);
        let a = box_of(&x, 3).unwrap().index;
        let (bx, by) = (rng.random_range(-7i64..=7), rng.random_range(-7i64..=7));
        if !BOX_GAP.contains(&bx.unsigned_abs().max(by.unsigned_abs())) {
            continue;
        }
        let y = Point([
            (a.0[0] + bx) * side + rng.random_range(0..side),
            (a.0[1] + by) * side + rng.random_range(0..side),
        ]);
        check(&x, &y, 3);
        sampled += 1;
    }
    verdict(
        2,
        violations == 0,
        t,
        format!("{checked} paths, longest {:?} vs limits [30, 90, 270], violations {violations}", &longest[1..]),
    );
}

#[test]
fn criterion_03_shift_tail_exact() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for k in 1..=4 {
        for c in shift_tail_checks(Point([0, 0]), k, LoadSemantics::PerPair).unwrap() {
            worst = worst.max(c.probability() / c.bound());
            if !c.holds() {
                failures.push(format!("k={k} {:?} l={}: {} > {}", c.orientation, c.scale, c.probability(), c.bound()));
            }
        }
    }
    verdict(3, failures.is_empty(), t, format!("worst P/bound {worst:.4}; violations {failures:?}"));
}

fn u_samples(anchor: [i64; 2], orientation: Orientation, count: usize, seed: u64) -> Vec<f64> {
    let e = ShortEdge { anchor: Point(anchor), orientation };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| rewired_weight(&e, &ShiftVector::random(8, &mut rng).unwrap()).unwrap())
        .collect()
}

#[test]
fn criterion_04_cauchy_tail_of_u() {
    let t = Instant::now();
    let n = 100_000;
    let thresholds: Vec<f64> = (0..=6).map(|j| 3f64.powi(j)).collect();
    let first = u_samples([0, 0], Orientation::Vertical, n, 41);
    let second = u_samples([13, -5], Orientation::Vertical, n, 42);
    let tail = cauchy_tail_estimate(&first, &thresholds).unwrap();
    let base = tail.rows[0].scaled;
    let sup = tail.max_scaled();
    let bounded = sup <= 10.0 * base;
    let z = two_sample_tail_test(&first, &second, &thresholds)
        .unwrap()
        .iter()
        .map(|r| r.z.abs())
        .fold(0.0, f64::max);
    let same_law = z <= 4.0;
    let scaled: Vec<String> = tail.rows.iter().map(|r| format!("{:.1}", r.scaled)).collect();
    verdict(
        4,
        bounded && same_law,
        t,
        format!(
            "3^j·P(U>3^j) for j=0..6: [{}]; sup/j0 = {:.1} (limit 10); two-sample max |z| = {z:.2} (limit 4)",
            scaled.join(", "),
            sup / base
        ),
    );
}

#[test]
fn criterion_05_staged_flow_energy() {
    let t = Instant::now();
    let f = theorem1_flow(2, 3.5, 2, 12).unwrap();
    let unit = f.block_flow().check().is_ok();
    let limit = 2f64.powf(3.5 - 4.0) + 0.1;
    let ratios: Vec<(u32, f64)> = f.stage_ratios().into_iter().filter(|&(k, _)| k >= 4).collect();
    let ratios_ok = ratios.iter().all(|&(_, r)| r <= limit);
    let total = f.total_energy();
    // geometric continuation of the last stage with the worst observed ratio
    let worst = ratios.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    let last = f.stage_energies.last().unwrap().1;
    let tail = last * worst / (1.0 - worst);
    let converged = worst < 1.0 && tail < 0.01 * (total + tail);
    verdict(
        5,
        unit && ratios_ok && converged,
        t,
        format!(
            "unit flow {unit}; max ratio k≥4 {worst:.4} (limit {limit:.4}); tail {:.3}% of total {total:.3}",
            100.0 * tail / (total + tail)
        ),
    );
}

#[test]
fn criterion_06_cauchy_checkpoints() {
    let t = Instant::now();
    let dist = StepDistribution::<1>::discretized_cauchy();
    let mut worst_product = f64::INFINITY;
    let mut off_centre = Vec::new();
    let final_pmf = convolve_pmf_with(&dist, 100, &ConvolutionOptions::cauchy(10_000), |p| {
        if p.steps > 0 && p.steps % 2 == 0 {
            worst_product = worst_product.min(p.at(0) * (6 * p.steps + 1) as f64);
            if p.argmax() != 0 {
                off_centre.push(p.steps);
            }
        }
    })
    .unwrap();
    let audit = final_pmf.truncated_mass;
    let pass = worst_product >= 0.5 && off_centre.is_empty() && audit < 1e-6;
    verdict(
        6,
        pass,
        t,
        format!(
            "min P(S_n=0)(6n+1) = {worst_product:.4} (≥ 0.5); argmax ≠ 0 at {off_centre:?}; truncated mass {audit:.3e} (limit 1e-6)"
        ),
    );
}

fn random_connected(rng: &mut ChaCha8Rng, vertices: usize, edges: usize) -> WeightedNetwork {
    let mut net = WeightedNetwork::new(vertices);
    for i in 1..vertices {
        let j = rng.random_range(0..i);
        net.add_edge(i, j, rng.random_range(0.2..5.0)).unwrap();
    }
    while net.edges().len() < edges {
        let (u, v) = (rng.random_range(0..vertices), rng.random_range(0..vertices));
        if u != v {
            net.add_edge(u, v, rng.random_range(0.2..5.0)).unwrap();
        }
    }
    net
}

#[test]
fn criterion_07_solver_correctness() {
    let t = Instant::now();
    let ceff = |net: &WeightedNetwork, a: &[usize], b: &[usize]| effective_conductance(net, a, b).unwrap().value;
    let mut closed_form_err = 0f64;
    let series = WeightedNetwork::from_edges(4, [(0, 1, 2.0), (1, 2, 3.0), (2, 3, 6.0)]).unwrap();
    closed_form_err = closed_form_err.max((ceff(&series, &[0], &[3]) - 1.0).abs());
    let parallel = WeightedNetwork::from_edges(2, [(0, 1, 0.5), (0, 1, 1.25), (0, 1, 4.0)]).unwrap();
    closed_form_err = closed_form_err.max((ceff(&parallel, &[0], &[1]) - 5.75).abs());
    let cycle = WeightedNetwork::from_edges(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (3, 0, 4.0)]).unwrap();
    // 0→2 via 1: (1·2)/(1+2); via 3: (4·3)/(4+3)
    closed_form_err = closed_form_err.max((ceff(&cycle, &[0], &[2]) - (2.0 / 3.0 + 12.0 / 7.0)).abs());

    // Dirichlet value of the harmonic potential against the Thomson value of
    // the normalized current: C·R = 1 at the optimum
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sandwich_err = 0f64;
    for _ in 0..20 {
        let net = random_connected(&mut rng, 12, 25);
        let sol = effective_conductance(&net, &[0], &[11]).unwrap();
        let dirichlet = dirichlet_energy(&net, &sol.potential).unwrap();
        let mut theta = FlowAssignment::new(0, [11]);
        for e in net.edges() {
            theta.add(e.u, e.v, e.conductance * (sol.potential[e.u] - sol.potential[e.v]) / sol.value);
        }
        let thomson = flow_energy(&net, &theta).unwrap();
        sandwich_err = sandwich_err.max((dirichlet * thomson - 1.0).abs());
    }

    let mut rayleigh_violations = 0;
    for _ in 0..100 {
        let net = random_connected(&mut rng, 10, 18);
        let before = ceff(&net, &[0], &[9]);
        let mut cs: Vec<f64> = net.edges().iter().map(|e| e.conductance).collect();
        let i = rng.random_range(0..cs.len());
        cs[i] *= rng.random_range(1.0..10.0);
        let after = ceff(&net.with_conductances(&cs).unwrap(), &[0], &[9]);
        if after < before - 1e-12 {
            rayleigh_violations += 1;
        }
    }
    verdict(
        7,
        closed_form_err < 1e-10 && sandwich_err < 1e-8 && rayleigh_violations == 0,
        t,
        format!("closed forms {closed_form_err:.1e}; sandwich {sandwich_err:.1e}; Rayleigh violations {rayleigh_violations}"),
    );
}

#[test]
fn criterion_08_domination() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut exact_violations = 0;
    let mut largest_gap = f64::NEG_INFINITY;
    for _ in 0..50 {
        let vertices = rng.random_range(3..=8);
        let edges = rng.random_range(vertices - 1..=10);
        let net = random_connected(&mut rng, vertices, edges);
        let sampler = TwoPointWeights::new(rng.random_range(0.1..0.9)).unwrap();
        let r = domination_exact(&net, &sampler, &[0], &[vertices - 1]).unwrap();
        largest_gap = largest_gap.max(r.expectation - r.baseline);
        if !r.holds() {
            exact_violations += 1;
        }
    }
    let mut mc_violations = 0;
    for _ in 0..200 {
        let vertices = rng.random_range(6..=12);
        let edges = rng.random_range(vertices..=2 * vertices + 4);
        let net = random_connected(&mut rng, vertices, edges);
        let sampler = TwoPointWeights::new(rng.random_range(0.1..0.9)).unwrap();
        let r = domination_test(&net, &sampler, &[0], &[vertices - 1], 200, &mut rng).unwrap();
        if r.mean > r.baseline + 3.0 * r.std_error {
            mc_violations += 1;
        }
    }
    verdict(
        8,
        exact_violations == 0 && mc_violations == 0,
        t,
        format!(
            "exact: {exact_violations}/50 violations, max E[C(ω)] − C(c) = {largest_gap:.3e}; MC: {mc_violations}/200 beyond 3σ"
        ),
    );
}

#[test]
fn criterion_09_conductivity_comparison() {
    let t = Instant::now();
    let core = 20;
    let window = EdgeWindow::centered(core + 8 * 9).unwrap();
    let boundary: Vec<Point2> = EdgeWindow::centered(core)
        .unwrap()
        .vertices()
        .filter(|p| p.norm_max() == core as u64)
        .collect();
    let mut ratios = Vec::new();
    let mut violations = 0;
    for r in 0..10 {
        let shifts = ShiftVector::random(2, &mut trial_rng(9, r)).unwrap();
        let rep = conductivity_comparison(&window, &shifts, &[Point([0, 0])], &boundary).unwrap();
        ratios.push(rep.ratio());
        if !rep.holds() {
            violations += 1;
        }
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(9, violations == 0, t, format!("10 realizations, min rewired/long-range {min:.3e}, violations {violations}"));
}

#[test]
fn criterion_10_tail_certificates() {
    let t = Instant::now();
    let radii: Vec<f64> = (1..=10).map(|j| 2f64.powi(j)).collect();
    let bounded_cases = [
        (KernelKind::PreferentialAttachment, 2.5, 0.4),
        (KernelKind::Min, 2.0, 0.4),
        (KernelKind::Min, 2.5, 0.5),
        (KernelKind::Product, 2.0, 0.4),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (kind, delta, gamma) in bounded_cases {
        let cert = tail_certificate(&Kernel::new(kind, gamma, 1.0).unwrap(), &PowerProfile::new(delta).unwrap(), &radii)
            .unwrap();
        let late = log_slope(&cert.rows[6..].iter().map(|r| (r.distance, r.scaled)).collect::<Vec<_>>());
        let ok = cert.slope <= 0.05 && cert.max_relative_error() < 0.01;
        pass &= ok;
        lines.push(format!(
            "{kind} δ={delta} γ={gamma}: slope {:.4} (late {late:.4}), sup {:.3}, err {:.1e}",
            cert.slope,
            cert.sup,
            cert.max_relative_error()
        ));
    }
    let contrast = tail_certificate(&Kernel::new(KernelKind::Min, 0.0, 1.0).unwrap(), &PowerProfile::new(1.5).unwrap(), &radii)
        .unwrap();
    let diverges = contrast.slope >= 0.5 && contrast.max_relative_error() < 0.01;
    pass &= diverges;
    lines.push(format!("contrast γ=0 δ=1.5: slope {:.4}", contrast.slope));
    verdict(10, pass, t, lines.join("; "));
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    cov / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn criterion_11_small_value_moments() {
    let t = Instant::now();
    let uniform_cdf = |x: f64| x.clamp(0.0, 1.0);
    // quadrature path
    let half = moment_by_cdf(uniform_cdf, 1.0, 0.5, 0.0).unwrap();
    let mut quad_err = (half.partial / 2.0 - 1.0).abs();
    let eps_list = [1e-2, 1e-3, 1e-4, 1e-6];
    for &eps in &eps_list {
        let m = moment_by_cdf(uniform_cdf, 1.0, 1.5, eps).unwrap();
        let exact = 2.0 / (1.0 + eps.sqrt());
        quad_err = quad_err.max((m.scaled / exact - 1.0).abs());
    }
    let limit_err = (moment_by_cdf(uniform_cdf, 1.0, 1.5, 1e-8).unwrap().scaled / 2.0 - 1.0).abs();

    // Monte Carlo path
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draw = |r: &mut ChaCha8Rng| r.random::<f64>();
    let low = small_eps_moments(draw, 0.5, &[], 1 << 20, &mut rng).unwrap();
    let last = low.running.last().unwrap();
    let mut worst_sigma = ((last.mean - 2.0) / last.std_error).abs();
    let high = small_eps_moments(draw, 1.5, &eps_list[..2], 1 << 20, &mut rng).unwrap();
    for c in &high.conditional {
        let exact = 2.0 / (1.0 + c.eps.sqrt());
        worst_sigma = worst_sigma.max(((c.scaled - exact) / c.scaled_error).abs());
    }
    verdict(
        11,
        quad_err < 0.01 && limit_err < 0.01 && worst_sigma <= 3.0,
        t,
        format!("quadrature rel err {quad_err:.1e}, limit 2 at ε=1e-8 {limit_err:.1e}; MC worst {worst_sigma:.2}σ"),
    );
}

#[test]
fn criterion_12_resistance_growth_contrast() {
    let t = Instant::now();
    let sizes = [8, 16, 32, 64];
    let growth = |s: f64| {
        let d = StepDistribution::<2>::power_law(s, 512, Norm::Max).unwrap();
        resistance_growth_diagnostic(&d, &sizes, 1e-12).unwrap()
    };
    let recurrent_side = growth(4.0).increment_ratios();
    let transient_side = growth(3.5).increment_ratios();
    let grows = recurrent_side.iter().all(|&r| r >= 1.2);
    let decays = transient_side.iter().all(|&r| r <= 0.8);
    verdict(
        12,
        grows && decays,
        t,
        format!("increment ratios s=4 {recurrent_side:.3?} (need ≥ 1.2); s=3.5 {transient_side:.3?} (need ≤ 0.8)"),
    );
}
