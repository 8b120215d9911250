use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rwlab::network::{
    dirichlet_energy, domination_exact, domination_test, effective_conductance, read_network,
    walk_on_network, write_network, NetworkDocument, TwoPointWeights, WeightedNetwork,
};

/// A path 0 – 1 – … – (n−1) with extra chords, conductances in (0.1, 10).
fn network() -> impl Strategy<Value = WeightedNetwork> {
    (3usize..10)
        .prop_flat_map(|n| {
            let path = prop::collection::vec(0.1f64..10.0, n - 1);
            let chords = prop::collection::vec((0..n, 0..n, 0.1f64..10.0), 0..2 * n);
            (Just(n), path, chords)
        })
        .prop_map(|(n, path, chords)| {
            let mut net = WeightedNetwork::new(n);
            for (i, c) in path.into_iter().enumerate() {
                net.add_edge(i, i + 1, c).unwrap();
            }
            for (u, v, c) in chords {
                if u != v {
                    net.add_edge(u, v, c).unwrap();
                }
            }
            net
        })
}

fn ceff(net: &WeightedNetwork, a: &[usize], b: &[usize]) -> f64 {
    effective_conductance(net, a, b).unwrap().value
}

proptest! {
    #[test]
    fn series_path_matches_harmonic_sum(cs in prop::collection::vec(0.01f64..100.0, 1..30)) {
        let n = cs.len() + 1;
        let net = WeightedNetwork::from_edges(n, cs.iter().enumerate().map(|(i, &c)| (i, i + 1, c))).unwrap();
        let expected = 1.0 / cs.iter().map(|c| 1.0 / c).sum::<f64>();
        prop_assert!((ceff(&net, &[0], &[n - 1]) / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parallel_edges_add(cs in prop::collection::vec(0.01f64..100.0, 1..20)) {
        let net = WeightedNetwork::from_edges(2, cs.iter().map(|&c| (0, 1, c))).unwrap();
        let expected: f64 = cs.iter().sum();
        prop_assert!((ceff(&net, &[0], &[1]) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conductance_is_symmetric(net in network()) {
        let last = net.vertex_count() - 1;
        let (ab, ba) = (ceff(&net, &[0], &[last]), ceff(&net, &[last], &[0]));
        prop_assert!((ab - ba).abs() <= 1e-10 * ab);
    }

    #[test]
    fn rayleigh_monotonicity(net in network(), pick in any::<prop::sample::Index>(), factor in 1.0f64..20.0) {
        let last = net.vertex_count() - 1;
        let before = ceff(&net, &[0], &[last]);
        let mut cs: Vec<f64> = net.edges().iter().map(|e| e.conductance).collect();
        let i = pick.index(cs.len());
        cs[i] *= factor;
        let after = ceff(&net.with_conductances(&cs).unwrap(), &[0], &[last]);
        prop_assert!(after >= before * (1.0 - 1e-12), "{before} -> {after}");
    }

    #[test]
    fn harmonic_potential_minimises_energy(net in network(), noise in prop::collection::vec(-0.3f64..0.3, 10)) {
        let last = net.vertex_count() - 1;
        let sol = effective_conductance(&net, &[0], &[last]).unwrap();
        let energy = dirichlet_energy(&net, &sol.potential).unwrap();
        prop_assert!((energy / sol.value - 1.0).abs() < 1e-8);
        // any other potential with the same boundary values costs more
        let mut other = sol.potential.clone();
        for v in 1..last {
            other[v] += noise[v % noise.len()];
        }
        prop_assert!(dirichlet_energy(&net, &other).unwrap() >= energy * (1.0 - 1e-12));
    }

    #[test]
    fn merging_sources_never_lowers_conductance(net in network()) {
        let last = net.vertex_count() - 1;
        prop_assert!(ceff(&net, &[0, 1], &[last]) >= ceff(&net, &[0], &[last]) * (1.0 - 1e-12));
    }

    #[test]
    fn text_format_round_trips(net in network()) {
        let doc = NetworkDocument::new(net).with_meta("origin", "proptest");
        let mut buf = Vec::new();
        write_network(&mut buf, &doc).unwrap();
        let back = read_network(buf.as_slice()).unwrap();
        prop_assert_eq!(back, doc);
    }
}

#[test]
fn four_cycle_and_wheatstone_bridge() {
    // unit square between opposite corners: two paths of resistance 2
    let square = WeightedNetwork::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
    assert!((ceff(&square, &[0], &[2]) - 1.0).abs() < 1e-10);
    // adjacent corners: 1 in parallel with 1/3
    assert!((ceff(&square, &[0], &[1]) - 4.0 / 3.0).abs() < 1e-10);
    // a balanced bridge carries no current through its middle edge
    let bridge = WeightedNetwork::from_edges(
        4,
        [(0, 1, 1.0), (0, 2, 2.0), (1, 3, 1.0), (2, 3, 2.0), (1, 2, 7.0)],
    )
    .unwrap();
    assert!((ceff(&bridge, &[0], &[3]) - 1.5).abs() < 1e-10);
}

#[test]
fn domination_on_random_small_networks() {
    let sampler = TwoPointWeights::new(0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..10 {
        let net = network().new_tree(&mut runner).unwrap().current();
        let net = WeightedNetwork::from_edges(net.vertex_count(), net.edges().iter().take(10).map(|e| (e.u, e.v, e.conductance))).unwrap();
        let last = net.vertex_count() - 1;
        let exact = domination_exact(&net, &sampler, &[0], &[last]).unwrap();
        assert!(exact.holds(), "{} > {}", exact.expectation, exact.baseline);
        let mc = domination_test(&net, &sampler, &[0], &[last], 300, &mut rng).unwrap();
        assert!(mc.mean <= mc.baseline + 3.0 * mc.std_error + 1e-12);
    }
}

#[test]
fn walks_stay_in_their_component() {
    let net = WeightedNetwork::from_edges(5, [(0, 1, 1.0), (1, 2, 3.0), (3, 4, 1.0)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let walk = walk_on_network(&net, 0, 200, &mut rng).unwrap();
    assert!(walk.trajectory.iter().all(|&v| v <= 2));
}
