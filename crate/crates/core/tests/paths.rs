use std::f64::consts::PI;

use ionet::circuits::{circulator_from_magnitudes, fabry_perot, ChannelSpec};
use ionet::contraction::{contract_network, ContractionOptions};
use ionet::linalg::{sigma_max, spectral_radius};
use ionet::network::{Geometry, Link, Tolerances};
use ionet::paths::{
    sum_paths, validity_check, EnumerationLimits, PathEnd, PathGraph, PathStart, ValidityOptions,
};
use ionet::random::random_feedback_pair;
use ionet::{Error, Network64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C_LIGHT: f64 = 299_792_458.0;

fn circulator_channel(interconnect: f64) -> Network64 {
    let c = circulator_from_magnitudes(0.98, 0.08, 0.08);
    let kappa0 = 2.0 * PI * 400e3;
    ChannelSpec {
        circulator_1: c.clone(),
        circulator_2: c,
        link_a: Link::Distance(0.05),
        interconnect: Link::Distance(interconnect),
        link_b: Link::Distance(0.05),
        kappa_a: kappa0,
        kappa_b: kappa0,
        geometry: Geometry {
            k0: Some(2.0 * PI * 5e9 / (0.7 * C_LIGHT)),
            v_p: Some(0.7 * C_LIGHT),
            kappa0: Some(kappa0),
        },
        ..ChannelSpec::ideal()
    }
    .build()
}

fn find<'a>(paths: &'a [ionet::PathRecord64], ports: &str) -> &'a ionet::PathRecord64 {
    paths
        .iter()
        .find(|p| p.port_string() == ports)
        .unwrap_or_else(|| panic!("path {ports} not enumerated"))
}

#[test]
fn circulator_channel_named_paths() {
    let net = circulator_channel(1.0);
    let graph = PathGraph::from_network(&net, &Tolerances::default()).unwrap();
    let paths = graph.enumerate(&EnumerationLimits::new(5, 1e-3)).unwrap();
    let s = &graph.s;
    // a → circulator 1 → interconnect → circulator 2 → b
    let w1 = find(&paths, "0>1>2>4>5>7>7");
    assert_eq!((w1.start, w1.end, w1.n_traversals), (PathStart::Source(0), PathEnd::Source(7), 3));
    let mag = |i: usize, j: usize| s[(i, j)].norm();
    assert!((w1.magnitude() - mag(5, 4) * mag(2, 1)).abs() < 1e-15);
    // retro-reflection at port 4, cross-talk back to port 1
    let w2 = find(&paths, "0>1>2>4>4>2>1>0>0");
    assert!((w2.magnitude() - mag(1, 2) * mag(4, 4) * mag(2, 1)).abs() < 1e-15);
    let w3 = find(&paths, "0>1>2>4>4>2>2>4>5>7>7");
    assert!((w3.magnitude() - mag(5, 4) * mag(2, 2) * mag(4, 4) * mag(2, 1)).abs() < 1e-15);
    for w in [w2, w3] {
        assert!((4e-3..9e-3).contains(&w.magnitude()), "{}", w.magnitude());
    }
    // delay of w1: interconnect plus both qubit links
    let tau = w1.delay.unwrap();
    assert!((tau - 1.1 / (0.7 * C_LIGHT)).abs() < 1e-18);
}

#[test]
fn enumerated_weights_match_recomputation_and_bound() {
    let net = circulator_channel(1.0);
    let graph = PathGraph::from_network(&net, &Tolerances::default()).unwrap();
    let sigma = graph.sigma_max_sw();
    for p in graph.enumerate(&EnumerationLimits::new(6, 1e-4)).unwrap() {
        assert!((p.weight - graph.weight_of(p.start, &p.ports)).norm() < 1e-15);
        assert!(p.magnitude() <= sigma.powi(p.n_traversals as i32) + 1e-12);
    }
}

#[test]
fn fabry_perot_low_order_terms() {
    let (r, phase) = (0.6f64, 0.4);
    let t = (1.0 - r * r).sqrt();
    let graph = PathGraph::from_network(&fabry_perot(r, r, phase), &Tolerances::default()).unwrap();
    let paths = graph.enumerate(&EnumerationLimits::new(3, 1e-12)).unwrap();
    let mut through: Vec<_> = paths
        .iter()
        .filter(|p| p.start == PathStart::ExternalInput(0) && p.end == PathEnd::ExternalOutput(3))
        .collect();
    through.sort_by_key(|p| p.n_traversals);
    assert_eq!(through.len(), 2);
    // t e^{iφ} t, then two extra reflections and two extra link phases
    assert!((through[0].magnitude() - t * t).abs() < 1e-14);
    assert!((through[1].magnitude() - t * t * r * r).abs() < 1e-14);
    assert_eq!(through[1].n_traversals, 3);
    let direct = paths
        .iter()
        .find(|p| p.start == PathStart::ExternalInput(0) && p.n_traversals == 0)
        .unwrap();
    assert!((direct.magnitude() - r).abs() < 1e-15);
}

#[test]
fn path_sums_converge_to_contraction() {
    let net = fabry_perot(0.7f64, 0.5, 1.2);
    let m = contract_network(&net, &ContractionOptions::default()).unwrap();
    let graph = PathGraph::from_network(&net, &Tolerances::default()).unwrap();
    let paths = graph.enumerate(&EnumerationLimits::new(200, 1e-16)).unwrap();
    for (start, end, w) in sum_paths(&paths) {
        let (PathStart::ExternalInput(k), PathEnd::ExternalOutput(j)) = (start, end) else {
            continue;
        };
        let part = m.partition();
        let row = part.external_outputs.iter().position(|&p| p == j).unwrap();
        let col = part.external_inputs.iter().position(|&p| p == k).unwrap();
        assert!((w - m.s_eff[(row, col)]).norm() < 1e-14);
    }
}

#[test]
fn source_paths_sum_to_t() {
    let net = circulator_channel(1.0);
    let m = contract_network(&net, &ContractionOptions::default()).unwrap();
    let graph = PathGraph::from_network(&net, &Tolerances::default()).unwrap();
    let paths = graph.enumerate(&EnumerationLimits::new(200, 1e-12)).unwrap();
    for (start, end, w) in sum_paths(&paths) {
        if let (PathStart::Source(k), PathEnd::Source(j)) = (start, end) {
            assert!((w - m.routing.t[(j, k)]).norm() < 1e-9, "T[{j},{k}]");
        }
    }
}

#[test]
fn short_interconnect_is_valid() {
    let report = validity_check(&circulator_channel(1.0), &Tolerances::default(), &ValidityOptions::default()).unwrap();
    assert!(report.is_valid(), "{:?}", report.violating_paths);
    assert!((report.tau_min - 1.0 / (2.0 * PI * 400e3)).abs() < 1e-15);
    let w1 = find(&report.paths, "0>1>2>4>5>7>7");
    assert!(w1.delay.unwrap() < 1e-8);
}

#[test]
fn long_interconnect_is_invalid() {
    let report = validity_check(&circulator_channel(500.0), &Tolerances::default(), &ValidityOptions::default()).unwrap();
    assert!(!report.is_valid());
    assert!(report.violating_paths.iter().any(|p| p.port_string() == "0>1>2>4>5>7>7"));
    assert!(report.max_violating_weight >= report.weight_threshold);
    let tau1 = find(&report.paths, "0>1>2>4>5>7>7").delay.unwrap();
    assert!((2.3e-6..2.5e-6).contains(&tau1));
}

#[test]
fn phase_only_links_lack_geometry() {
    let net = ChannelSpec::<f64>::ideal().build();
    let err = validity_check(&net, &Tolerances::default(), &ValidityOptions::default()).unwrap_err();
    assert!(matches!(err, Error::MissingGeometry(_)));
}

#[test]
fn no_connections_is_trivially_valid() {
    let mut net = fabry_perot(0.5f64, 0.5, 0.0);
    net.connections.clear();
    let opts = ValidityOptions {
        tau_min: Some(1e-9),
        ..ValidityOptions::default()
    };
    let report = validity_check(&net, &Tolerances::default(), &opts).unwrap();
    assert!(report.is_valid());
    assert!(report.paths.iter().all(|p| p.n_traversals == 0 && p.delay == Some(0.0)));
}

#[test]
fn path_cap_is_enforced() {
    let graph = PathGraph::from_network(&fabry_perot(0.9f64, 0.9, 0.0), &Tolerances::default()).unwrap();
    let limits = EnumerationLimits {
        cap: 10,
        ..EnumerationLimits::new(1000, 1e-300)
    };
    assert!(matches!(graph.enumerate(&limits), Err(Error::PathExplosion { cap: 10 })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_path_weights_bounded_by_sigma_max(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=5);
        let m = rng.random_range(1..n);
        let (s, w) = random_feedback_pair::<f64, _>(&mut rng, n, m);
        prop_assume!(spectral_radius(&(&s * &w)) < 0.95);
        let sigma = sigma_max(&(&s * &w));
        let graph = PathGraph::new(s, w).with_sources(0..n);
        for p in graph.enumerate(&EnumerationLimits::new(6, 1e-3)).unwrap() {
            prop_assert!(p.magnitude() <= sigma.powi(p.n_traversals as i32) + 1e-12);
            prop_assert!((p.weight - graph.weight_of(p.start, &p.ports)).norm() < 1e-15);
        }
    }
}
