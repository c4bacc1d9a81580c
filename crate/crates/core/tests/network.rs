use ionet::circuits::{circulator_from_magnitudes, fabry_perot, perfect_channel, ChannelSpec};
use ionet::contraction::{contract_network, ContractionOptions};
use ionet::io::{network_to_json, parse_network, NetworkFile};
use ionet::linalg::{max_abs_diff, unitarity_deviation};
use ionet::network::{Connection, Tolerances};
use ionet::transfer::random_imperfect_network;
use ionet::{Error, Network64};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[test]
fn two_circulator_partition() {
    let net: Network64 = perfect_channel(1.0, 1.0, 0.0);
    let p = net.partition_ports().unwrap();
    assert_eq!(p.m(), 6);
    assert_eq!(p.internal_inputs, vec![0, 1, 2, 4, 5, 7]);
    assert_eq!(p.external_inputs, vec![3, 6]);
    assert_eq!(p.external_outputs, vec![3, 6]);
}

#[test]
fn fabry_perot_partition() {
    let p = fabry_perot(0.5f64, 0.5, 0.1).partition_ports().unwrap();
    assert_eq!(p.internal_inputs, vec![1, 2]);
    assert_eq!(p.external_outputs, vec![0, 3]);
}

#[test]
fn global_s_is_unitary_and_w_a_partial_isometry() {
    let net = random_imperfect_network(0.7f64, 1.3, 11).unwrap();
    let tol = Tolerances::default();
    net.validate(&tol).unwrap();
    let s = net.assemble_s(&tol).unwrap();
    assert!(unitarity_deviation(&s) < 1e-12);
    let w = net.assemble_w().unwrap();
    let p = net.partition_ports().unwrap();
    let wdw = w.adjoint() * &w;
    for j in 0..8 {
        let expect = if p.internal_outputs.contains(&j) { 1.0 } else { 0.0 };
        assert!((wdw[(j, j)].re - expect).abs() < TOL);
    }
}

#[test]
fn non_unitary_block_is_rejected() {
    let mut spec = ChannelSpec::<f64>::ideal();
    spec.circulator_1[(0, 0)] += 0.01;
    let err = spec.build().validate(&Tolerances::default()).unwrap_err();
    assert!(matches!(err, Error::NonUnitaryBlock { ref element, .. } if element == "circulator_1"));
    assert!(!err.is_schema_error());
}

#[test]
fn duplicate_connection_is_a_schema_error() {
    let mut net: Network64 = perfect_channel(1.0, 1.0, 0.0);
    net.connections.push(Connection::phase(0, 3, 0.0));
    let err = net.validate(&Tolerances::default()).unwrap_err();
    assert!(matches!(err, Error::DuplicateConnection { port: 0, .. }));
    assert!(err.is_schema_error());
}

#[test]
fn self_loop_needs_opt_in() {
    let mut net: Network64 = fabry_perot(0.5, 0.5, 0.0);
    net.connections.push(Connection::phase(0, 1, 0.0));
    net.connections.retain(|c| c.from != 2);
    assert!(matches!(
        net.validate(&Tolerances::default()),
        Err(Error::SelfLoop { .. })
    ));
    net.allow_self_loops = true;
    net.validate(&Tolerances::default()).unwrap();
}

#[test]
fn unknown_port_in_connection() {
    let mut net: Network64 = fabry_perot(0.5, 0.5, 0.0);
    net.connections.push(Connection::phase(3, 9, 0.0));
    assert!(matches!(net.validate(&Tolerances::default()), Err(Error::UnknownPort(9))));
}

#[test]
fn json_round_trip_is_exact() {
    let net = random_imperfect_network(0.4f64, 2.1, 5).unwrap();
    let text = network_to_json(&net).unwrap();
    let back: Network64 = parse_network(&text).unwrap();
    assert_eq!(back, net);
    assert_eq!(network_to_json(&back).unwrap(), text);
}

#[test]
fn phase_and_distance_together_are_rejected() {
    let text = r#"{
        "ports": [{"id": 0, "element": "a"}, {"id": 1, "element": "b"}],
        "blocks": [{"element": "a", "matrix": [[[1, 0]]]}, {"element": "b", "matrix": [[[1, 0]]]}],
        "connections": [{"from": 0, "to": 1, "phase": 0.1, "distance": 2.0}]
    }"#;
    let err = parse_network::<f64>(text).unwrap_err();
    assert!(matches!(err, Error::PhaseAndDistanceBothGiven { from: 0, to: 1 }));
    assert!(err.is_schema_error());
}

#[test]
fn malformed_json_is_a_schema_error() {
    let err = NetworkFile::from_json(r#"{"ports": 3}"#).unwrap_err();
    assert!(err.is_schema_error());
    let err = parse_network::<f64>(
        r#"{"ports": [], "blocks": [], "systems": [{"element": "q", "dim": 2,
            "couplings": [{"port": 0, "op": "sigma_z", "kappa": 1}]}]}"#,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Schema(_)));
}

#[test]
fn magnitude_circulator_is_projected_to_unitary() {
    let c = circulator_from_magnitudes(0.98f64, 0.08, 0.08);
    assert!(unitarity_deviation(&c) < 1e-14);
}

fn relabeled_s_eff_matches(seed: u64) {
    let net = random_imperfect_network(0.6f64, 0.9, seed).unwrap();
    let mut perm: Vec<usize> = (0..net.n_ports()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let moved = net.relabel(&perm).unwrap();
    let opts = ContractionOptions::default();
    let a = contract_network(&net, &opts).unwrap();
    let b = contract_network(&moved, &opts).unwrap();
    // external ports keep their relative order only up to the permutation
    let ext_a = &a.partition().external_outputs;
    let ext_b = &b.partition().external_outputs;
    for (i, &pi) in ext_a.iter().enumerate() {
        for (j, &pj) in a.partition().external_inputs.iter().enumerate() {
            let bi = ext_b.iter().position(|&q| q == perm[pi]).unwrap();
            let bj = b.partition().external_inputs.iter().position(|&q| q == perm[pj]).unwrap();
            assert!((a.s_eff[(i, j)] - b.s_eff[(bi, bj)]).norm() < 1e-12);
        }
    }
    assert!(max_abs_diff(&a.h_eff, &b.h_eff) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn contraction_is_invariant_under_port_relabeling(seed in any::<u64>()) {
        relabeled_s_eff_matches(seed);
    }
}
