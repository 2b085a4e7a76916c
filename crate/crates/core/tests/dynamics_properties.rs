//! Cross-module properties of the dynamics layer: equilibria, probe
//! behaviour on the bundled networks, and the topology round trip.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jointnet::arcp::{self, ArcpConfig};
use jointnet::dynamics::{
    probe_aggregator_contract, probe_cooperativity, probe_joint_influence, Aggregator, ProbeGrid,
};
use jointnet::petri::AgentId;
use jointnet::scenario::builtin_network;

fn ids(xs: &[usize]) -> BTreeSet<AgentId> {
    xs.iter().copied().map(AgentId).collect()
}

const BUILTINS: [&str; 6] =
    ["chain3", "ring5", "alltoall5_joint", "grid3x3", "arcp:n=5,trim=1", "linear_alltoall"];

proptest! {
    /// Consensus states are exact equilibria of every bundled network.
    #[test]
    fn consensus_states_are_equilibria(c in -50.0f64..50.0) {
        for name in BUILTINS {
            let d = builtin_network(name).unwrap();
            let field = d.assemble_rhs();
            let x = vec![c; d.n_agents()];
            prop_assert_eq!(field.eval_vec(&x), vec![0.0; d.n_agents()]);
        }
    }

    /// Shifting every agent by a common value leaves the group rate unchanged.
    #[test]
    fn joint_rate_translation_invariance(
        x in prop::collection::vec(-20.0f64..20.0, 5),
        shift in -30.0f64..30.0,
    ) {
        let group = ids(&[1, 2, 4]);
        let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let a = jointnet::dynamics::joint_rate(&group, AgentId(0), &x).unwrap();
        let b = jointnet::dynamics::joint_rate(&group, AgentId(0), &shifted).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}

/// The implied interaction topology survives the trip through the Petri net.
#[test]
fn topology_round_trip_for_builtins() {
    for name in BUILTINS {
        let d = builtin_network(name).unwrap();
        let net = d.petri_net();
        assert_eq!(net.transitions().len(), d.rules().len(), "{name}");
        for rule in d.rules() {
            assert!(
                net.transitions()
                    .iter()
                    .any(|t| t.inputs() == &rule.group && t.output() == rule.target),
                "{name}: rule {:?} lost",
                rule.group
            );
        }
    }
}

/// Every built-in aggregator kind satisfies the zero/strict-increase/monotone
/// contract.
#[test]
fn aggregator_contract_for_all_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for arity in 1..=4usize {
        for agg in [
            Aggregator::WeightedSum(vec![0.8; arity]),
            Aggregator::MinPlusMax,
            Aggregator::SaturatedSum { weights: vec![0.8; arity], sat_level: 1.2 },
            Aggregator::CubedSum(vec![0.2; arity]),
        ] {
            assert!(
                probe_aggregator_contract(&agg, arity, &mut rng).unwrap(),
                "{agg:?} arity {arity}"
            );
        }
    }
}

/// Cooperativity holds on every bundled network.
#[test]
fn builtins_are_cooperative() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in BUILTINS {
        let d = builtin_network(name).unwrap();
        assert!(probe_cooperativity(&d, 60, (-10.0, 10.0), &mut rng).is_ok(), "{name}");
    }
}

/// In the five-agent joint network every 3-group influences every outside
/// agent minimally, and growing the group preserves the influence.
#[test]
fn alltoall5_influences_are_exactly_the_triples() {
    let d = builtin_network("alltoall5_joint").unwrap();
    let grid = ProbeGrid { lo: -10.0, hi: 10.0, points: 21 };
    for target in 0..5usize {
        let others: Vec<usize> = (0..5).filter(|&j| j != target).collect();
        for group in jointnet::dynamics::combinations(&others, 3) {
            let r = probe_joint_influence(&d, &ids(&group), AgentId(target), grid).unwrap();
            assert!(r.holds && r.minimal, "triple {group:?} -> {target}");
        }
        // the full 4-group still influences but is no longer minimal
        let r = probe_joint_influence(&d, &ids(&others), AgentId(target), grid).unwrap();
        assert!(r.holds && !r.minimal);
    }
}

/// Trimmed-mean influence groups: pairs hold with margin gap/(n - 2 trim),
/// singletons vanish.
#[test]
fn arcp_influence_probe() {
    let cfg = ArcpConfig::new(5, 1).unwrap();
    let d = arcp::as_network_dynamics(cfg);
    let grid = ProbeGrid { lo: -10.0, hi: 10.0, points: 41 };
    let r = probe_joint_influence(&d, &ids(&[1, 2]), AgentId(0), grid).unwrap();
    assert!(r.holds && r.minimal);
    // grid spacing 0.5, drift (xj - xi) / 3
    assert!((r.margin - 0.5 / 3.0).abs() < 1e-12, "margin {}", r.margin);

    let single = probe_joint_influence(&d, &ids(&[1]), AgentId(0), grid).unwrap();
    assert!(!single.holds);
    assert_eq!(single.margin, 0.0);
}

/// The implied trimmed-mean topology passes the structural checker for every
/// single fault.
#[test]
fn arcp_topology_single_fault_robustness() {
    let cfg = ArcpConfig::new(5, 1).unwrap();
    let net = arcp::as_network_dynamics(cfg).petri_net();
    for f in 0..5 {
        let faults = ids(&[f]);
        assert!(net.check_robust_consensuability(&faults).unwrap().verdict);
        assert!(net.exhaustive_consensuability_oracle(&faults).unwrap());
    }
}

/// Joint influence is monotone under group inclusion on the probe grid.
#[test]
fn influence_monotone_under_inclusion() {
    let d = builtin_network("grid3x3").unwrap();
    let grid = ProbeGrid { lo: -5.0, hi: 5.0, points: 11 };
    // the column pair influences (1,1); adding a row agent keeps it
    let base = probe_joint_influence(&d, &ids(&[3, 6]), AgentId(0), grid).unwrap();
    assert!(base.holds);
    for extra in [1usize, 2] {
        let mut bigger = ids(&[3, 6]);
        bigger.insert(AgentId(extra));
        let r = probe_joint_influence(&d, &bigger, AgentId(0), grid).unwrap();
        assert!(r.holds, "superset with {extra} lost the influence");
    }
}
