//! Property tests for the structural layer: controlled-siphon laws, the
//! certificate enumeration, and checker/oracle equivalence on random nets.

use std::collections::BTreeSet;

use proptest::prelude::*;

use jointnet::petri::{AgentId, PetriNet, Transition};
use jointnet::scenario::builtin_network;

fn ids(xs: &[usize]) -> BTreeSet<AgentId> {
    xs.iter().copied().map(AgentId).collect()
}

/// Strategy: a net with 3..=9 places and valid, deduplicated transitions.
fn net_strategy() -> impl Strategy<Value = PetriNet> {
    (3usize..=9)
        .prop_flat_map(|n| {
            let transition = (prop::collection::btree_set(0..n, 1..=3), 0..n)
                .prop_filter_map("output in inputs", move |(inputs, output)| {
                    if inputs.contains(&output) {
                        return None;
                    }
                    let inputs = inputs.into_iter().map(AgentId).collect();
                    Transition::new(inputs, AgentId(output)).ok()
                });
            (Just(n), prop::collection::vec(transition, 1..=(3 * n)))
        })
        .prop_map(|(n, mut transitions)| {
            transitions.sort();
            transitions.dedup();
            PetriNet::new(n, transitions).expect("valid by construction")
        })
}

/// Strategy: a net plus two disjoint place subsets (S, F) with S non-empty.
fn net_with_set_and_pool() -> impl Strategy<Value = (PetriNet, BTreeSet<AgentId>, BTreeSet<AgentId>)>
{
    net_strategy().prop_flat_map(|net| {
        let n = net.n_agents();
        (Just(net), prop::collection::btree_set(0..n, 1..=n), prop::collection::btree_set(0..n, 0..=2))
            .prop_map(|(net, s, f)| {
                let s: BTreeSet<AgentId> = s.into_iter().map(AgentId).collect();
                let f: BTreeSet<AgentId> =
                    f.into_iter().map(AgentId).filter(|a| !s.contains(a)).collect();
                (net, s, f)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// A switch can only be strengthened by adding fault agents.
    #[test]
    fn control_is_monotone_in_the_switch((net, s, f1) in net_with_set_and_pool(), extra in prop::collection::btree_set(0usize..9, 0..=2)) {
        let mut f2 = f1.clone();
        for e in extra {
            let a = AgentId(e % net.n_agents());
            if !s.contains(&a) {
                f2.insert(a);
            }
        }
        if net.is_controlled_siphon(&s, &f1).unwrap() {
            prop_assert!(net.is_controlled_siphon(&s, &f2).unwrap());
        }
    }

    /// Unions of F-controlled siphons are F-controlled siphons.
    #[test]
    fn union_closure((net, s1, f) in net_with_set_and_pool(), s2_raw in prop::collection::btree_set(0usize..9, 1..=9)) {
        let s2: BTreeSet<AgentId> = s2_raw
            .into_iter()
            .map(|v| AgentId(v % net.n_agents()))
            .filter(|a| !f.contains(a))
            .collect();
        prop_assume!(!s2.is_empty());
        if net.is_controlled_siphon(&s1, &f).unwrap() && net.is_controlled_siphon(&s2, &f).unwrap() {
            let union: BTreeSet<AgentId> = s1.union(&s2).copied().collect();
            prop_assert!(net.is_controlled_siphon(&union, &f).unwrap());
        }
    }

    /// An empty switch is exactly the plain siphon notion.
    #[test]
    fn empty_switch_reduces_to_siphon((net, s, _f) in net_with_set_and_pool()) {
        prop_assert_eq!(
            net.is_controlled_siphon(&s, &BTreeSet::new()).unwrap(),
            net.is_siphon(&s).unwrap()
        );
    }

    /// Every emitted certificate is a controlled siphon whose switch is
    /// minimal, witnessed by a stored uncovered transition.
    #[test]
    fn certificates_are_sound((net, _s, pool) in net_with_set_and_pool()) {
        for cert in net.enumerate_minimal_controlled_siphons(&pool).unwrap() {
            prop_assert!(net.is_controlled_siphon(&cert.places, &cert.switch).unwrap());
            prop_assert_eq!(cert.switch.len(), cert.uncovered_when_switch_removed.len());
            for (dropped, witness) in &cert.uncovered_when_switch_removed {
                let mut reduced = cert.switch.clone();
                reduced.remove(dropped);
                prop_assert!(!net.is_controlled_siphon(&cert.places, &reduced).unwrap());
                // the stored transition really is uncovered without `dropped`
                prop_assert!(cert.places.contains(&witness.output()));
                prop_assert!(witness.inputs().contains(dropped));
                let cover: BTreeSet<AgentId> =
                    cert.places.union(&reduced).copied().collect();
                prop_assert!(witness.inputs().is_disjoint(&cover));
            }
        }
    }

    /// The certificate checker and the exhaustive oracle agree; this also
    /// backs the reduction from arbitrary violating pairs to minimal
    /// certificates.
    #[test]
    fn checker_matches_oracle((net, _s, faults) in net_with_set_and_pool()) {
        prop_assume!(faults.len() < net.n_agents());
        let fast = net.check_robust_consensuability(&faults).unwrap().verdict;
        let slow = net.exhaustive_consensuability_oracle(&faults).unwrap();
        prop_assert_eq!(fast, slow);
    }
}

/// Siphons of the grid are exactly the sets whose non-empty row and column
/// slices all have at least two members; checked over all 511 subsets.
#[test]
fn grid_siphon_slice_criterion() {
    let net = builtin_network("grid3x3").unwrap().petri_net();
    for mask in 1u32..512 {
        let subset: BTreeSet<AgentId> =
            (0..9).filter(|i| mask & (1 << i) != 0).map(AgentId).collect();
        let mut ok = true;
        for line in 0..3 {
            let row = subset.iter().filter(|a| a.0 / 3 == line).count();
            let col = subset.iter().filter(|a| a.0 % 3 == line).count();
            if row == 1 || col == 1 {
                ok = false;
            }
        }
        assert_eq!(
            net.is_siphon(&subset).unwrap(),
            ok,
            "slice criterion disagrees on {subset:?}"
        );
    }
}

/// Fixed regression cases for the checker on the bundled nets.
#[test]
fn bundled_net_verdicts() {
    let grid = builtin_network("grid3x3").unwrap().petri_net();
    assert!(grid.check_robust_consensuability(&BTreeSet::new()).unwrap().verdict);
    for f in 0..9 {
        assert!(grid.check_robust_consensuability(&ids(&[f])).unwrap().verdict);
    }
    for a in 0..9 {
        for b in (a + 1)..9 {
            let report = grid.check_robust_consensuability(&ids(&[a, b])).unwrap();
            assert!(!report.verdict, "fault pair ({a},{b}) unexpectedly robust");
            let same_line = a / 3 == b / 3 || a % 3 == b % 3;
            assert_eq!(report.healthy_is_siphon, !same_line);
            assert_eq!(report.witness.is_some(), !same_line);
        }
    }

    let joint = builtin_network("alltoall5_joint").unwrap().petri_net();
    for a in 0..5 {
        for b in (a + 1)..5 {
            assert!(joint.check_robust_consensuability(&ids(&[a, b])).unwrap().verdict);
        }
    }

    let ring = builtin_network("ring5").unwrap().petri_net();
    assert!(ring.check_robust_consensuability(&BTreeSet::new()).unwrap().verdict);
    assert!(!ring.check_robust_consensuability(&ids(&[4])).unwrap().verdict);
}
