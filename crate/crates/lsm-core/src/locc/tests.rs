use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::LsmError;
use crate::qcore::tests::random_state;
use crate::qcore::{
    bell_state, equal_up_to_phase, tensor, BellKind, Party, PartyLayout, PureState, UnitaryOp,
    ALICE, BOB,
};

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pair_layout() -> PartyLayout {
    PartyLayout::pair(ALICE, BOB)
}

/// source (Alice), resource sender half (Alice), resource receiver half (Bob)
fn teleport_layout() -> PartyLayout {
    PartyLayout::new(vec![ALICE, ALICE, BOB], vec![0, 1, 1], vec![0, 0, 0]).unwrap()
}

#[test]
fn conclude_only_protocol_has_one_leaf() {
    let tree = execute(
        &ProtocolNode::conclude(vec![2, 0, 1]),
        &bell_state(BellKind::PhiPlus),
        &pair_layout(),
    )
    .unwrap();
    assert_eq!(tree.leaves.len(), 1);
    assert!((tree.leaves[0].probability - 1.0).abs() < 1e-12);
    assert_eq!(tree.leaves[0].verdict, vec![2, 0, 1]);
}

fn classify_step(pauli: Pauli) -> ProtocolNode {
    correlated_pauli_step(
        "step",
        (ALICE, 0),
        (BOB, 1),
        pauli,
        ProtocolNode::conclude(vec![0]),
        ProtocolNode::conclude(vec![1]),
    )
    .unwrap()
}

#[test]
fn z_step_classifies_phi_plus_as_correlated() {
    let tree = execute(&classify_step(Pauli::Z), &bell_state(BellKind::PhiPlus), &pair_layout())
        .unwrap();
    assert!((tree.total_probability() - 1.0).abs() < 1e-12);
    for leaf in &tree.leaves {
        assert_eq!(leaf.verdict, vec![0], "phi+ must land in the correlated class");
        assert_eq!(leaf.transcript.last().unwrap().class.as_deref(), Some("C"));
    }
}

#[test]
fn z_step_classifies_psi_plus_as_anticorrelated() {
    let tree = execute(&classify_step(Pauli::Z), &bell_state(BellKind::PsiPlus), &pair_layout())
        .unwrap();
    for leaf in &tree.leaves {
        assert_eq!(leaf.verdict, vec![1]);
        assert_eq!(leaf.transcript.last().unwrap().class.as_deref(), Some("AC"));
    }
}

#[test]
fn x_step_classifies_phi_minus_as_anticorrelated() {
    let tree = execute(&classify_step(Pauli::X), &bell_state(BellKind::PhiMinus), &pair_layout())
        .unwrap();
    for leaf in &tree.leaves {
        assert_eq!(leaf.verdict, vec![1]);
    }
}

#[test]
fn classifiers_are_deterministic_on_every_bell_state() {
    // A two-sided Pauli step never splits a Bell state across classes.
    for kind in BellKind::ALL {
        for pauli in [Pauli::Z, Pauli::X] {
            let expected_class = match pauli {
                Pauli::Z => kind.is_phi(),
                Pauli::X => kind.is_plus(),
            };
            let tree = execute(&classify_step(pauli), &bell_state(kind), &pair_layout()).unwrap();
            assert!((tree.total_probability() - 1.0).abs() < 1e-12);
            for leaf in &tree.leaves {
                let verdict = if expected_class { vec![0] } else { vec![1] };
                assert_eq!(leaf.verdict, verdict, "{kind:?} under {pauli:?}");
            }
        }
    }
}

#[test]
fn step_one_of_the_x4_flow_groups_by_z_correlation() {
    // First pair of chi_1 = phi+ ⊗ phi+: the Z classifier on the first part
    // must land in the correlated class on every branch.
    let chi1 = tensor(&[&bell_state(BellKind::PhiPlus), &bell_state(BellKind::PhiPlus)]).unwrap();
    let layout =
        PartyLayout::new(vec![ALICE, BOB, ALICE, BOB], vec![0; 4], vec![0, 0, 1, 1]).unwrap();
    let step = correlated_pauli_step(
        "s1",
        (ALICE, 0),
        (BOB, 1),
        Pauli::Z,
        ProtocolNode::conclude(vec![0]), // group G1
        ProtocolNode::conclude(vec![1]), // group G2
    )
    .unwrap();
    let tree = execute(&step, &chi1, &layout).unwrap();
    assert_eq!(tree.leaves.len(), 2);
    assert!((tree.total_probability() - 1.0).abs() < 1e-12);
    assert!(tree.leaves.iter().all(|l| l.verdict == vec![0]));
}

fn teleport_node() -> ProtocolNode {
    ProtocolNode::Teleport(TeleportNode {
        label: "tp".into(),
        sender: ALICE,
        receiver: BOB,
        source: 0,
        resource_sender: 1,
        resource_receiver: 2,
        child: Box::new(ProtocolNode::conclude(vec![0])),
    })
}

#[test]
fn teleporting_a_basis_state_gives_four_uniform_branches() {
    let zero = PureState::basis_state(vec![2], 0).unwrap();
    let input = tensor(&[&zero, &bell_state(BellKind::PhiPlus)]).unwrap();
    let tree = execute(&teleport_node(), &input, &teleport_layout()).unwrap();
    assert_eq!(tree.leaves.len(), 4);
    for leaf in &tree.leaves {
        assert!((leaf.probability - 0.25).abs() < 1e-12);
        let received = leaf.final_state.factor_state(&[2]).unwrap().expect("freed factor");
        assert!((received[0].norm() - 1.0).abs() < 1e-9, "receiver must hold |0⟩");
    }
}

#[test]
fn teleporting_half_of_a_bell_pair_moves_the_entanglement() {
    // factors: 0,1 = phi+ to be moved (0 stays put, 1 is teleported? no:
    // source is Alice's half of a shared phi+; after teleportation the
    // receiver's resource half is entangled with factor 1.
    let input = tensor(&[&bell_state(BellKind::PhiPlus), &bell_state(BellKind::PhiPlus)]).unwrap();
    // layout: 0 = Alice (source, half of pair with Bob's 1), 2/3 = resource
    let layout = PartyLayout::new(
        vec![ALICE, BOB, ALICE, BOB],
        vec![0, 0, 1, 1],
        vec![0, 0, 0, 0],
    )
    .unwrap();
    let node = ProtocolNode::Teleport(TeleportNode {
        label: "tp".into(),
        sender: ALICE,
        receiver: BOB,
        source: 0,
        resource_sender: 2,
        resource_receiver: 3,
        child: Box::new(ProtocolNode::conclude(vec![0])),
    });
    let tree = execute(&node, &input, &layout).unwrap();
    assert_eq!(tree.leaves.len(), 4);
    for leaf in &tree.leaves {
        let pair = leaf.final_state.factor_state(&[3, 1]).unwrap().expect("pair disentangled");
        let got = PureState::new(pair, vec![2, 2]).unwrap();
        assert!(equal_up_to_phase(&got, &bell_state(BellKind::PhiPlus), 1e-9));
    }
}

#[test]
fn teleport_via_phi_minus_resource_hands_bob_the_first_part() {
    // chi_3 = psi+ (first part) ⊗ phi- (second part), layout A1 B1 A2 B2.
    // Alice teleports her half of the first part through the second part.
    let chi3 = tensor(&[&bell_state(BellKind::PsiPlus), &bell_state(BellKind::PhiMinus)]).unwrap();
    let layout =
        PartyLayout::new(vec![ALICE, BOB, ALICE, BOB], vec![0; 4], vec![0, 0, 1, 1]).unwrap();
    let node = ProtocolNode::Teleport(TeleportNode {
        label: "tp".into(),
        sender: ALICE,
        receiver: BOB,
        source: 0,
        resource_sender: 2,
        resource_receiver: 3,
        child: Box::new(ProtocolNode::conclude(vec![0])),
    });
    let tree = execute(&node, &chi3, &layout).unwrap();
    assert_eq!(tree.leaves.len(), 4);
    for leaf in &tree.leaves {
        // Bob now holds both halves of the first part on factors (3, 1).
        let pair = leaf.final_state.factor_state(&[3, 1]).unwrap().expect("disentangled");
        let got = PureState::new(pair, vec![2, 2]).unwrap();
        assert!(equal_up_to_phase(&got, &bell_state(BellKind::PsiPlus), 1e-9));
        // Nothing is left across the Alice|Bob cut.
        let cut = layout.party_cut(ALICE).unwrap();
        assert!(leaf.final_state.entanglement_entropy(&cut).unwrap() < 1e-9);
    }
}

#[test]
fn teleportation_identity_on_random_sources() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let source = random_state(&mut rng, vec![2]);
        let input = tensor(&[&source, &bell_state(BellKind::PhiPlus)]).unwrap();
        let tree = execute(&teleport_node(), &input, &teleport_layout()).unwrap();
        assert!((tree.total_probability() - 1.0).abs() < 1e-9);
        for leaf in &tree.leaves {
            let received = leaf.final_state.factor_state(&[2]).unwrap().expect("freed");
            let got = PureState::new(received, vec![2]).unwrap();
            assert!(
                got.fidelity(&source).unwrap() >= 1.0 - 1e-9,
                "teleportation must reproduce the source in every branch"
            );
        }
    }
}

#[test]
fn non_maximally_entangled_resource_rejected() {
    let skewed = PureState::new(
        vec![c(0.8f64.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.2f64.sqrt(), 0.0)],
        vec![2, 2],
    )
    .unwrap();
    let zero = PureState::basis_state(vec![2], 0).unwrap();
    let input = tensor(&[&zero, &skewed]).unwrap();
    let err = execute(&teleport_node(), &input, &teleport_layout());
    assert!(matches!(err, Err(LsmError::ResourceInvalid(_))));
}

#[test]
fn measuring_a_consumed_factor_is_rejected() {
    let measure = |label: &str, child: ProtocolNode| {
        ProtocolNode::Measure(MeasureNode {
            label: label.into(),
            party: ALICE,
            factors: vec![0],
            basis: Basis::Z,
            classes: None,
            children: BTreeMap::from([(0, child.clone()), (1, child)]),
        })
    };
    let tree = measure("first", measure("again", ProtocolNode::conclude(vec![0])));
    let err = execute(&tree, &bell_state(BellKind::PhiPlus), &pair_layout());
    assert!(matches!(err, Err(LsmError::InvalidArgument(_))));
}

#[test]
fn missing_child_for_live_outcome_is_rejected() {
    let node = ProtocolNode::Measure(MeasureNode {
        label: "half".into(),
        party: ALICE,
        factors: vec![0],
        basis: Basis::Z,
        classes: None,
        children: BTreeMap::from([(0, ProtocolNode::conclude(vec![0]))]),
    });
    let err = execute(&node, &bell_state(BellKind::PhiPlus), &pair_layout());
    assert!(matches!(err, Err(LsmError::InvalidArgument(_))));
}

#[test]
fn prepare_restores_a_measured_factor() {
    // Measure Alice's qubit, then re-prepare it as |+⟩ and conclude.
    let plus = vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(std::f64::consts::FRAC_1_SQRT_2, 0.0)];
    let prepare = ProtocolNode::Prepare(PrepareNode {
        label: "fresh".into(),
        party: ALICE,
        factors: vec![0],
        states: vec![plus.clone()],
        child: Box::new(ProtocolNode::conclude(vec![0])),
    });
    let node = ProtocolNode::Measure(MeasureNode {
        label: "m".into(),
        party: ALICE,
        factors: vec![0],
        basis: Basis::Z,
        classes: None,
        children: BTreeMap::from([(0, prepare.clone()), (1, prepare)]),
    });
    let tree = execute(&node, &bell_state(BellKind::PhiPlus), &pair_layout()).unwrap();
    for leaf in &tree.leaves {
        let v = leaf.final_state.factor_state(&[0]).unwrap().expect("product");
        let got = PureState::new(v, vec![2]).unwrap();
        let want = PureState::new(plus.clone(), vec![2]).unwrap();
        assert!(equal_up_to_phase(&got, &want, 1e-9));
    }
}

#[test]
fn preparing_an_entangled_factor_is_rejected() {
    let node = ProtocolNode::Prepare(PrepareNode {
        label: "bad".into(),
        party: ALICE,
        factors: vec![0],
        states: vec![vec![c(1.0, 0.0), c(0.0, 0.0)]],
        child: Box::new(ProtocolNode::conclude(vec![0])),
    });
    let err = execute(&node, &bell_state(BellKind::PhiPlus), &pair_layout());
    assert!(matches!(err, Err(LsmError::InvalidArgument(_))));
}

#[test]
fn cc_direction_analysis() {
    // A lone Alice-side branching measurement means CC flows from Alice only.
    let node = ProtocolNode::Measure(MeasureNode {
        label: "m".into(),
        party: ALICE,
        factors: vec![0],
        basis: Basis::Z,
        classes: None,
        children: BTreeMap::from([
            (0, ProtocolNode::conclude(vec![0])),
            (1, ProtocolNode::conclude(vec![1])),
        ]),
    });
    assert_eq!(node.cc_sources(), vec![ALICE]);
    assert!(node.is_one_way(ALICE));
    assert!(!node.is_one_way(BOB));

    let two_way = classify_step(Pauli::Z);
    assert_eq!(two_way.cc_sources(), vec![ALICE, BOB]);
    assert!(!two_way.is_one_way(ALICE));
}

#[test]
fn conclusion_injectivity_validation() {
    assert!(ProtocolNode::conclude(vec![0, 1, 2]).validate_conclusions().is_ok());
    assert!(ProtocolNode::conclude(vec![0, 1, 0]).validate_conclusions().is_err());
}

#[test]
fn protocol_json_round_trips_by_hand() {
    let tree = ProtocolNode::Teleport(TeleportNode {
        label: "tp".into(),
        sender: ALICE,
        receiver: BOB,
        source: 0,
        resource_sender: 1,
        resource_receiver: 2,
        child: Box::new(
            correlated_pauli_step(
                "w",
                (ALICE, 3),
                (BOB, 4),
                Pauli::X,
                ProtocolNode::conclude(vec![0, 1]),
                ProtocolNode::Unitary(UnitaryNode {
                    label: "u".into(),
                    party: BOB,
                    factors: vec![4],
                    op: UnitaryOp::pauli_z(),
                    child: Box::new(ProtocolNode::conclude(vec![1, 0])),
                }),
            )
            .unwrap(),
        ),
    });
    let json = protocol_to_json(&tree);
    let parsed = protocol_from_json(&json).unwrap();
    assert_eq!(parsed, tree);
}

prop_compose! {
    fn arb_party()(p in 0usize..2) -> Party {
        Party(p)
    }
}

fn arb_node(depth: u32) -> impl Strategy<Value = ProtocolNode> {
    let leaf = proptest::collection::vec(0usize..6, 1..4)
        .prop_filter("injective", |v| {
            let mut s = v.clone();
            s.sort_unstable();
            s.dedup();
            s.len() == v.len()
        })
        .prop_map(ProtocolNode::conclude);
    leaf.prop_recursive(depth, 16, 3, |inner| {
        prop_oneof![
            (arb_party(), 0usize..4, proptest::collection::vec(inner.clone(), 2))
                .prop_map(|(party, factor, children)| {
                    let mut map = BTreeMap::new();
                    for (i, ch) in children.into_iter().enumerate() {
                        map.insert(i, ch);
                    }
                    ProtocolNode::Measure(MeasureNode {
                        label: format!("m{factor}"),
                        party,
                        factors: vec![factor],
                        basis: Basis::Z,
                        classes: Some(BTreeMap::from([(0, "C".into()), (1, "AC".into())])),
                        children: map,
                    })
                }),
            (arb_party(), 0usize..4, inner.clone()).prop_map(|(party, factor, child)| {
                ProtocolNode::Unitary(UnitaryNode {
                    label: "u".into(),
                    party,
                    factors: vec![factor],
                    op: UnitaryOp::pauli_x(),
                    child: Box::new(child),
                })
            }),
            (arb_party(), inner).prop_map(|(party, child)| {
                ProtocolNode::Prepare(PrepareNode {
                    label: "p".into(),
                    party,
                    factors: vec![0],
                    states: vec![vec![c(0.0, 1.0), c(0.0, 0.0)]],
                    child: Box::new(child),
                })
            }),
        ]
    })
}

proptest! {
    #[test]
    fn protocol_json_round_trips(tree in arb_node(3)) {
        let json = protocol_to_json(&tree);
        let parsed = protocol_from_json(&json).unwrap();
        prop_assert_eq!(parsed, tree);
    }

    #[test]
    fn nonlocal_nodes_are_rejected(party in arb_party(), pauli_z in any::<bool>()) {
        // Both factors of a shared pair under a single party: always nonlocal.
        let node = ProtocolNode::Measure(MeasureNode {
            label: "joint".into(),
            party,
            factors: vec![0, 1],
            basis: if pauli_z { Basis::Z } else { Basis::Bell },
            classes: None,
            children: (0..4).map(|k| (k, ProtocolNode::conclude(vec![0]))).collect(),
        });
        let err = execute(&node, &bell_state(BellKind::PhiPlus), &pair_layout());
        prop_assert!(matches!(err, Err(LsmError::LocalityViolation(_))));
    }

    #[test]
    fn branch_probabilities_always_sum_to_one(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = random_state(&mut rng, vec![2, 2]);
        let step = classify_step(Pauli::Z);
        let tree = execute(&step, &input, &pair_layout()).unwrap();
        prop_assert!((tree.total_probability() - 1.0).abs() < 1e-9);
    }
}
