use crate::ensembles::{b3_set, bell_basis_set, instance_for, x4_set, StateSet};
use crate::error::LsmError;
use crate::locc::{execute, Basis, MeasureNode, ProtocolNode};
use crate::qcore::{
    bell_state, tensor, BellKind, PartyLayout, PureState, ALICE, BOB,
};

use super::*;

fn product4_set() -> StateSet {
    crate::ensembles::product_basis_set().unwrap()
}

fn product4_lsd() -> ProtocolNode {
    product_basis_lsd()
}

/// Residual entanglement left by the X4 protocol for a given assignment,
/// read off the protocol's case analysis.
fn expected_x4_residual(a: &[usize]) -> f64 {
    match (a[0], a[1]) {
        (0, _) => 3.0,
        (1, 0) => 4.0,
        (1, _) => {
            if a[2] == 0 {
                2.0
            } else {
                3.0
            }
        }
        (_, q) if q >= 2 => 4.0,
        (_, q) => {
            if a[2] == 1 - q {
                2.0
            } else {
                3.0
            }
        }
    }
}

#[test]
fn x4_marking_is_perfect_with_three_ebits_left_on_average() {
    let set = x4_set().unwrap();
    let protocol = build_x4_protocol();
    let (verdict, ledger) = verify_marking(&protocol, &set, 4, None).unwrap();
    assert!(verdict.perfect, "every assignment must be identified with certainty");
    assert_eq!(verdict.per_assignment.len(), 24);
    for v in &verdict.per_assignment {
        assert!((v.success_probability - 1.0).abs() <= 1e-9, "{:?}", v.assignment);
        assert!(v.mislabeled_probability <= 1e-12);
    }
    assert!(
        (ledger.average_residual_ebits - 3.0).abs() <= 1e-9,
        "average residual {}",
        ledger.average_residual_ebits
    );
    // branch-wise residuals group exactly by the protocol's case analysis
    for al in &ledger.per_assignment {
        let expect = expected_x4_residual(&al.assignment);
        assert!(
            (al.expected_residual_ebits - expect).abs() <= 1e-9,
            "assignment {:?}: {} vs {}",
            al.assignment,
            al.expected_residual_ebits,
            expect
        );
        for leaf in &al.leaves {
            assert!((leaf.residual_ebits - expect).abs() <= 1e-9);
        }
    }
    // the instance itself carries 8 ebits (4 members of 2 ebits each)
    assert!((ledger.instance_ebits - 8.0).abs() < 1e-9);
}

#[test]
fn x4_step4_cases_leave_four_three_and_two_ebits() {
    let set = x4_set().unwrap();
    let protocol = build_x4_protocol();
    let (_, ledger) = verify_marking(&protocol, &set, 4, None).unwrap();
    let residual = |a: &[usize]| {
        ledger
            .per_assignment
            .iter()
            .find(|al| al.assignment == a)
            .expect("assignment present")
            .expected_residual_ebits
    };
    // correlated closing case
    assert!((residual(&[1, 0, 2, 3]) - 4.0).abs() <= 1e-9);
    assert!((residual(&[1, 0, 3, 2]) - 4.0).abs() <= 1e-9);
    // teleport-assisted closing, third slot named directly
    assert!((residual(&[1, 2, 3, 0]) - 3.0).abs() <= 1e-9);
    assert!((residual(&[1, 3, 2, 0]) - 3.0).abs() <= 1e-9);
    // teleport-assisted closing through the extra Walgate step
    assert!((residual(&[1, 2, 0, 3]) - 2.0).abs() <= 1e-9);
    assert!((residual(&[1, 3, 0, 2]) - 2.0).abs() <= 1e-9);
}

#[test]
fn x4_flowchart_arithmetic_reproduces_three_ebits_exactly() {
    use num_rational::Ratio;
    type R = Ratio<i64>;
    let half = R::new(1, 2);
    let third = R::new(1, 3);
    let correlated_flow =
        half * R::from_integer(3)
            + half * (third * R::from_integer(4)
                + (R::from_integer(1) - third)
                    * (half * R::from_integer(3) + half * R::from_integer(2)));
    assert_eq!(correlated_flow, R::from_integer(3));
    let anticorrelated_flow = third * R::from_integer(4)
        + (R::from_integer(1) - third)
            * (half * R::from_integer(2) + half * R::from_integer(3));
    assert_eq!(anticorrelated_flow, R::from_integer(3));
}

#[test]
fn x4_verdicts_survive_an_independent_reexecution() {
    // Soundness is the definition, so check it by a second, direct pass.
    let set = x4_set().unwrap();
    let protocol = build_x4_protocol();
    for assignment in [[0usize, 1, 2, 3], [1, 0, 2, 3], [2, 0, 3, 1], [3, 2, 1, 0]] {
        let instance = instance_for(&set, &assignment).unwrap();
        let tree = execute(&protocol, &instance.composite, &instance.layout).unwrap();
        assert!((tree.total_probability() - 1.0).abs() <= 1e-9);
        for leaf in &tree.leaves {
            assert_eq!(leaf.verdict, assignment, "leaf transcript {:?}", leaf.transcript);
        }
    }
}

#[test]
fn x4_ledger_is_consistent_with_leaf_schmidt_data() {
    let set = x4_set().unwrap();
    let protocol = build_x4_protocol();
    let (_, ledger) = verify_marking(&protocol, &set, 4, None).unwrap();
    let recomputed = ledger
        .per_assignment
        .iter()
        .map(|al| al.leaves.iter().map(|l| l.probability * l.residual_ebits).sum::<f64>())
        .sum::<f64>()
        / ledger.per_assignment.len() as f64;
    assert!((recomputed - ledger.average_residual_ebits).abs() < 1e-12);

    // and the per-leaf numbers match a fresh execution's Schmidt data
    let assignment = [2usize, 0, 3, 1];
    let instance = instance_for(&set, &assignment).unwrap();
    let tree = execute(&protocol, &instance.composite, &instance.layout).unwrap();
    let cut = instance.layout.party_cut(ALICE).unwrap();
    let ledger_leaves =
        &ledger.per_assignment.iter().find(|al| al.assignment == assignment).unwrap().leaves;
    assert_eq!(tree.leaves.len(), ledger_leaves.len());
    for (fresh, recorded) in tree.leaves.iter().zip(ledger_leaves) {
        let sv = fresh.final_state.schmidt_coefficients(&cut).unwrap();
        let entropy: f64 =
            -sv.iter().map(|l| l * l).filter(|&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>();
        assert!((entropy - recorded.residual_ebits).abs() < 1e-9);
    }
}

#[test]
fn catalytic_b4_marks_all_assignments_returning_one_ebit() {
    let set = bell_basis_set().unwrap();
    let (protocol, budget) = catalytic_b4_protocol();
    assert!((budget.supplied_ebits - 2.0).abs() < 1e-12);
    let (verdict, ledger) = verify_marking(&protocol, &set, 4, Some(&budget)).unwrap();
    assert!(verdict.perfect);
    assert_eq!(verdict.per_assignment.len(), 24);
    let outcome = ledger.budget.as_ref().expect("budget outcome present");
    assert!((outcome.supplied_ebits - 2.0).abs() <= 1e-9);
    assert!((outcome.returned_ebits - 1.0).abs() <= 1e-9);
    assert!((outcome.net_consumed_ebits - 1.0).abs() <= 1e-9);
    // the returned ebit is exactly the untouched, identified last slot
    for al in &ledger.per_assignment {
        for leaf in &al.leaves {
            assert!((leaf.residual_ebits - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn catalytic_b3_consumes_nothing_and_uses_two_way_communication() {
    let set = b3_set().unwrap();
    let (protocol, budget) = catalytic_b3_protocol();
    assert!((budget.supplied_ebits - 1.0).abs() < 1e-12);
    let (verdict, ledger) = verify_marking(&protocol, &set, 3, Some(&budget)).unwrap();
    assert!(verdict.perfect);
    assert_eq!(verdict.per_assignment.len(), 6);
    let outcome = ledger.budget.as_ref().unwrap();
    assert!((outcome.supplied_ebits - 1.0).abs() <= 1e-9);
    assert!((outcome.returned_ebits - 1.0).abs() <= 1e-9);
    assert!(outcome.net_consumed_ebits.abs() <= 1e-9);

    let cc = cc_directions(&protocol);
    assert!(cc.two_way, "the protocol needs communication in both directions");
    assert_eq!(cc.broadcasting_parties, vec![0, 1]);
    // transcripts show measurements announced by both parties
    for al in &ledger.per_assignment {
        for leaf in &al.leaves {
            let parties: std::collections::BTreeSet<usize> =
                leaf.transcript.iter().map(|t| t.party).collect();
            assert!(parties.contains(&0) && parties.contains(&1));
        }
    }
}

#[test]
fn catalytic_protocols_never_create_entanglement() {
    let b4 = bell_basis_set().unwrap();
    let (p4, budget4) = catalytic_b4_protocol();
    let (_, ledger4) = verify_marking(&p4, &b4, 4, Some(&budget4)).unwrap();
    let out4 = ledger4.budget.as_ref().unwrap();
    assert!(out4.returned_ebits <= out4.supplied_ebits + ledger4.instance_ebits + 1e-9);

    let b3 = b3_set().unwrap();
    let (p3, budget3) = catalytic_b3_protocol();
    let (_, ledger3) = verify_marking(&p3, &b3, 3, Some(&budget3)).unwrap();
    let out3 = ledger3.budget.as_ref().unwrap();
    assert!(out3.returned_ebits <= out3.supplied_ebits + ledger3.instance_ebits + 1e-9);
}

#[test]
fn naive_single_measurement_is_not_a_perfect_marking_protocol() {
    // A lone Z classifier on slot 0 concludes blindly: not perfect on the
    // Bell basis.
    let set = bell_basis_set().unwrap();
    let naive = crate::locc::correlated_pauli_step(
        "only-step",
        (ALICE, 0),
        (BOB, 1),
        crate::locc::Pauli::Z,
        ProtocolNode::conclude(vec![0, 1, 2, 3]),
        ProtocolNode::conclude(vec![2, 3, 0, 1]),
    )
    .unwrap();
    let (verdict, _) = verify_marking(&naive, &set, 4, None).unwrap();
    assert!(!verdict.perfect);
}

#[test]
fn marking_built_from_discrimination_is_perfect_on_the_product_basis() {
    let set = product4_set();
    let lsd = product4_lsd();
    let marked = lsm_from_lsd(&lsd, &set, 4).unwrap();
    let (verdict, ledger) = verify_marking(&marked, &set, 4, None).unwrap();
    assert!(verdict.perfect);
    assert_eq!(verdict.per_assignment.len(), 24);
    assert!(ledger.average_residual_ebits.abs() < 1e-9, "product states carry no ebits");
}

#[test]
fn single_slot_composition_returns_the_discrimination_protocol() {
    let set = product4_set();
    let lsd = product4_lsd();
    assert_eq!(lsm_from_lsd(&lsd, &set, 1).unwrap(), lsd);
}

#[test]
fn classical_bit_marking_on_a_single_party() {
    let states = vec![
        PureState::basis_state(vec![2], 0).unwrap(),
        PureState::basis_state(vec![2], 1).unwrap(),
    ];
    let set = StateSet::new(
        "bit",
        states,
        PartyLayout::new(vec![ALICE], vec![0], vec![0]).unwrap(),
        true,
    )
    .unwrap();
    let lsd = ProtocolNode::Measure(MeasureNode {
        label: "read".into(),
        party: ALICE,
        factors: vec![0],
        basis: Basis::Z,
        classes: None,
        children: (0..2).map(|b| (b, ProtocolNode::conclude(vec![b]))).collect(),
    });
    let marked = lsm_from_lsd(&lsd, &set, 2).unwrap();
    let (verdict, ledger) = verify_marking(&marked, &set, 2, None).unwrap();
    assert!(verdict.perfect);
    assert_eq!(verdict.per_assignment.len(), 2);
    assert_eq!(ledger.average_residual_ebits, 0.0);
}

#[test]
fn imperfect_discrimination_protocol_is_rejected_by_the_composer() {
    let set = product4_set();
    // concludes 0 no matter what
    let blind = ProtocolNode::conclude(vec![0]);
    assert!(matches!(
        lsm_from_lsd(&blind, &set, 4),
        Err(LsmError::CompositionInvalid(_))
    ));
}

#[test]
fn block_composition_of_pairs_covers_four_slots() {
    let set = product4_set();
    let p2 = lsm_from_lsd(&product4_lsd(), &set, 2).unwrap();
    let p4 = compose_m_to_nm(&p2, &set, 2, 2).unwrap();
    let (verdict, _) = verify_marking(&p4, &set, 4, None).unwrap();
    assert!(verdict.perfect);
}

#[test]
fn block_composition_with_one_block_is_identity() {
    let set = product4_set();
    let p2 = lsm_from_lsd(&product4_lsd(), &set, 2).unwrap();
    assert_eq!(compose_m_to_nm(&p2, &set, 2, 1).unwrap(), p2);
}

#[test]
fn block_composition_rejects_oversized_targets() {
    let set = product4_set();
    let p2 = lsm_from_lsd(&product4_lsd(), &set, 2).unwrap();
    assert!(matches!(
        compose_m_to_nm(&p2, &set, 2, 3),
        Err(LsmError::InvalidArgument(_))
    ));
}

#[test]
fn the_two_composers_agree_leaf_for_leaf_at_unit_blocks() {
    let set = product4_set();
    let lsd = product4_lsd();
    let via_slots = lsm_from_lsd(&lsd, &set, 4).unwrap();
    let via_blocks = compose_m_to_nm(&lsd, &set, 1, 4).unwrap();
    for assignment in crate::ensembles::ordered_assignments(4, 4) {
        let instance = instance_for(&set, &assignment).unwrap();
        let a = execute(&via_slots, &instance.composite, &instance.layout).unwrap();
        let b = execute(&via_blocks, &instance.composite, &instance.layout).unwrap();
        assert_eq!(a.leaves.len(), b.leaves.len());
        for (la, lb) in a.leaves.iter().zip(&b.leaves) {
            assert_eq!(la.verdict, lb.verdict);
            assert!((la.probability - lb.probability).abs() < 1e-12);
        }
    }
}

#[test]
fn product_extension_adds_one_slot() {
    let set = product4_set();
    let p2 = lsm_from_lsd(&product4_lsd(), &set, 2).unwrap();
    let p3 = product_extend(&p2, &set, 2).unwrap();
    let (verdict, _) = verify_marking(&p3, &set, 3, None).unwrap();
    assert!(verdict.perfect);
}

#[test]
fn product_extension_chain_reaches_full_marking() {
    let set = product4_set();
    let mut protocol = product4_lsd();
    for m in 1..4usize {
        protocol = product_extend(&protocol, &set, m).unwrap();
        let (verdict, _) = verify_marking(&protocol, &set, m + 1, None).unwrap();
        assert!(verdict.perfect, "extension to {} slots", m + 1);
    }
}

#[test]
fn product_extension_rejects_entangled_members() {
    let states = vec![
        PureState::basis_state(vec![2, 2], 1).unwrap(),
        PureState::basis_state(vec![2, 2], 2).unwrap(),
        bell_state(BellKind::PhiPlus),
        bell_state(BellKind::PhiMinus),
    ];
    let set = StateSet::new(
        "tainted",
        states,
        PartyLayout::new(vec![ALICE, BOB], vec![0, 0], vec![0, 0]).unwrap(),
        true,
    )
    .unwrap();
    let err = product_extend(&product4_lsd(), &set, 2);
    assert!(matches!(err, Err(LsmError::NotProductSet(_))));
}

#[test]
fn two_state_tail_discriminates_every_bell_pair() {
    // Hypothetical perfect front ends: for each ordered pair of identified
    // slots, graft the tail and execute on matching instances only.
    let set = bell_basis_set().unwrap();
    for assignment in crate::ensembles::ordered_assignments(4, 4) {
        let front = ProtocolNode::conclude(assignment[..2].to_vec());
        let full = extend_last_two(&front, &set).unwrap();
        let instance = instance_for(&set, &assignment).unwrap();
        let tree = execute(&full, &instance.composite, &instance.layout).unwrap();
        for leaf in &tree.leaves {
            assert_eq!(leaf.verdict, assignment);
        }
    }
}

#[test]
fn two_state_tail_follows_the_x4_closing_tables() {
    // With slots 0 and 1 identified, the tail must separate the remaining
    // X4 members on the first part of slot 2, matching the closing rules of
    // the full protocol.
    let set = x4_set().unwrap();
    for assignment in crate::ensembles::ordered_assignments(4, 4) {
        let front = ProtocolNode::conclude(assignment[..2].to_vec());
        let full = extend_last_two(&front, &set).unwrap();
        let instance = instance_for(&set, &assignment).unwrap();
        let tree = execute(&full, &instance.composite, &instance.layout).unwrap();
        assert!((tree.total_probability() - 1.0).abs() < 1e-9);
        for leaf in &tree.leaves {
            assert_eq!(leaf.verdict, assignment);
        }
    }
}

#[test]
fn tail_rejects_sets_that_are_not_bell_tensors() {
    let set = product4_set();
    let front = ProtocolNode::conclude(vec![0, 1]);
    // |10⟩ and |11⟩ remain; they are product states, not Bell tensors
    assert!(matches!(
        extend_last_two(&front, &set),
        Err(LsmError::UnsupportedPair(_))
    ));
}

#[test]
fn bell_tensor_labels_decompose_x4_members() {
    let set = x4_set().unwrap();
    let expect = [
        [BellKind::PhiPlus, BellKind::PhiPlus],
        [BellKind::PhiMinus, BellKind::PhiMinus],
        [BellKind::PsiPlus, BellKind::PhiMinus],
        [BellKind::PsiMinus, BellKind::PhiMinus],
    ];
    for (i, member) in set.states().iter().enumerate() {
        let labels = bell_tensor_labels(member, set.layout()).expect("Bell tensor");
        assert_eq!(labels, expect[i]);
    }
    let product = tensor(&[
        &PureState::basis_state(vec![2], 0).unwrap(),
        &PureState::basis_state(vec![2], 1).unwrap(),
    ])
    .unwrap();
    assert!(bell_tensor_labels(&product, set.layout()).is_none());
}

#[test]
fn marking_report_serializes() {
    let set = b3_set().unwrap();
    let (protocol, budget) = catalytic_b3_protocol();
    let (verdict, ledger) = verify_marking(&protocol, &set, 3, Some(&budget)).unwrap();
    let json = marking_report_json(&verdict, &ledger);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["verdict"]["perfect"], serde_json::Value::Bool(true));
    assert!(parsed["ledger"]["budget"]["returned_ebits"].as_f64().unwrap() > 0.99);
}

#[test]
fn x4_protocol_round_trips_through_json() {
    let tree = build_x4_protocol();
    let json = crate::locc::protocol_to_json(&tree);
    let parsed = crate::locc::protocol_from_json(&json).unwrap();
    assert_eq!(parsed, tree);
}

#[test]
fn verify_marking_rejects_bad_slot_counts() {
    let set = b3_set().unwrap();
    let (protocol, _) = catalytic_b3_protocol();
    assert!(verify_marking(&protocol, &set, 0, None).is_err());
    assert!(verify_marking(&protocol, &set, 4, None).is_err());
}

#[test]
fn bell_tensor_label_check_on_product4_lsd_conclusions() {
    // the LSD protocol's conclusions are single-index; composed trees stay
    // injective
    let set = product4_set();
    let p = lsm_from_lsd(&product4_lsd(), &set, 3).unwrap();
    assert!(p.validate_conclusions().is_ok());
}
