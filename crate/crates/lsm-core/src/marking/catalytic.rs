//! Entanglement-catalytic marking protocols for the Bell-basis sets: borrow
//! EPR pairs from a supplier, teleport enough halves across to pin down the
//! early slots by Bell measurement, finish with a Walgate step, and hand an
//! intact, identified Bell pair back.

use std::collections::BTreeMap;

use crate::locc::{
    bell_pair_discriminator, correlated_pauli_step, Basis, MeasureNode, ProtocolNode, TeleportNode,
};
use crate::marking::CatalyticBudget;
use crate::qcore::{bell_state, BellKind, PartyLayout, ALICE, BOB};

fn bob_bell_measure(
    label: &str,
    factors: Vec<usize>,
    children: BTreeMap<usize, ProtocolNode>,
) -> ProtocolNode {
    ProtocolNode::Measure(MeasureNode {
        label: label.into(),
        party: BOB,
        factors,
        basis: Basis::Bell,
        classes: None,
        children,
    })
}

fn phi_plus_resource() -> (crate::qcore::PureState, PartyLayout) {
    (bell_state(BellKind::PhiPlus), PartyLayout::pair(ALICE, BOB))
}

/// Walgate step on a bare Bell-pair slot whose two candidate members are
/// known; concludes via `conclude(identified_member)`.
fn walgate_pair(
    label: &str,
    factors: (usize, usize),
    candidates: (usize, usize),
    conclude: impl Fn(usize) -> ProtocolNode,
) -> ProtocolNode {
    let ka = BellKind::from_index(candidates.0).expect("member index");
    let kb = BellKind::from_index(candidates.1).expect("member index");
    let (pauli, map) = bell_pair_discriminator(ka, kb).expect("distinct candidates");
    correlated_pauli_step(
        label,
        (ALICE, factors.0),
        (BOB, factors.1),
        pauli,
        conclude(map[0].1.index()),
        conclude(map[1].1.index()),
    )
    .expect("distinct parties")
}

/// (2,1)-catalytic marking of the full Bell basis over four slots.
///
/// Factors: two resource pairs at (0,1) and (2,3), then slots at
/// (4,5) (6,7) (8,9) (10,11). Slots 0 and 1 are teleported to Bob and
/// Bell-measured; a Walgate step on slot 2 fixes the third index; the last
/// is inferred, leaving slot 3's pair intact and identified.
pub fn catalytic_b4_protocol() -> (ProtocolNode, CatalyticBudget) {
    let mut p_children = BTreeMap::new();
    for p in 0..4usize {
        let mut q_children = BTreeMap::new();
        for q in (0..4usize).filter(|&q| q != p) {
            let cands: Vec<usize> = (0..4).filter(|&i| i != p && i != q).collect();
            q_children.insert(
                q,
                walgate_pair("wp", (8, 9), (cands[0], cands[1]), move |r| {
                    let s = (0..4).find(|&i| i != p && i != q && i != r).expect("one left");
                    ProtocolNode::conclude(vec![p, q, r, s])
                }),
            );
        }
        let identify_q = ProtocolNode::Teleport(TeleportNode {
            label: "tp-q".into(),
            sender: ALICE,
            receiver: BOB,
            source: 6,
            resource_sender: 2,
            resource_receiver: 3,
            child: Box::new(bob_bell_measure("bm-q", vec![3, 7], q_children)),
        });
        p_children.insert(p, identify_q);
    }
    let tree = ProtocolNode::Teleport(TeleportNode {
        label: "tp-p".into(),
        sender: ALICE,
        receiver: BOB,
        source: 4,
        resource_sender: 0,
        resource_receiver: 1,
        child: Box::new(bob_bell_measure("bm-p", vec![1, 5], p_children)),
    });
    let budget = CatalyticBudget::new(vec![phi_plus_resource(), phi_plus_resource()], 1.0)
        .expect("static budget");
    (tree, budget)
}

/// (1,1)-catalytic marking of the three-Bell-state set over three slots.
///
/// Factors: one resource pair at (0,1), slots at (2,3) (4,5) (6,7). One
/// teleport-and-measure fixes the first index (communication Alice to Bob,
/// then Bob to Alice); a Walgate step on slot 1 fixes the second; the third
/// is inferred, leaving slot 2 intact. Net consumption is zero.
pub fn catalytic_b3_protocol() -> (ProtocolNode, CatalyticBudget) {
    let mut p_children = BTreeMap::new();
    for p in 0..3usize {
        let cands: Vec<usize> = (0..3).filter(|&i| i != p).collect();
        p_children.insert(
            p,
            walgate_pair("wp", (4, 5), (cands[0], cands[1]), move |q| {
                let r = (0..3).find(|&i| i != p && i != q).expect("one left");
                ProtocolNode::conclude(vec![p, q, r])
            }),
        );
    }
    let tree = ProtocolNode::Teleport(TeleportNode {
        label: "tp-p".into(),
        sender: ALICE,
        receiver: BOB,
        source: 2,
        resource_sender: 0,
        resource_receiver: 1,
        child: Box::new(bob_bell_measure("bm-p", vec![1, 3], p_children)),
    });
    let budget =
        CatalyticBudget::new(vec![phi_plus_resource()], 1.0).expect("static budget");
    (tree, budget)
}
