//! The concrete marking protocol for the X4 set (four slots, sixteen qubit
//! factors). Every member is a first Bell pair on A1 B1 and a second on
//! A2 B2; the first parts run through `phi+ phi- psi+ psi-` in member order,
//! so Bell-measurement outcomes on a first part directly name the member.

use std::collections::BTreeMap;

use crate::locc::{
    bell_pair_discriminator, correlated_pauli_step, Basis, MeasureNode, Pauli, ProtocolNode,
    TeleportNode,
};
use crate::qcore::{BellKind, ALICE, BOB};

/// Factors of slot `s`: Alice's and Bob's halves of the first and the second
/// Bell pair, interleaved as A1 B1 A2 B2.
fn a1(s: usize) -> usize {
    4 * s
}
fn b1(s: usize) -> usize {
    4 * s + 1
}
fn a2(s: usize) -> usize {
    4 * s + 2
}
fn b2(s: usize) -> usize {
    4 * s + 3
}

/// Two-sided Pauli step on slot `slot`'s first part that separates the two
/// candidate members, then concludes via `conclude(identified_member)`.
fn walgate_first_part(
    label: &str,
    slot: usize,
    candidates: [usize; 2],
    conclude: impl Fn(usize) -> ProtocolNode,
) -> ProtocolNode {
    let ka = BellKind::from_index(candidates[0]).expect("member index");
    let kb = BellKind::from_index(candidates[1]).expect("member index");
    let (pauli, map) = bell_pair_discriminator(ka, kb).expect("distinct candidates");
    let on_c = conclude(map[0].1.index());
    let on_ac = conclude(map[1].1.index());
    correlated_pauli_step(label, (ALICE, a1(slot)), (BOB, b1(slot)), pauli, on_c, on_ac)
        .expect("distinct parties")
}

fn bell_measure(label: &str, factors: Vec<usize>, children: BTreeMap<usize, ProtocolNode>) -> ProtocolNode {
    ProtocolNode::Measure(MeasureNode {
        label: label.into(),
        party: ALICE,
        factors,
        basis: Basis::Bell,
        classes: None,
        children,
    })
}

/// Builds the full marking tree for the X4 4-slot instance.
///
/// Step 1 classifies slot 0's first part by a two-sided Z measurement; the
/// correlated branch continues with an X step on the second part, the
/// anti-correlated branch identifies the later slots by teleport-assisted
/// Bell measurements before inferring slot 0 by elimination. Every leaf
/// concludes all four indices.
pub fn build_x4_protocol() -> ProtocolNode {
    correlated_pauli_step(
        "step1",
        (ALICE, a1(0)),
        (BOB, b1(0)),
        Pauli::Z,
        correlated_branch(),
        anticorrelated_branch(),
    )
    .expect("distinct parties")
}

/// Slot 0 is phi-type: an X step on its second part separates member 0
/// (second part phi+) from member 1 (phi-).
fn correlated_branch() -> ProtocolNode {
    correlated_pauli_step(
        "step2",
        (ALICE, a2(0)),
        (BOB, b2(0)),
        Pauli::X,
        case_first_slot_is_0(),
        case_first_slot_is_1(),
    )
    .expect("distinct parties")
}

/// p = 0: slot 1's second part is phi- whatever q is. Teleport Bob's half of
/// slot 1's first part to Alice through it, Bell-measure to read q, then a
/// Walgate step on slot 2 fixes r; s is the leftover.
fn case_first_slot_is_0() -> ProtocolNode {
    let mut children = BTreeMap::new();
    for q in [1usize, 2, 3] {
        let cands: Vec<usize> = (1..4).filter(|&i| i != q).collect();
        children.insert(
            q,
            walgate_first_part("step4", 2, [cands[0], cands[1]], move |r| {
                let s = (1..4).find(|&i| i != q && i != r).expect("one index left");
                ProtocolNode::conclude(vec![0, q, r, s])
            }),
        );
    }
    ProtocolNode::Teleport(TeleportNode {
        label: "step3-tp".into(),
        sender: BOB,
        receiver: ALICE,
        source: b1(1),
        resource_sender: b2(1),
        resource_receiver: a2(1),
        child: Box::new(bell_measure("step3-bm", vec![a1(1), a2(1)], children)),
    })
}

/// p = 1: a Z step on slot 1's first part separates q = 0 from q ∈ {2, 3}.
fn case_first_slot_is_1() -> ProtocolNode {
    // q = 0: slots 2 and 3 hold members 2 and 3 in some order.
    let q0 = walgate_first_part("step4", 2, [2, 3], |r| {
        let s = if r == 2 { 3 } else { 2 };
        ProtocolNode::conclude(vec![1, 0, r, s])
    });

    // q ∈ {2, 3}: slot 1's second part is phi-; teleport slot 2's first part
    // to Alice and Bell-measure it.
    let mut children = BTreeMap::new();
    // Slot 2 is member 0: slots 3 holds the ψ state not in slot 1.
    children.insert(
        0,
        walgate_first_part("step4", 3, [2, 3], |s| {
            let q = if s == 2 { 3 } else { 2 };
            ProtocolNode::conclude(vec![1, q, 0, s])
        }),
    );
    children.insert(2, ProtocolNode::conclude(vec![1, 3, 2, 0]));
    children.insert(3, ProtocolNode::conclude(vec![1, 2, 3, 0]));
    let q23 = ProtocolNode::Teleport(TeleportNode {
        label: "step4-tp".into(),
        sender: BOB,
        receiver: ALICE,
        source: b1(2),
        resource_sender: b2(1),
        resource_receiver: a2(1),
        child: Box::new(bell_measure("step4-bm", vec![a1(2), a2(1)], children)),
    });

    correlated_pauli_step("step3", (ALICE, a1(1)), (BOB, b1(1)), Pauli::Z, q0, q23)
        .expect("distinct parties")
}

/// Step 1 anti-correlated: slot 0 holds member 2 or 3, so its second part is
/// a known phi- that can be spent as a teleportation resource right away.
fn anticorrelated_branch() -> ProtocolNode {
    let mut children = BTreeMap::new();
    for q in 0..4usize {
        children.insert(q, after_second_slot_known(q));
    }
    ProtocolNode::Teleport(TeleportNode {
        label: "alt2-tp".into(),
        sender: BOB,
        receiver: ALICE,
        source: b1(1),
        resource_sender: b2(0),
        resource_receiver: a2(0),
        child: Box::new(bell_measure("alt2-bm", vec![a1(1), a2(0)], children)),
    })
}

fn after_second_slot_known(q: usize) -> ProtocolNode {
    if q >= 2 {
        // q names a ψ member, so slot 0 is the other one and slots 2, 3 hold
        // the two phi members.
        let p = if q == 2 { 3 } else { 2 };
        return walgate_first_part("alt3", 2, [0, 1], move |r| {
            let s = if r == 0 { 1 } else { 0 };
            ProtocolNode::conclude(vec![p, q, r, s])
        });
    }
    // q ∈ {0, 1}: slot 1's second part is a known Bell pair (phi+ for q = 0,
    // phi- for q = 1); spend it to identify slot 2 the same way.
    let other_phi = 1 - q;
    let mut children = BTreeMap::new();
    children.insert(
        other_phi,
        walgate_first_part("alt4", 3, [2, 3], move |s| {
            let p = if s == 2 { 3 } else { 2 };
            ProtocolNode::conclude(vec![p, q, other_phi, s])
        }),
    );
    for r in [2usize, 3] {
        let p = if r == 2 { 3 } else { 2 };
        let s = other_phi;
        children.insert(r, ProtocolNode::conclude(vec![p, q, r, s]));
    }
    ProtocolNode::Teleport(TeleportNode {
        label: "alt3-tp".into(),
        sender: BOB,
        receiver: ALICE,
        source: b1(2),
        resource_sender: b2(1),
        resource_receiver: a2(1),
        child: Box::new(bell_measure("alt3-bm", vec![a1(2), a2(1)], children)),
    })
}
