use std::collections::BTreeMap;

use crate::error::{LsmError, Result};
use crate::qcore::{BellKind, Party};

use super::node::{Basis, MeasureNode, ProtocolNode};

/// Single-qubit Pauli measurement axis used by the correlated classifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    fn basis(self) -> Basis {
        match self {
            Pauli::X => Basis::X,
            Pauli::Z => Basis::Z,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pauli::X => "x",
            Pauli::Z => "z",
        }
    }
}

/// Coarse classes of a two-sided Pauli measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoarseClass {
    Correlated,
    Anticorrelated,
}

impl CoarseClass {
    pub fn label(self) -> &'static str {
        match self {
            CoarseClass::Correlated => "C",
            CoarseClass::Anticorrelated => "AC",
        }
    }
}

/// Both parties measure the same Pauli on their halves of a qubit pair and
/// coarse-grain the joint outcome into correlated (same) vs anti-correlated
/// (different). The two continuation subtrees are cloned into the four joint
/// branches.
pub fn correlated_pauli_step(
    label: &str,
    (party_a, factor_a): (Party, usize),
    (party_b, factor_b): (Party, usize),
    pauli: Pauli,
    on_correlated: ProtocolNode,
    on_anticorrelated: ProtocolNode,
) -> Result<ProtocolNode> {
    if party_a == party_b {
        return Err(LsmError::InvalidArgument(format!(
            "correlated step needs two parties, both factors are held by {party_a}"
        )));
    }
    let second = |first_outcome: usize| {
        let mut children = BTreeMap::new();
        let mut classes = BTreeMap::new();
        for second_outcome in 0..2usize {
            let class = if second_outcome == first_outcome {
                CoarseClass::Correlated
            } else {
                CoarseClass::Anticorrelated
            };
            classes.insert(second_outcome, class.label().to_string());
            children.insert(
                second_outcome,
                match class {
                    CoarseClass::Correlated => on_correlated.clone(),
                    CoarseClass::Anticorrelated => on_anticorrelated.clone(),
                },
            );
        }
        ProtocolNode::Measure(MeasureNode {
            label: format!("{label}/{}/{party_b}", pauli.label()),
            party: party_b,
            factors: vec![factor_b],
            basis: pauli.basis(),
            classes: Some(classes),
            children,
        })
    };
    let mut children = BTreeMap::new();
    children.insert(0, second(0));
    children.insert(1, second(1));
    Ok(ProtocolNode::Measure(MeasureNode {
        label: format!("{label}/{}/{party_a}", pauli.label()),
        party: party_a,
        factors: vec![factor_a],
        basis: pauli.basis(),
        classes: None,
        children,
    }))
}

/// Picks the Pauli whose correlated/anti-correlated classes perfectly
/// separate two distinct Bell states, and says which state each class maps
/// to.
///
/// Z separates `phi` from `psi` (correlated ⇒ phi); X separates `+` from `−`
/// (correlated ⇒ +). Pairs differing in both tags use Z.
pub fn bell_pair_discriminator(
    a: BellKind,
    b: BellKind,
) -> Result<(Pauli, [(CoarseClass, BellKind); 2])> {
    if a == b {
        return Err(LsmError::InvalidArgument(format!(
            "cannot discriminate {} from itself",
            a.label()
        )));
    }
    if a.is_phi() != b.is_phi() {
        let correlated = if a.is_phi() { a } else { b };
        let anti = if a.is_phi() { b } else { a };
        Ok((
            Pauli::Z,
            [(CoarseClass::Correlated, correlated), (CoarseClass::Anticorrelated, anti)],
        ))
    } else {
        let correlated = if a.is_plus() { a } else { b };
        let anti = if a.is_plus() { b } else { a };
        Ok((
            Pauli::X,
            [(CoarseClass::Correlated, correlated), (CoarseClass::Anticorrelated, anti)],
        ))
    }
}
