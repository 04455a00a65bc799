use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::qcore::{bell_basis_vectors, Party, PureState, UnitaryOp};

/// A measurement basis, either referenced by name or given explicitly.
#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    /// Computational basis of the measured joint space (any dimension).
    Z,
    /// Single-qubit X basis: outcome 0 is `|+⟩`, outcome 1 is `|−⟩`.
    X,
    /// Two-qubit Bell basis in `phi+ phi- psi+ psi-` order.
    Bell,
    Explicit(Vec<Vec<Complex64>>),
}

impl Basis {
    /// Resolves to explicit orthonormal vectors for a joint space of the
    /// given dimension.
    pub fn vectors(&self, dim: usize) -> Result<Vec<Vec<Complex64>>> {
        match self {
            Basis::Z => Ok((0..dim)
                .map(|i| {
                    let mut v = vec![Complex64::ZERO; dim];
                    v[i] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect()),
            Basis::X => {
                if dim != 2 {
                    return Err(LsmError::InvalidArgument(format!(
                        "X basis is defined on one qubit, got dimension {dim}"
                    )));
                }
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Ok(vec![vec![h, h], vec![h, -h]])
            }
            Basis::Bell => {
                if dim != 4 {
                    return Err(LsmError::InvalidArgument(format!(
                        "Bell basis is defined on two qubits, got dimension {dim}"
                    )));
                }
                Ok(bell_basis_vectors())
            }
            Basis::Explicit(vs) => {
                if vs.len() != dim {
                    return Err(LsmError::InvalidArgument(format!(
                        "explicit basis has {} vectors for dimension {dim}",
                        vs.len()
                    )));
                }
                Ok(vs.clone())
            }
        }
    }

}

/// A local projective measurement with one child per possible outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureNode {
    pub label: String,
    pub party: Party,
    pub factors: Vec<usize>,
    pub basis: Basis,
    /// Optional coarse-graining of outcomes into transcript classes
    /// (e.g. correlated / anti-correlated), purely descriptive.
    pub classes: Option<BTreeMap<usize, String>>,
    /// Children keyed by outcome index. Outcomes that cannot occur on valid
    /// inputs may be absent; reaching one at positive probability is an
    /// execution error.
    pub children: BTreeMap<usize, ProtocolNode>,
}

/// A local unitary applied unconditionally.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryNode {
    pub label: String,
    pub party: Party,
    pub factors: Vec<usize>,
    pub op: UnitaryOp,
    pub child: Box<ProtocolNode>,
}

/// Teleportation sugar: expands at execution time into a Bell measurement at
/// the sender and outcome-conditioned corrections at the receiver. The
/// resource pair must be maximally entangled and disentangled from the rest;
/// the correction table is adapted to the actual resource state.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleportNode {
    pub label: String,
    pub sender: Party,
    pub receiver: Party,
    /// Qubit factor to move (held by the sender).
    pub source: usize,
    /// Sender's half of the resource pair.
    pub resource_sender: usize,
    /// Receiver's half of the resource pair; carries the state afterwards.
    pub resource_receiver: usize,
    pub child: Box<ProtocolNode>,
}

/// Replaces consumed factors with freshly prepared single-factor states.
/// Entangled targets are unrepresentable by construction: each factor gets
/// its own state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PrepareNode {
    pub label: String,
    pub party: Party,
    pub factors: Vec<usize>,
    /// One normalized state vector per factor, matching that factor's dim.
    pub states: Vec<Vec<Complex64>>,
    pub child: Box<ProtocolNode>,
}

/// A leaf: the parties announce the slot-to-state-index assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcludeNode {
    pub assignment: Vec<usize>,
}

/// A finite tree of local instruments with classical branching.
///
/// Classical communication is implicit: every node may condition on the full
/// transcript so far (two-way CC by default).
#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolNode {
    Measure(MeasureNode),
    Unitary(UnitaryNode),
    Teleport(TeleportNode),
    Prepare(PrepareNode),
    Conclude(ConcludeNode),
}

impl ProtocolNode {
    pub fn conclude(assignment: Vec<usize>) -> Self {
        ProtocolNode::Conclude(ConcludeNode { assignment })
    }

    /// Validates that every Conclude assignment is injective over slots.
    pub fn validate_conclusions(&self) -> Result<()> {
        match self {
            ProtocolNode::Conclude(c) => {
                let mut seen = std::collections::BTreeSet::new();
                for &i in &c.assignment {
                    if !seen.insert(i) {
                        return Err(LsmError::InvalidArgument(format!(
                            "conclude assignment {:?} repeats index {i}",
                            c.assignment
                        )));
                    }
                }
                Ok(())
            }
            ProtocolNode::Measure(m) => {
                m.children.values().try_for_each(|c| c.validate_conclusions())
            }
            ProtocolNode::Unitary(u) => u.child.validate_conclusions(),
            ProtocolNode::Teleport(t) => t.child.validate_conclusions(),
            ProtocolNode::Prepare(p) => p.child.validate_conclusions(),
        }
    }

    /// Rewrites all factor indices by adding `offset` (slot relocation).
    pub fn offset_factors(&self, offset: usize) -> Self {
        match self {
            ProtocolNode::Measure(m) => ProtocolNode::Measure(MeasureNode {
                label: m.label.clone(),
                party: m.party,
                factors: m.factors.iter().map(|f| f + offset).collect(),
                basis: m.basis.clone(),
                classes: m.classes.clone(),
                children: m
                    .children
                    .iter()
                    .map(|(k, v)| (*k, v.offset_factors(offset)))
                    .collect(),
            }),
            ProtocolNode::Unitary(u) => ProtocolNode::Unitary(UnitaryNode {
                label: u.label.clone(),
                party: u.party,
                factors: u.factors.iter().map(|f| f + offset).collect(),
                op: u.op.clone(),
                child: Box::new(u.child.offset_factors(offset)),
            }),
            ProtocolNode::Teleport(t) => ProtocolNode::Teleport(TeleportNode {
                label: t.label.clone(),
                sender: t.sender,
                receiver: t.receiver,
                source: t.source + offset,
                resource_sender: t.resource_sender + offset,
                resource_receiver: t.resource_receiver + offset,
                child: Box::new(t.child.offset_factors(offset)),
            }),
            ProtocolNode::Prepare(p) => ProtocolNode::Prepare(PrepareNode {
                label: p.label.clone(),
                party: p.party,
                factors: p.factors.iter().map(|f| f + offset).collect(),
                states: p.states.clone(),
                child: Box::new(p.child.offset_factors(offset)),
            }),
            ProtocolNode::Conclude(c) => ProtocolNode::Conclude(c.clone()),
        }
    }

    /// Replaces every Conclude leaf by `graft(assignment)`.
    pub fn graft_conclusions(&self, graft: &mut impl FnMut(&[usize]) -> Result<ProtocolNode>) -> Result<Self> {
        Ok(match self {
            ProtocolNode::Conclude(c) => graft(&c.assignment)?,
            ProtocolNode::Measure(m) => {
                let mut children = BTreeMap::new();
                for (k, v) in &m.children {
                    children.insert(*k, v.graft_conclusions(graft)?);
                }
                ProtocolNode::Measure(MeasureNode { children, ..m.clone() })
            }
            ProtocolNode::Unitary(u) => ProtocolNode::Unitary(UnitaryNode {
                child: Box::new(u.child.graft_conclusions(graft)?),
                ..u.clone()
            }),
            ProtocolNode::Teleport(t) => ProtocolNode::Teleport(TeleportNode {
                child: Box::new(t.child.graft_conclusions(graft)?),
                ..t.clone()
            }),
            ProtocolNode::Prepare(p) => ProtocolNode::Prepare(PrepareNode {
                child: Box::new(p.child.graft_conclusions(graft)?),
                ..p.clone()
            }),
        })
    }

    /// Drops subtrees that can only conclude assignments containing an
    /// already-used index. Returns `None` if the whole subtree is dropped.
    pub fn prune_used(&self, used: &std::collections::BTreeSet<usize>) -> Option<Self> {
        match self {
            ProtocolNode::Conclude(c) => {
                if c.assignment.iter().any(|i| used.contains(i)) {
                    None
                } else {
                    Some(self.clone())
                }
            }
            ProtocolNode::Measure(m) => {
                let children: BTreeMap<usize, ProtocolNode> = m
                    .children
                    .iter()
                    .filter_map(|(k, v)| v.prune_used(used).map(|v| (*k, v)))
                    .collect();
                if children.is_empty() {
                    None
                } else {
                    Some(ProtocolNode::Measure(MeasureNode { children, ..m.clone() }))
                }
            }
            ProtocolNode::Unitary(u) => u.child.prune_used(used).map(|child| {
                ProtocolNode::Unitary(UnitaryNode { child: Box::new(child), ..u.clone() })
            }),
            ProtocolNode::Teleport(t) => t.child.prune_used(used).map(|child| {
                ProtocolNode::Teleport(TeleportNode { child: Box::new(child), ..t.clone() })
            }),
            ProtocolNode::Prepare(p) => p.child.prune_used(used).map(|child| {
                ProtocolNode::Prepare(PrepareNode { child: Box::new(child), ..p.clone() })
            }),
        }
    }

    /// Parties that perform a branching measurement somewhere in the tree.
    /// Each such measurement's outcome must be broadcast, so these are the
    /// sources of classical communication. Teleport nodes count as a
    /// branching measurement by the sender.
    pub fn cc_sources(&self) -> Vec<Party> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_cc_sources(&mut out);
        out.into_iter().collect()
    }

    fn collect_cc_sources(&self, out: &mut std::collections::BTreeSet<Party>) {
        match self {
            ProtocolNode::Measure(m) => {
                if m.children.len() > 1 {
                    out.insert(m.party);
                }
                m.children.values().for_each(|c| c.collect_cc_sources(out));
            }
            ProtocolNode::Unitary(u) => u.child.collect_cc_sources(out),
            ProtocolNode::Teleport(t) => {
                out.insert(t.sender);
                t.child.collect_cc_sources(out);
            }
            ProtocolNode::Prepare(p) => p.child.collect_cc_sources(out),
            ProtocolNode::Conclude(_) => {}
        }
    }

    /// Static one-way check: true when no branching measurement by a party
    /// other than `from` has any other party acting or concluding below it;
    /// equivalently, all classical communication flows out of `from`.
    pub fn is_one_way(&self, from: Party) -> bool {
        self.cc_sources().iter().all(|&p| p == from)
    }
}

/// One entry of an execution transcript: the `step`-th node visited on the
/// branch, with its outcome and optional coarse class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step: usize,
    pub label: String,
    pub party: usize,
    pub outcome: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

/// A fully executed branch: its probability, transcript, final state, and
/// concluded assignment.
#[derive(Clone, Debug)]
pub struct BranchOutcome {
    pub probability: f64,
    pub transcript: Vec<TranscriptEntry>,
    pub final_state: PureState,
    pub verdict: Vec<usize>,
}

/// Exhaustive execution trace of a protocol on one input.
#[derive(Clone, Debug)]
pub struct BranchTree {
    pub input_dims: Vec<usize>,
    pub leaves: Vec<BranchOutcome>,
}

impl BranchTree {
    pub fn total_probability(&self) -> f64 {
        self.leaves.iter().map(|l| l.probability).sum()
    }
}
