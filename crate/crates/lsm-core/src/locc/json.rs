//! Lossless JSON serialization of protocol trees.
//!
//! Node kinds are tagged; complex numbers are `[re, im]` pairs; measurement
//! children are keyed by outcome index.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::qcore::{Party, UnitaryOp};

use super::node::{
    Basis, ConcludeNode, MeasureNode, PrepareNode, ProtocolNode, TeleportNode, UnitaryNode,
};

type CVec = Vec<[f64; 2]>;

fn to_pairs(v: &[Complex64]) -> CVec {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BasisDto {
    Named { name: String },
    Explicit { vectors: Vec<CVec> },
}

impl From<&Basis> for BasisDto {
    fn from(b: &Basis) -> Self {
        match b {
            Basis::Z => BasisDto::Named { name: "z".into() },
            Basis::X => BasisDto::Named { name: "x".into() },
            Basis::Bell => BasisDto::Named { name: "bell".into() },
            Basis::Explicit(vs) => {
                BasisDto::Explicit { vectors: vs.iter().map(|v| to_pairs(v)).collect() }
            }
        }
    }
}

impl TryFrom<BasisDto> for Basis {
    type Error = LsmError;

    fn try_from(d: BasisDto) -> Result<Self> {
        match d {
            BasisDto::Named { name } => match name.as_str() {
                "z" => Ok(Basis::Z),
                "x" => Ok(Basis::X),
                "bell" => Ok(Basis::Bell),
                other => Err(LsmError::Malformed(format!("unknown basis name {other:?}"))),
            },
            BasisDto::Explicit { vectors } => {
                Ok(Basis::Explicit(vectors.iter().map(|v| from_pairs(v)).collect()))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NodeDto {
    LocalMeasure {
        label: String,
        party: usize,
        factors: Vec<usize>,
        basis: BasisDto,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        classes: Option<BTreeMap<String, String>>,
        children: BTreeMap<String, NodeDto>,
    },
    LocalUnitary {
        label: String,
        party: usize,
        factors: Vec<usize>,
        matrix: Vec<CVec>,
        child: Box<NodeDto>,
    },
    Teleport {
        label: String,
        sender: usize,
        receiver: usize,
        source: usize,
        resource: [usize; 2],
        child: Box<NodeDto>,
    },
    LocalPrepare {
        label: String,
        party: usize,
        factors: Vec<usize>,
        states: Vec<CVec>,
        child: Box<NodeDto>,
    },
    Conclude {
        assignment: Vec<usize>,
    },
}

impl From<&ProtocolNode> for NodeDto {
    fn from(n: &ProtocolNode) -> Self {
        match n {
            ProtocolNode::Measure(m) => NodeDto::LocalMeasure {
                label: m.label.clone(),
                party: m.party.0,
                factors: m.factors.clone(),
                basis: (&m.basis).into(),
                classes: m
                    .classes
                    .as_ref()
                    .map(|c| c.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()),
                children: m
                    .children
                    .iter()
                    .map(|(k, v)| (k.to_string(), NodeDto::from(v)))
                    .collect(),
            },
            ProtocolNode::Unitary(u) => NodeDto::LocalUnitary {
                label: u.label.clone(),
                party: u.party.0,
                factors: u.factors.clone(),
                matrix: (0..u.op.dim())
                    .map(|i| (0..u.op.dim()).map(|j| u.op.matrix()[(i, j)]).collect::<Vec<_>>())
                    .map(|row| to_pairs(&row))
                    .collect(),
                child: Box::new(NodeDto::from(&*u.child)),
            },
            ProtocolNode::Teleport(t) => NodeDto::Teleport {
                label: t.label.clone(),
                sender: t.sender.0,
                receiver: t.receiver.0,
                source: t.source,
                resource: [t.resource_sender, t.resource_receiver],
                child: Box::new(NodeDto::from(&*t.child)),
            },
            ProtocolNode::Prepare(p) => NodeDto::LocalPrepare {
                label: p.label.clone(),
                party: p.party.0,
                factors: p.factors.clone(),
                states: p.states.iter().map(|s| to_pairs(s)).collect(),
                child: Box::new(NodeDto::from(&*p.child)),
            },
            ProtocolNode::Conclude(c) => NodeDto::Conclude { assignment: c.assignment.clone() },
        }
    }
}

impl TryFrom<NodeDto> for ProtocolNode {
    type Error = LsmError;

    fn try_from(d: NodeDto) -> Result<Self> {
        Ok(match d {
            NodeDto::LocalMeasure { label, party, factors, basis, classes, children } => {
                let mut parsed_children = BTreeMap::new();
                for (k, v) in children {
                    let outcome: usize = k
                        .parse()
                        .map_err(|_| LsmError::Malformed(format!("bad outcome key {k:?}")))?;
                    parsed_children.insert(outcome, ProtocolNode::try_from(v)?);
                }
                let parsed_classes = classes
                    .map(|c| {
                        c.into_iter()
                            .map(|(k, v)| {
                                k.parse::<usize>()
                                    .map(|k| (k, v))
                                    .map_err(|_| LsmError::Malformed(format!("bad class key {k:?}")))
                            })
                            .collect::<Result<BTreeMap<_, _>>>()
                    })
                    .transpose()?;
                ProtocolNode::Measure(MeasureNode {
                    label,
                    party: Party(party),
                    factors,
                    basis: basis.try_into()?,
                    classes: parsed_classes,
                    children: parsed_children,
                })
            }
            NodeDto::LocalUnitary { label, party, factors, matrix, child } => {
                let rows: Vec<Vec<Complex64>> = matrix.iter().map(|r| from_pairs(r)).collect();
                ProtocolNode::Unitary(UnitaryNode {
                    label,
                    party: Party(party),
                    factors,
                    op: UnitaryOp::from_rows(&rows)?,
                    child: Box::new(ProtocolNode::try_from(*child)?),
                })
            }
            NodeDto::Teleport { label, sender, receiver, source, resource, child } => {
                ProtocolNode::Teleport(TeleportNode {
                    label,
                    sender: Party(sender),
                    receiver: Party(receiver),
                    source,
                    resource_sender: resource[0],
                    resource_receiver: resource[1],
                    child: Box::new(ProtocolNode::try_from(*child)?),
                })
            }
            NodeDto::LocalPrepare { label, party, factors, states, child } => {
                ProtocolNode::Prepare(PrepareNode {
                    label,
                    party: Party(party),
                    factors,
                    states: states.iter().map(|s| from_pairs(s)).collect(),
                    child: Box::new(ProtocolNode::try_from(*child)?),
                })
            }
            NodeDto::Conclude { assignment } => ProtocolNode::Conclude(ConcludeNode { assignment }),
        })
    }
}

/// Serializes a protocol tree to a JSON document.
pub fn protocol_to_json(node: &ProtocolNode) -> String {
    serde_json::to_string_pretty(&NodeDto::from(node)).expect("protocol serialization")
}

/// Parses a protocol tree from its JSON document.
pub fn protocol_from_json(text: &str) -> Result<ProtocolNode> {
    let dto: NodeDto =
        serde_json::from_str(text).map_err(|e| LsmError::Malformed(e.to_string()))?;
    dto.try_into()
}
