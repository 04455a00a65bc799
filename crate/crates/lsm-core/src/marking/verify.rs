use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{instance_for, ordered_assignments, StateSet};
use crate::error::{LsmError, Result};
use crate::locc::{execute, ProtocolNode, TranscriptEntry};
use crate::qcore::{tensor, PartyLayout, PureState, ALICE};
use crate::TOL_NORM;

/// Entanglement borrowed from a supplier: resource states prepended to the
/// instance, with the protocol's claimed return.
#[derive(Clone, Debug)]
pub struct CatalyticBudget {
    resources: Vec<(PureState, PartyLayout)>,
    /// δ: total entanglement of the supplied resources across the party cut.
    pub supplied_ebits: f64,
    /// ε the protocol claims to hand back after marking.
    pub claimed_returned_ebits: f64,
}

impl CatalyticBudget {
    pub fn new(
        resources: Vec<(PureState, PartyLayout)>,
        claimed_returned_ebits: f64,
    ) -> Result<Self> {
        let mut supplied = 0.0;
        for (state, layout) in &resources {
            if state.num_factors() != layout.len() {
                return Err(LsmError::InvalidArgument(
                    "resource state and layout disagree on factor count".into(),
                ));
            }
            supplied += state.entanglement_entropy(&layout.party_cut(ALICE)?)?;
        }
        Ok(Self { resources, supplied_ebits: supplied, claimed_returned_ebits })
    }

    pub fn resources(&self) -> &[(PureState, PartyLayout)] {
        &self.resources
    }

    /// Layout of the resources alone, slots renumbered in order.
    pub fn layout(&self) -> PartyLayout {
        let mut it = self.resources.iter();
        let (_, first) = it.next().expect("budget has at least one resource");
        it.fold(first.clone(), |acc, (_, l)| acc.concat(l))
    }

    /// Number of factors the resources occupy (instance factors shift by
    /// this).
    pub fn factor_count(&self) -> usize {
        self.resources.iter().map(|(s, _)| s.num_factors()).sum()
    }
}

/// Per-assignment marking outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssignmentVerdict {
    pub assignment: Vec<usize>,
    /// Probability mass on branches concluding exactly this assignment.
    pub success_probability: f64,
    /// Probability mass on branches concluding anything else.
    pub mislabeled_probability: f64,
}

/// Success record over every ordered assignment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkingVerdict {
    pub per_assignment: Vec<AssignmentVerdict>,
    /// True iff every assignment is identified with probability one (within
    /// tolerance) and no branch mislabels.
    pub perfect: bool,
}

/// One executed leaf with its residual entanglement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafLedger {
    pub probability: f64,
    /// Entanglement across the party cut at Conclude, in ebits.
    pub residual_ebits: f64,
    pub correct: bool,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssignmentLedger {
    pub assignment: Vec<usize>,
    pub leaves: Vec<LeafLedger>,
    /// Branch-probability-weighted residual for this assignment.
    pub expected_residual_ebits: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetOutcome {
    /// δ supplied by the supplier.
    pub supplied_ebits: f64,
    /// ε actually available to hand back: the probability-weighted residual
    /// entanglement at correctly concluded leaves, whose identity is then
    /// known.
    pub returned_ebits: f64,
    pub claimed_returned_ebits: f64,
    /// δ − ε, the entanglement consumed in the catalytic sense.
    pub net_consumed_ebits: f64,
}

/// Per-branch ebit accounting across the party cut.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntanglementLedger {
    pub per_assignment: Vec<AssignmentLedger>,
    /// Mean over assignments of the expected residual (assignments uniform).
    pub average_residual_ebits: f64,
    /// Entanglement of one instance (any assignment) across the party cut.
    pub instance_ebits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetOutcome>,
}

/// Classical-communication directions used by a protocol, derived from which
/// parties perform branching measurements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CcDirections {
    pub broadcasting_parties: Vec<usize>,
    pub two_way: bool,
}

pub fn cc_directions(p: &ProtocolNode) -> CcDirections {
    let sources = p.cc_sources();
    CcDirections {
        broadcasting_parties: sources.iter().map(|p| p.0).collect(),
        two_way: sources.len() > 1,
    }
}

/// Executes `protocol` on every ordered `m`-assignment of `set` (plus any
/// budget resources, prepended) and accounts success and residual
/// entanglement per branch.
pub fn verify_marking(
    protocol: &ProtocolNode,
    set: &StateSet,
    m: usize,
    budget: Option<&CatalyticBudget>,
) -> Result<(MarkingVerdict, EntanglementLedger)> {
    if m < 1 || m > set.len() {
        return Err(LsmError::InvalidArgument(format!(
            "m must satisfy 1 ≤ m ≤ {}, got {m}",
            set.len()
        )));
    }
    protocol.validate_conclusions()?;
    let assignments = ordered_assignments(set.len(), m);
    let records: Vec<(AssignmentVerdict, AssignmentLedger, f64)> = assignments
        .par_iter()
        .map(|assignment| run_assignment(protocol, set, assignment, budget))
        .collect::<Result<Vec<_>>>()?;

    let perfect = records.iter().all(|(v, _, _)| {
        (v.success_probability - 1.0).abs() <= TOL_NORM && v.mislabeled_probability <= TOL_NORM
    });
    let average_residual_ebits = records
        .iter()
        .map(|(_, l, _)| l.expected_residual_ebits)
        .sum::<f64>()
        / records.len() as f64;
    let instance_ebits = records[0].2;
    let returned = records
        .iter()
        .map(|(_, l, _)| {
            l.leaves.iter().filter(|leaf| leaf.correct).map(|leaf| leaf.probability * leaf.residual_ebits).sum::<f64>()
        })
        .sum::<f64>()
        / records.len() as f64;

    let budget_outcome = budget.map(|b| BudgetOutcome {
        supplied_ebits: b.supplied_ebits,
        returned_ebits: returned,
        claimed_returned_ebits: b.claimed_returned_ebits,
        net_consumed_ebits: b.supplied_ebits - returned,
    });

    let (verdicts, ledgers): (Vec<_>, Vec<_>) =
        records.into_iter().map(|(v, l, _)| (v, l)).unzip();
    Ok((
        MarkingVerdict { per_assignment: verdicts, perfect },
        EntanglementLedger {
            per_assignment: ledgers,
            average_residual_ebits,
            instance_ebits,
            budget: budget_outcome,
        },
    ))
}

fn run_assignment(
    protocol: &ProtocolNode,
    set: &StateSet,
    assignment: &[usize],
    budget: Option<&CatalyticBudget>,
) -> Result<(AssignmentVerdict, AssignmentLedger, f64)> {
    let instance = instance_for(set, assignment)?;
    let instance_cut = instance.layout.party_cut(ALICE).ok();
    let instance_ebits = match &instance_cut {
        Some(cut) => instance.composite.entanglement_entropy(cut)?,
        None => 0.0,
    };

    let (input, layout) = match budget {
        Some(b) => {
            let mut parts: Vec<&PureState> = b.resources().iter().map(|(s, _)| s).collect();
            parts.push(&instance.composite);
            (tensor(&parts)?, b.layout().concat(&instance.layout))
        }
        None => (instance.composite.clone(), instance.layout.clone()),
    };
    let cut = layout.party_cut(ALICE).ok();

    let tree = execute(protocol, &input, &layout)?;
    let mut success = 0.0;
    let mut mislabeled = 0.0;
    let mut leaves = Vec::with_capacity(tree.leaves.len());
    for leaf in &tree.leaves {
        let correct = leaf.verdict == assignment;
        if correct {
            success += leaf.probability;
        } else {
            mislabeled += leaf.probability;
        }
        let residual = match &cut {
            Some(cut) => leaf.final_state.entanglement_entropy(cut)?,
            None => 0.0,
        };
        leaves.push(LeafLedger {
            probability: leaf.probability,
            residual_ebits: residual,
            correct,
            transcript: leaf.transcript.clone(),
        });
    }
    let expected_residual_ebits =
        leaves.iter().map(|l| l.probability * l.residual_ebits).sum::<f64>();
    Ok((
        AssignmentVerdict {
            assignment: assignment.to_vec(),
            success_probability: success,
            mislabeled_probability: mislabeled,
        },
        AssignmentLedger { assignment: assignment.to_vec(), leaves, expected_residual_ebits },
        instance_ebits,
    ))
}

/// Combined JSON report of a verdict and its ledger.
#[derive(Serialize)]
struct MarkingReportDto<'a> {
    verdict: &'a MarkingVerdict,
    ledger: &'a EntanglementLedger,
}

pub fn marking_report_json(verdict: &MarkingVerdict, ledger: &EntanglementLedger) -> String {
    serde_json::to_string_pretty(&MarkingReportDto { verdict, ledger })
        .expect("report serialization")
}
