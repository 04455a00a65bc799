use num_complex::Complex64;

use crate::error::{LsmError, Result};
use crate::qcore::{Party, PartyLayout, PureState};
use crate::{PRUNE_PROBABILITY, TOL_NORM};

use super::node::{BranchOutcome, BranchTree, ProtocolNode, TranscriptEntry};
use super::teleport::teleport_expand;

/// Executes a protocol tree exhaustively over all classical branches.
///
/// Every leaf carries its probability, transcript, final state (consumed
/// factors collapsed in place), and concluded assignment. Branches below the
/// pruning probability are dropped; the surviving leaf probabilities must sum
/// to one within the norm tolerance.
pub fn execute(
    protocol: &ProtocolNode,
    input: &PureState,
    layout: &PartyLayout,
) -> Result<BranchTree> {
    if input.num_factors() != layout.len() {
        return Err(LsmError::InvalidArgument(format!(
            "input has {} factors but layout describes {}",
            input.num_factors(),
            layout.len()
        )));
    }
    let mut leaves = Vec::new();
    let mut walker = Walker { layout, leaves: &mut leaves };
    let consumed = vec![false; layout.len()];
    walker.walk(protocol, input.clone(), 1.0, Vec::new(), consumed)?;
    let tree = BranchTree { input_dims: input.dims().to_vec(), leaves };
    let total = tree.total_probability();
    if (total - 1.0).abs() > TOL_NORM {
        return Err(LsmError::InvalidArgument(format!(
            "branch probabilities sum to {total}; protocol lost probability mass"
        )));
    }
    Ok(tree)
}

struct Walker<'a> {
    layout: &'a PartyLayout,
    leaves: &'a mut Vec<BranchOutcome>,
}

impl Walker<'_> {
    fn require_local(&self, party: Party, factors: &[usize], label: &str) -> Result<()> {
        if !self.layout.all_held_by(factors, party) {
            return Err(LsmError::LocalityViolation(format!(
                "node {label:?}: factors {factors:?} are not all held by {party}"
            )));
        }
        Ok(())
    }

    fn walk(
        &mut self,
        node: &ProtocolNode,
        state: PureState,
        prob: f64,
        transcript: Vec<TranscriptEntry>,
        consumed: Vec<bool>,
    ) -> Result<()> {
        match node {
            ProtocolNode::Conclude(c) => {
                self.leaves.push(BranchOutcome {
                    probability: prob,
                    transcript,
                    final_state: state,
                    verdict: c.assignment.clone(),
                });
                Ok(())
            }
            ProtocolNode::Unitary(u) => {
                self.require_local(u.party, &u.factors, &u.label)?;
                let next = state.apply_local_unitary(&u.factors, &u.op)?;
                self.walk(&u.child, next, prob, transcript, consumed)
            }
            ProtocolNode::Measure(m) => {
                self.require_local(m.party, &m.factors, &m.label)?;
                if let Some(&f) = m.factors.iter().find(|&&f| consumed[f]) {
                    return Err(LsmError::InvalidArgument(format!(
                        "node {:?} measures factor {f}, which was already consumed",
                        m.label
                    )));
                }
                let dim: usize = m.factors.iter().map(|&f| state.dims()[f]).product();
                let vectors = m.basis.vectors(dim)?;
                let outcomes = state.measure_projective(&m.factors, &vectors)?;
                let mut next_consumed = consumed.clone();
                for &f in &m.factors {
                    next_consumed[f] = true;
                }
                for o in outcomes {
                    let p = prob * o.probability;
                    if p < PRUNE_PROBABILITY {
                        continue;
                    }
                    let child = m.children.get(&o.outcome).ok_or_else(|| {
                        LsmError::InvalidArgument(format!(
                            "node {:?}: outcome {} occurs with probability {} but has no child",
                            m.label, o.outcome, o.probability
                        ))
                    })?;
                    let mut t = transcript.clone();
                    t.push(TranscriptEntry {
                        step: t.len(),
                        label: m.label.clone(),
                        party: m.party.0,
                        outcome: o.outcome,
                        class: m.classes.as_ref().and_then(|c| c.get(&o.outcome).cloned()),
                    });
                    self.walk(child, o.post, p, t, next_consumed.clone())?;
                }
                Ok(())
            }
            ProtocolNode::Teleport(t) => {
                self.require_local(t.sender, &[t.source, t.resource_sender], &t.label)?;
                self.require_local(t.receiver, &[t.resource_receiver], &t.label)?;
                if consumed[t.source] || consumed[t.resource_sender] || consumed[t.resource_receiver]
                {
                    return Err(LsmError::InvalidArgument(format!(
                        "node {:?} teleports through a consumed factor",
                        t.label
                    )));
                }
                let expanded = teleport_expand(t, &state)?;
                self.walk(&expanded, state, prob, transcript, consumed)
            }
            ProtocolNode::Prepare(p) => {
                self.require_local(p.party, &p.factors, &p.label)?;
                if p.states.len() != p.factors.len() {
                    return Err(LsmError::InvalidArgument(format!(
                        "node {:?} prepares {} factors with {} states",
                        p.label,
                        p.factors.len(),
                        p.states.len()
                    )));
                }
                let mut next = state;
                for (&f, target) in p.factors.iter().zip(&p.states) {
                    next = prepare_factor(&next, f, target)?;
                }
                let mut next_consumed = consumed.clone();
                for &f in &p.factors {
                    next_consumed[f] = false;
                }
                self.walk(&p.child, next, prob, transcript, next_consumed)
            }
        }
    }
}

/// Replaces a disentangled factor with a fresh state. The factor must be in a
/// pure state of its own (anything else would require discarding
/// correlations, which a pure-state simulator cannot represent).
fn prepare_factor(state: &PureState, factor: usize, target: &[Complex64]) -> Result<PureState> {
    let d = state.dims()[factor];
    if target.len() != d {
        return Err(LsmError::InvalidArgument(format!(
            "prepared state has length {} but factor {factor} has dimension {d}",
            target.len()
        )));
    }
    let norm: f64 = target.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > TOL_NORM {
        return Err(LsmError::InvalidArgument(format!(
            "prepared state for factor {factor} has norm {norm}"
        )));
    }
    let current = state.factor_state(&[factor])?.ok_or_else(|| {
        LsmError::InvalidArgument(format!(
            "factor {factor} is still entangled and cannot be re-prepared"
        ))
    })?;
    // Build the unitary mapping |current⟩ to |target⟩: T C† where C, T extend
    // the two vectors to unitaries via Householder-free completion.
    let c_mat = unitary_with_first_column(&current);
    let t_mat = unitary_with_first_column(target);
    let u = crate::qcore::UnitaryOp::new(t_mat * c_mat.adjoint())?;
    state.apply_local_unitary(&[factor], &u)
}

/// Completes a unit vector to a unitary matrix having it as first column.
fn unitary_with_first_column(v: &[Complex64]) -> nalgebra::DMatrix<Complex64> {
    let d = v.len();
    let mut m = nalgebra::DMatrix::from_element(d, d, Complex64::ZERO);
    for (i, &a) in v.iter().enumerate() {
        m[(i, 0)] = a;
    }
    // Gram-Schmidt the remaining standard basis vectors against the columns
    // collected so far, skipping near-dependent candidates.
    let mut cols = 1;
    let mut candidate = 0;
    while cols < d && candidate < d {
        let mut w = vec![Complex64::ZERO; d];
        w[candidate] = Complex64::new(1.0, 0.0);
        for c in 0..cols {
            let overlap: Complex64 =
                (0..d).map(|i| m[(i, c)].conj() * w[i]).sum();
            for (i, wi) in w.iter_mut().enumerate() {
                *wi -= overlap * m[(i, c)];
            }
        }
        let norm: f64 = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for (i, wi) in w.iter().enumerate() {
                m[(i, cols)] = wi / norm;
            }
            cols += 1;
        }
        candidate += 1;
    }
    m
}
