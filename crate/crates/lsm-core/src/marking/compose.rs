//! Generic protocol composers: marking built from discrimination, block
//! composition, product-set extension, and the two-remaining-candidates
//! closer.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::ensembles::StateSet;
use crate::error::{LsmError, Result};
use crate::locc::{
    bell_pair_discriminator, correlated_pauli_step, execute, PrepareNode, ProtocolNode,
};
use crate::marking::verify_marking;
use crate::qcore::{bell_state, equal_up_to_phase, BellKind, PartyLayout, PureState, ALICE, BOB};
use crate::TOL_NORM;

/// The obvious local discrimination protocol for the two-qubit product
/// basis: both parties read their qubit in Z and the two bits name the
/// member.
pub fn product_basis_lsd() -> ProtocolNode {
    use crate::locc::{Basis, MeasureNode};
    let bob = |a: usize| {
        let children = (0..2usize)
            .map(|b| (b, ProtocolNode::conclude(vec![2 * a + b])))
            .collect();
        ProtocolNode::Measure(MeasureNode {
            label: "z-bob".into(),
            party: BOB,
            factors: vec![1],
            basis: Basis::Z,
            classes: None,
            children,
        })
    };
    ProtocolNode::Measure(MeasureNode {
        label: "z-alice".into(),
        party: ALICE,
        factors: vec![0],
        basis: Basis::Z,
        classes: None,
        children: (0..2).map(|a| (a, bob(a))).collect(),
    })
}

/// Checks that `lsd` perfectly distinguishes every member of `s`.
fn verify_lsd(lsd: &ProtocolNode, s: &StateSet) -> Result<()> {
    for (j, member) in s.states().iter().enumerate() {
        let tree = execute(lsd, member, s.layout())?;
        let good: f64 = tree
            .leaves
            .iter()
            .filter(|l| l.verdict.as_slice() == [j])
            .map(|l| l.probability)
            .sum();
        if (good - 1.0).abs() > TOL_NORM {
            return Err(LsmError::CompositionInvalid(format!(
                "discrimination protocol identifies member {j} with probability {good}"
            )));
        }
    }
    Ok(())
}

/// Builds a perfect `k`-slot marking protocol from a perfect discrimination
/// protocol: apply it slot by slot, filtering already-identified candidates
/// classically between stages. When a single candidate remains the last slot
/// is inferred without touching it.
pub fn lsm_from_lsd(lsd: &ProtocolNode, s: &StateSet, k: usize) -> Result<ProtocolNode> {
    if k < 1 || k > s.len() {
        return Err(LsmError::InvalidArgument(format!(
            "slot count must satisfy 1 ≤ k ≤ {}, got {k}",
            s.len()
        )));
    }
    verify_lsd(lsd, s)?;
    if k == 1 {
        return Ok(lsd.clone());
    }
    let f = s.layout().len();
    build_slotwise(lsd, s, k, f, 0, &BTreeSet::new(), &[])
}

fn build_slotwise(
    lsd: &ProtocolNode,
    s: &StateSet,
    k: usize,
    f: usize,
    slot: usize,
    used: &BTreeSet<usize>,
    partial: &[usize],
) -> Result<ProtocolNode> {
    if slot == k {
        return Ok(ProtocolNode::conclude(partial.to_vec()));
    }
    if s.len() - used.len() == 1 {
        let i = (0..s.len()).find(|i| !used.contains(i)).expect("one candidate left");
        let mut used2 = used.clone();
        used2.insert(i);
        let mut partial2 = partial.to_vec();
        partial2.push(i);
        return build_slotwise(lsd, s, k, f, slot + 1, &used2, &partial2);
    }
    let copy = lsd
        .prune_used(used)
        .ok_or_else(|| {
            LsmError::CompositionInvalid("every branch concludes an already-used index".into())
        })?
        .offset_factors(slot * f);
    copy.graft_conclusions(&mut |a: &[usize]| {
        if a.len() != 1 {
            return Err(LsmError::CompositionInvalid(format!(
                "discrimination protocol must conclude exactly one index, got {a:?}"
            )));
        }
        let mut used2 = used.clone();
        used2.insert(a[0]);
        let mut partial2 = partial.to_vec();
        partial2.push(a[0]);
        build_slotwise(lsd, s, k, f, slot + 1, &used2, &partial2)
    })
}

/// Composes a perfect `m`-slot marking protocol into an `n·m`-slot one by
/// running it block by block over consecutive slot groups.
pub fn compose_m_to_nm(
    p_m: &ProtocolNode,
    s: &StateSet,
    m: usize,
    n: usize,
) -> Result<ProtocolNode> {
    if n < 1 || m < 1 {
        return Err(LsmError::InvalidArgument("block size and count must be positive".into()));
    }
    if n * m > s.len() {
        return Err(LsmError::InvalidArgument(format!(
            "{n} blocks of {m} slots exceed the set size {}",
            s.len()
        )));
    }
    let (verdict, _) = verify_marking(p_m, s, m, None)?;
    if !verdict.perfect {
        return Err(LsmError::CompositionInvalid(format!(
            "the {m}-slot protocol is not perfect on {:?}",
            s.name
        )));
    }
    if n == 1 {
        return Ok(p_m.clone());
    }
    let ctx = BlockContext { p_m, s, m, n, f: s.layout().len() };
    build_blockwise(&ctx, 0, &BTreeSet::new(), &[])
}

struct BlockContext<'a> {
    p_m: &'a ProtocolNode,
    s: &'a StateSet,
    m: usize,
    n: usize,
    f: usize,
}

fn build_blockwise(
    ctx: &BlockContext<'_>,
    block: usize,
    used: &BTreeSet<usize>,
    partial: &[usize],
) -> Result<ProtocolNode> {
    if block == ctx.n {
        return Ok(ProtocolNode::conclude(partial.to_vec()));
    }
    if ctx.m == 1 && ctx.s.len() - used.len() == 1 {
        let i = (0..ctx.s.len()).find(|i| !used.contains(i)).expect("one candidate left");
        let mut used2 = used.clone();
        used2.insert(i);
        let mut partial2 = partial.to_vec();
        partial2.push(i);
        return build_blockwise(ctx, block + 1, &used2, &partial2);
    }
    let copy = ctx
        .p_m
        .prune_used(used)
        .ok_or_else(|| {
            LsmError::CompositionInvalid("every branch concludes already-used indices".into())
        })?
        .offset_factors(block * ctx.m * ctx.f);
    copy.graft_conclusions(&mut |a: &[usize]| {
        if a.len() != ctx.m {
            return Err(LsmError::CompositionInvalid(format!(
                "block protocol must conclude {} indices, got {a:?}",
                ctx.m
            )));
        }
        let mut used2 = used.clone();
        used2.extend(a.iter().copied());
        let mut partial2 = partial.to_vec();
        partial2.extend_from_slice(a);
        build_blockwise(ctx, block + 1, &used2, &partial2)
    })
}

/// Per-factor state vectors of every member, or `NotProductSet`.
fn product_factor_states(s: &StateSet) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let mut all = Vec::with_capacity(s.len());
    for (i, member) in s.states().iter().enumerate() {
        let mut per_factor = Vec::with_capacity(member.num_factors());
        for fct in 0..member.num_factors() {
            match member.factor_state(&[fct])? {
                Some(v) => per_factor.push(v),
                None => {
                    return Err(LsmError::NotProductSet(format!(
                        "member {i} is entangled across factor {fct}"
                    )))
                }
            }
        }
        all.push(per_factor);
    }
    Ok(all)
}

/// Extends a perfect `m`-slot marking protocol over a fully product set to
/// `m + 1` slots: run it on the first `m` slots, locally re-prepare the
/// destroyed-but-identified middle slots, and run it again shifted one slot
/// over. The conclusions of the two runs merge at the leaves.
pub fn product_extend(p_m: &ProtocolNode, s: &StateSet, m: usize) -> Result<ProtocolNode> {
    if m < 1 || m + 1 > s.len() {
        return Err(LsmError::InvalidArgument(format!(
            "cannot extend an {m}-slot protocol beyond the set size {}",
            s.len()
        )));
    }
    let factor_states = product_factor_states(s)?;
    let (verdict, _) = verify_marking(p_m, s, m, None)?;
    if !verdict.perfect {
        return Err(LsmError::CompositionInvalid(format!(
            "the {m}-slot protocol is not perfect on {:?}",
            s.name
        )));
    }
    let f = s.layout().len();
    p_m.graft_conclusions(&mut |a: &[usize]| {
        let first = a[0];
        let mut used = BTreeSet::new();
        used.insert(first);
        let second = p_m
            .prune_used(&used)
            .ok_or_else(|| {
                LsmError::CompositionInvalid("no candidate left for the shifted run".into())
            })?
            .offset_factors(f);
        let mut tail = second.graft_conclusions(&mut |j: &[usize]| {
            let mut assignment = Vec::with_capacity(j.len() + 1);
            assignment.push(first);
            assignment.extend_from_slice(j);
            Ok(ProtocolNode::conclude(assignment))
        })?;
        // Restore the overlap slots 1..m to their identified members before
        // the shifted run touches them.
        for slot in (1..m).rev() {
            tail = wrap_prepare(tail, s, &factor_states, slot, a[slot], f);
        }
        Ok(tail)
    })
}

fn wrap_prepare(
    child: ProtocolNode,
    s: &StateSet,
    factor_states: &[Vec<Vec<Complex64>>],
    slot: usize,
    member: usize,
    f: usize,
) -> ProtocolNode {
    let layout = s.layout();
    let mut node = child;
    for party in layout.parties().into_iter().rev() {
        let locals = layout.factors_of(party);
        if locals.is_empty() {
            continue;
        }
        node = ProtocolNode::Prepare(PrepareNode {
            label: format!("restore-slot{slot}"),
            party,
            factors: locals.iter().map(|&mf| slot * f + mf).collect(),
            states: locals.iter().map(|&mf| factor_states[member][mf].clone()).collect(),
            child: Box::new(node),
        });
    }
    node
}

/// Decomposes a member into Bell labels, one per layout part, when it is a
/// tensor of Bell pairs (each part two qubit factors shared by the parties).
pub fn bell_tensor_labels(state: &PureState, layout: &PartyLayout) -> Option<Vec<BellKind>> {
    let parts: BTreeSet<usize> = (0..layout.len()).map(|f| layout.part_of(f)).collect();
    let mut labels = Vec::new();
    for part in parts {
        let (fa, fb) = part_pair(layout, part)?;
        if state.dims()[fa] != 2 || state.dims()[fb] != 2 {
            return None;
        }
        let v = state.factor_state(&[fa, fb]).ok()??;
        let pair = PureState::new(v, vec![2, 2]).ok()?;
        let kind =
            BellKind::ALL.into_iter().find(|&k| equal_up_to_phase(&pair, &bell_state(k), 1e-9))?;
        labels.push(kind);
    }
    Some(labels)
}

/// The (Alice factor, Bob factor) pair making up `part`, if it is exactly
/// that shape.
fn part_pair(layout: &PartyLayout, part: usize) -> Option<(usize, usize)> {
    let members: Vec<usize> =
        (0..layout.len()).filter(|&f| layout.part_of(f) == part).collect();
    if members.len() != 2 {
        return None;
    }
    let alice = members.iter().copied().find(|&f| layout.party_of(f) == ALICE)?;
    let bob = members.iter().copied().find(|&f| layout.party_of(f) == BOB)?;
    Some((alice, bob))
}

/// Closes a protocol that identifies all but two slots: a Walgate step on
/// the first open slot separates the two remaining candidates (implemented
/// for candidates that are tensors of Bell pairs), and the last slot is
/// inferred.
pub fn extend_last_two(p: &ProtocolNode, s: &StateSet) -> Result<ProtocolNode> {
    let k = s.len();
    if k < 2 {
        return Err(LsmError::InvalidArgument("the set must have at least two members".into()));
    }
    let f = s.layout().len();
    p.graft_conclusions(&mut |a: &[usize]| {
        if a.len() != k - 2 {
            return Err(LsmError::CompositionInvalid(format!(
                "front end must conclude {} indices, got {a:?}",
                k - 2
            )));
        }
        let remaining: Vec<usize> = (0..k).filter(|i| !a.contains(i)).collect();
        let (x, y) = (remaining[0], remaining[1]);
        let lx = bell_tensor_labels(&s.states()[x], s.layout()).ok_or_else(|| {
            LsmError::UnsupportedPair(format!("member {x} is not a tensor of Bell pairs"))
        })?;
        let ly = bell_tensor_labels(&s.states()[y], s.layout()).ok_or_else(|| {
            LsmError::UnsupportedPair(format!("member {y} is not a tensor of Bell pairs"))
        })?;
        let part = lx.iter().zip(&ly).position(|(a, b)| a != b).ok_or_else(|| {
            LsmError::UnsupportedPair(format!("members {x} and {y} share every Bell label"))
        })?;
        let (fa, fb) = part_pair(s.layout(), part)
            .ok_or_else(|| LsmError::UnsupportedPair("part is not an Alice/Bob pair".into()))?;
        let (pauli, map) = bell_pair_discriminator(lx[part], ly[part])?;
        let correlated_member = if map[0].1 == lx[part] { x } else { y };
        let other = x + y - correlated_member;
        let slot = k - 2;
        let conclude = |first: usize, second: usize| {
            let mut assignment = a.to_vec();
            assignment.push(first);
            assignment.push(second);
            ProtocolNode::conclude(assignment)
        };
        correlated_pauli_step(
            "wp-tail",
            (ALICE, slot * f + fa),
            (BOB, slot * f + fb),
            pauli,
            conclude(correlated_member, other),
            conclude(other, correlated_member),
        )
    })
}
