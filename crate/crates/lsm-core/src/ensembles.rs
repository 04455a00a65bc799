//! Built-in state sets, permutation ensembles, counting bounds, and
//! communication-rate comparisons.

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::qcore::{
    bell_state, tensor, BellKind, Bipartition, PartyLayout, PureState, ALICE, BOB,
};
use crate::TOL_NORM;

/// A named list of same-shaped states with a shared party layout.
#[derive(Clone, Debug)]
pub struct StateSet {
    pub name: String,
    states: Vec<PureState>,
    layout: PartyLayout,
    pairwise_orthogonal: bool,
}

impl StateSet {
    /// Builds a set, checking shapes and (when `expect_orthogonal`) pairwise
    /// orthogonality within the norm tolerance.
    pub fn new(
        name: impl Into<String>,
        states: Vec<PureState>,
        layout: PartyLayout,
        expect_orthogonal: bool,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(LsmError::InvalidArgument("a state set needs at least one state".into()));
        }
        let dims = states[0].dims().to_vec();
        if states.iter().any(|s| s.dims() != dims) {
            return Err(LsmError::InvalidArgument("set members differ in factor dims".into()));
        }
        if layout.len() != dims.len() {
            return Err(LsmError::InvalidArgument(format!(
                "layout covers {} factors but members have {}",
                layout.len(),
                dims.len()
            )));
        }
        if expect_orthogonal {
            for i in 0..states.len() {
                for j in (i + 1)..states.len() {
                    let ip = states[i].inner(&states[j])?;
                    if ip.norm() > TOL_NORM {
                        return Err(LsmError::InvalidArgument(format!(
                            "members {i} and {j} are not orthogonal: ⟨ψ{i}|ψ{j}⟩ = {ip}"
                        )));
                    }
                }
            }
        }
        Ok(Self { name: name.into(), states, layout, pairwise_orthogonal: expect_orthogonal })
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_pairwise_orthogonal(&self) -> bool {
        self.pairwise_orthogonal
    }

    /// Member dims (all members share them).
    pub fn member_dims(&self) -> &[usize] {
        self.states[0].dims()
    }

    /// Layout of an m-slot marking instance over this set.
    pub fn instance_layout(&self, m: usize) -> PartyLayout {
        self.layout.replicate(m)
    }
}

/// The four two-Bell-pair states on `C⁴_A ⊗ C⁴_B` that are locally markable
/// but not locally distinguishable. Factor order per member: A1 B1 A2 B2.
pub fn x4_set() -> Result<StateSet> {
    let phi_plus = bell_state(BellKind::PhiPlus);
    let phi_minus = bell_state(BellKind::PhiMinus);
    let psi_plus = bell_state(BellKind::PsiPlus);
    let psi_minus = bell_state(BellKind::PsiMinus);
    let states = vec![
        tensor(&[&phi_plus, &phi_plus])?,
        tensor(&[&phi_minus, &phi_minus])?,
        tensor(&[&psi_plus, &phi_minus])?,
        tensor(&[&psi_minus, &phi_minus])?,
    ];
    let layout =
        PartyLayout::new(vec![ALICE, BOB, ALICE, BOB], vec![0; 4], vec![0, 0, 1, 1])?;
    StateSet::new("x4", states, layout, true)
}

/// First parts of the X4 members, in order: phi+ phi- psi+ psi-.
pub fn x4_first_part_kinds() -> [BellKind; 4] {
    BellKind::ALL
}

/// Second parts of the X4 members, in order.
pub fn x4_second_part_kinds() -> [BellKind; 4] {
    [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PhiMinus, BellKind::PhiMinus]
}

/// The full two-qubit Bell basis as a state set.
pub fn bell_basis_set() -> Result<StateSet> {
    let states = BellKind::ALL.iter().map(|&k| bell_state(k)).collect();
    StateSet::new("b4", states, PartyLayout::pair(ALICE, BOB), true)
}

/// The first three Bell states `{phi+, phi-, psi+}`.
pub fn b3_set() -> Result<StateSet> {
    let states =
        [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus].iter().map(|&k| bell_state(k)).collect();
    StateSet::new("b3", states, PartyLayout::pair(ALICE, BOB), true)
}

/// The two-qubit computational product basis `{|00⟩, |01⟩, |10⟩, |11⟩}`.
pub fn product_basis_set() -> Result<StateSet> {
    let states = (0..4).map(|i| PureState::basis_state(vec![2, 2], i)).collect::<Result<_>>()?;
    let layout = PartyLayout::new(vec![ALICE, BOB], vec![0, 0], vec![0, 0])?;
    StateSet::new("product4", states, layout, true)
}

/// All ordered `m`-tuples of distinct indices from `0..k`, lexicographic.
pub fn ordered_assignments(k: usize, m: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..k).permutations(m).collect()
}

/// The set of all `C(K,m)·m!` ordered tensor products of `m` distinct
/// members, in lexicographic order of the index tuples.
pub fn permutation_ensemble(s: &StateSet, m: usize) -> Result<StateSet> {
    if m < 1 || m > s.len() {
        return Err(LsmError::InvalidArgument(format!(
            "m must satisfy 1 ≤ m ≤ {}, got {m}",
            s.len()
        )));
    }
    let mut states = Vec::new();
    for tuple in ordered_assignments(s.len(), m) {
        let parts: Vec<&PureState> = tuple.iter().map(|&i| &s.states[i]).collect();
        states.push(tensor(&parts)?);
    }
    StateSet::new(
        format!("{}-perm{}", s.name, m),
        states,
        s.instance_layout(m),
        s.pairwise_orthogonal,
    )
}

/// One marking task instance: `m` distinct members in hidden slot order.
#[derive(Clone, Debug)]
pub struct MarkingInstance {
    pub set_name: String,
    pub m: usize,
    pub hidden_assignment: Vec<usize>,
    pub composite: PureState,
    pub layout: PartyLayout,
}

/// Builds the instance for a specific hidden assignment.
pub fn instance_for(s: &StateSet, assignment: &[usize]) -> Result<MarkingInstance> {
    if assignment.is_empty() || assignment.len() > s.len() {
        return Err(LsmError::InvalidArgument(format!(
            "assignment length must be in 1..={}, got {}",
            s.len(),
            assignment.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in assignment {
        if i >= s.len() {
            return Err(LsmError::InvalidArgument(format!("state index {i} out of range")));
        }
        if !seen.insert(i) {
            return Err(LsmError::InvalidArgument(format!("state index {i} repeated")));
        }
    }
    let parts: Vec<&PureState> = assignment.iter().map(|&i| &s.states[i]).collect();
    Ok(MarkingInstance {
        set_name: s.name.clone(),
        m: assignment.len(),
        hidden_assignment: assignment.to_vec(),
        composite: tensor(&parts)?,
        layout: s.instance_layout(assignment.len()),
    })
}

/// Uniformly random ordered assignment of `m` distinct members, from a
/// seeded generator (identical seeds give identical instances).
pub fn random_instance(s: &StateSet, m: usize, seed: u64) -> Result<MarkingInstance> {
    if m < 1 || m > s.len() {
        return Err(LsmError::InvalidArgument(format!(
            "m must satisfy 1 ≤ m ≤ {}, got {m}",
            s.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: uniform over ordered m-tuples.
    let mut pool: Vec<usize> = (0..s.len()).collect();
    let mut assignment = Vec::with_capacity(m);
    for i in 0..m {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
        assignment.push(pool[i]);
    }
    instance_for(s, &assignment)
}

/// Sufficient unmarkability condition for `K` maximally entangled states of
/// local dimension `d`: true iff `K! > d^K`. False only means the bound is
/// silent, not that the set is markable.
pub fn unmarkable_by_counting(k: usize, d: usize) -> Result<bool> {
    if k < 1 {
        return Err(LsmError::InvalidArgument("set size must be at least 1".into()));
    }
    if d < 2 {
        return Err(LsmError::InvalidArgument("local dimension must be at least 2".into()));
    }
    let mut fact = BigUint::from(1u32);
    for i in 2..=k {
        fact *= BigUint::from(i);
    }
    let pow = BigUint::from(d).pow(k as u32);
    Ok(fact > pow)
}

/// Bits-per-qudit comparison between multi-copy discrimination and marking.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// `log2(n) / k`: bits per qudit when discrimination needs `k` copies.
    pub lsd_rate: f64,
    /// `log2(n!) / n`: bits per qudit for marking the full permutation
    /// ensemble.
    pub lsm_rate: f64,
}

/// Computes both communication rates in bits (log base 2).
pub fn rate_compare(n: usize, d: usize, k: usize) -> Result<RateReport> {
    if n < 1 || k < 1 {
        return Err(LsmError::InvalidArgument("n and k must be at least 1".into()));
    }
    let log2_fact: f64 = (2..=n).map(|i| (i as f64).log2()).sum();
    Ok(RateReport {
        n,
        d,
        k,
        lsd_rate: (n as f64).log2() / k as f64,
        lsm_rate: log2_fact / n as f64,
    })
}

/// Recorded premise for the pair-marking impossibility of the three-Bell-state
/// set: its 2-slot permutation ensemble has more maximally entangled members
/// than the local dimension, which triggers the cited indistinguishability
/// bound. This is a report, not a simulation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairMarkingFact {
    pub set_name: String,
    pub ensemble_size: usize,
    pub local_dim: usize,
    pub all_maximally_entangled: bool,
    /// `ensemble_size > local_dim`, the premise of the bound.
    pub bound_applies: bool,
}

pub fn b3_pair_fact() -> Result<PairMarkingFact> {
    let b3 = b3_set()?;
    let pairs = permutation_ensemble(&b3, 2)?;
    let cut = pairs.layout().party_cut(ALICE)?;
    let local_dim: usize =
        cut.left().iter().map(|&f| pairs.member_dims()[f]).product();
    let max_entropy = (local_dim as f64).log2();
    let all_max = pairs
        .states()
        .iter()
        .map(|s| s.entanglement_entropy(&cut))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|&e| (e - max_entropy).abs() < TOL_NORM);
    Ok(PairMarkingFact {
        set_name: b3.name,
        ensemble_size: pairs.len(),
        local_dim,
        all_maximally_entangled: all_max,
        bound_applies: pairs.len() > local_dim,
    })
}

#[derive(Serialize, Deserialize)]
struct StateSetDto {
    name: String,
    dims: Vec<usize>,
    states: Vec<Vec<[f64; 2]>>,
    layout: PartyLayout,
    pairwise_orthogonal: bool,
}

/// Serializes a state set to JSON with `[re, im]` amplitude pairs.
pub fn state_set_to_json(s: &StateSet) -> String {
    let dto = StateSetDto {
        name: s.name.clone(),
        dims: s.member_dims().to_vec(),
        states: s
            .states
            .iter()
            .map(|st| st.amps().iter().map(|a| [a.re, a.im]).collect())
            .collect(),
        layout: s.layout.clone(),
        pairwise_orthogonal: s.pairwise_orthogonal,
    };
    serde_json::to_string_pretty(&dto).expect("state set serialization")
}

/// Parses a state set from its JSON document, revalidating all invariants.
pub fn state_set_from_json(text: &str) -> Result<StateSet> {
    let dto: StateSetDto =
        serde_json::from_str(text).map_err(|e| LsmError::Malformed(e.to_string()))?;
    let states = dto
        .states
        .iter()
        .map(|amps| {
            PureState::new(
                amps.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
                dto.dims.clone(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    StateSet::new(dto.name, states, dto.layout, dto.pairwise_orthogonal)
}

/// Entanglement of one set member across the Alice-versus-rest cut, in ebits.
pub fn member_entropy(s: &StateSet, index: usize) -> Result<f64> {
    let cut = s.layout.party_cut(ALICE)?;
    s.states[index].entanglement_entropy(&cut)
}

/// The Alice|rest bipartition of a set's members.
pub fn party_cut(s: &StateSet) -> Result<Bipartition> {
    s.layout().party_cut(ALICE)
}
