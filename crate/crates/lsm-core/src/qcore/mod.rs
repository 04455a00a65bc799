//! Dense pure-state linear algebra on multi-factor registers.
//!
//! States are complex amplitude vectors with an explicit tensor-factor
//! structure (`dims`). Amplitudes are indexed row-major: the first factor is
//! the most significant digit. All values are immutable after construction
//! and all operations are pure functions.

mod layout;
mod unitary;

pub use layout::{Party, PartyLayout, ALICE, BOB};
pub use unitary::{kron_all, UnitaryOp};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LsmError, Result};
use crate::{PRUNE_PROBABILITY, TOL_NORM};

/// The four maximally entangled two-qubit states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] =
        [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];

    pub fn index(self) -> usize {
        match self {
            BellKind::PhiPlus => 0,
            BellKind::PhiMinus => 1,
            BellKind::PsiPlus => 2,
            BellKind::PsiMinus => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| LsmError::InvalidArgument(format!("no Bell state with index {i}")))
    }

    /// True for `phi±` (correlated in the Z basis).
    pub fn is_phi(self) -> bool {
        matches!(self, BellKind::PhiPlus | BellKind::PhiMinus)
    }

    /// True for the `+` sign variants (correlated in the X basis).
    pub fn is_plus(self) -> bool {
        matches!(self, BellKind::PhiPlus | BellKind::PsiPlus)
    }

    pub fn label(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "phi+" => Ok(BellKind::PhiPlus),
            "phi-" => Ok(BellKind::PhiMinus),
            "psi+" => Ok(BellKind::PsiPlus),
            "psi-" => Ok(BellKind::PsiMinus),
            other => Err(LsmError::InvalidArgument(format!("unknown Bell label {other:?}"))),
        }
    }
}

/// A bipartition of factor indices into two nonempty complementary sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(left: impl IntoIterator<Item = usize>, n_factors: usize) -> Result<Self> {
        let mut left: Vec<usize> = left.into_iter().collect();
        left.sort_unstable();
        left.dedup();
        if let Some(&f) = left.iter().find(|&&f| f >= n_factors) {
            return Err(LsmError::InvalidArgument(format!(
                "factor {f} out of range for {n_factors} factors"
            )));
        }
        let right: Vec<usize> = (0..n_factors).filter(|f| !left.contains(f)).collect();
        if left.is_empty() || right.is_empty() {
            return Err(LsmError::InvalidArgument(
                "bipartition must leave both sides nonempty".into(),
            ));
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }
}

/// One branch of a projective measurement.
#[derive(Clone, Debug)]
pub struct MeasureOutcome {
    /// Index of the basis vector that fired.
    pub outcome: usize,
    pub probability: f64,
    /// Normalized post-measurement state (same factor structure, measured
    /// factors collapsed onto the basis vector).
    pub post: PureState,
}

/// A normalized dense state vector over an ordered list of tensor factors.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amps: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(LsmError::InvalidArgument(
                "every factor dimension must be at least 2".into(),
            ));
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(LsmError::InvalidArgument(format!(
                "amplitude vector has length {} but dims imply {total}",
                amps.len()
            )));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq.sqrt() - 1.0).abs() > TOL_NORM {
            return Err(LsmError::InvalidArgument(format!(
                "state is not normalized: ||amps|| = {}",
                norm_sq.sqrt()
            )));
        }
        Ok(Self { amps, dims })
    }

    /// The computational basis state `|index⟩` on the given factors.
    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(LsmError::InvalidArgument(format!(
                "basis index {index} out of range for total dimension {total}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; total];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps, dims)
    }

    /// A single qubit `a|0⟩ + b|1⟩` (normalized on entry).
    pub fn qubit(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(vec![a, b], vec![2])
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.amps.len() != other.amps.len() {
            return Err(LsmError::InvalidArgument(format!(
                "inner product of states with dims {} and {}",
                self.amps.len(),
                other.amps.len()
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn strides(&self) -> Vec<usize> {
        strides_of(&self.dims)
    }

    fn check_factors(&self, factors: &[usize]) -> Result<()> {
        if factors.is_empty() {
            return Err(LsmError::InvalidArgument("factor list is empty".into()));
        }
        let mut seen = vec![false; self.dims.len()];
        for &f in factors {
            if f >= self.dims.len() {
                return Err(LsmError::InvalidArgument(format!(
                    "factor {f} out of range for {} factors",
                    self.dims.len()
                )));
            }
            if seen[f] {
                return Err(LsmError::InvalidArgument(format!("factor {f} listed twice")));
            }
            seen[f] = true;
        }
        Ok(())
    }

    /// Offsets of all digit combinations of the given factors, iterated
    /// row-major in the listed factor order.
    fn offsets_over(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offs = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(offs.len() * self.dims[f]);
            for &base in &offs {
                for digit in 0..self.dims[f] {
                    next.push(base + digit * strides[f]);
                }
            }
            offs = next;
        }
        offs
    }

    fn complement(&self, factors: &[usize]) -> Vec<usize> {
        (0..self.dims.len()).filter(|f| !factors.contains(f)).collect()
    }

    /// Applies a unitary to the joint space of the listed factors (in the
    /// listed order); all other factors are untouched.
    pub fn apply_local_unitary(&self, factors: &[usize], u: &UnitaryOp) -> Result<Self> {
        self.check_factors(factors)?;
        let k: usize = factors.iter().map(|&f| self.dims[f]).product();
        if k != u.dim() {
            return Err(LsmError::InvalidArgument(format!(
                "factors span dimension {k} but unitary has dimension {}",
                u.dim()
            )));
        }
        let combos = self.offsets_over(factors);
        let rests = self.offsets_over(&self.complement(factors));
        let mat = u.matrix();
        let mut out = self.amps.clone();
        let mut buf = vec![Complex64::ZERO; k];
        for &base in &rests {
            for (i, &off) in combos.iter().enumerate() {
                buf[i] = self.amps[base + off];
            }
            for (row, &off) in combos.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for col in 0..k {
                    acc += mat[(row, col)] * buf[col];
                }
                out[base + off] = acc;
            }
        }
        Ok(Self { amps: out, dims: self.dims.clone() })
    }

    /// Projective measurement of the listed factors in an orthonormal basis
    /// of their joint space.
    ///
    /// Returns one entry per outcome with conditional probability above the
    /// pruning threshold. Post-states keep the full factor structure with the
    /// measured factors collapsed onto the firing basis vector, renormalized,
    /// and phase-fixed so the leading nonzero amplitude is real nonnegative.
    pub fn measure_projective(
        &self,
        factors: &[usize],
        basis: &[Vec<Complex64>],
    ) -> Result<Vec<MeasureOutcome>> {
        self.check_factors(factors)?;
        let k: usize = factors.iter().map(|&f| self.dims[f]).product();
        if basis.len() != k {
            return Err(LsmError::InvalidArgument(format!(
                "basis has {} vectors but the measured space has dimension {k}",
                basis.len()
            )));
        }
        for (i, v) in basis.iter().enumerate() {
            if v.len() != k {
                return Err(LsmError::InvalidArgument(format!(
                    "basis vector {i} has length {} but dimension is {k}",
                    v.len()
                )));
            }
            for (j, w) in basis.iter().enumerate() {
                let ip: Complex64 = v.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (ip - Complex64::new(expect, 0.0)).norm() > TOL_NORM {
                    return Err(LsmError::InvalidArgument(format!(
                        "basis is not orthonormal: ⟨b{i}|b{j}⟩ = {ip}"
                    )));
                }
            }
        }

        let combos = self.offsets_over(factors);
        let rests = self.offsets_over(&self.complement(factors));
        let mut outcomes = Vec::new();
        let mut total_p = 0.0;
        for (m, b) in basis.iter().enumerate() {
            // coeff[rest] = ⟨b_m | ψ⟩ over the measured factors
            let mut coeff = vec![Complex64::ZERO; rests.len()];
            for (r, &base) in rests.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for (c, &off) in combos.iter().enumerate() {
                    acc += b[c].conj() * self.amps[base + off];
                }
                coeff[r] = acc;
            }
            let p: f64 = coeff.iter().map(|c| c.norm_sqr()).sum();
            total_p += p;
            if p < PRUNE_PROBABILITY {
                continue;
            }
            let scale = 1.0 / p.sqrt();
            let mut post = vec![Complex64::ZERO; self.amps.len()];
            for (r, &base) in rests.iter().enumerate() {
                for (c, &off) in combos.iter().enumerate() {
                    post[base + off] = b[c] * coeff[r] * scale;
                }
            }
            fix_global_phase(&mut post);
            outcomes.push(MeasureOutcome {
                outcome: m,
                probability: p,
                post: Self { amps: post, dims: self.dims.clone() },
            });
        }
        if (total_p - 1.0).abs() > TOL_NORM {
            return Err(LsmError::InvalidArgument(format!(
                "measurement outcome probabilities sum to {total_p}, basis incomplete"
            )));
        }
        Ok(outcomes)
    }

    /// Reorders factors. `perm[new_position] = old_factor_index`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        if perm.len() != n {
            return Err(LsmError::InvalidArgument(format!(
                "permutation has length {} but state has {n} factors",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(LsmError::InvalidArgument("not a permutation of the factors".into()));
            }
            seen[p] = true;
        }
        let new_dims: Vec<usize> = perm.iter().map(|&o| self.dims[o]).collect();
        let old_strides = self.strides();
        let new_strides = strides_of(&new_dims);
        let mut out = vec![Complex64::ZERO; self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            let mut new_idx = 0;
            for (pos, &old_f) in perm.iter().enumerate() {
                let digit = (idx / old_strides[old_f]) % self.dims[old_f];
                new_idx += digit * new_strides[pos];
            }
            out[new_idx] = a;
        }
        Ok(Self { amps: out, dims: new_dims })
    }

    /// Reinterprets the factor structure without touching amplitudes. The new
    /// dims must multiply to the same total dimension and must refine or
    /// coarsen along the same row-major nesting.
    pub fn reinterpret_dims(&self, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.amps.len() || dims.iter().any(|&d| d < 2) {
            return Err(LsmError::InvalidArgument(format!(
                "cannot reinterpret total dimension {} as {dims:?}",
                self.amps.len()
            )));
        }
        Ok(Self { amps: self.amps.clone(), dims })
    }

    /// Schmidt coefficients across a bipartition, descending. Their squares
    /// sum to one.
    pub fn schmidt_coefficients(&self, cut: &Bipartition) -> Result<Vec<f64>> {
        let m = self.cut_matrix(cut)?;
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv.retain(|&s| s > 1e-15);
        Ok(sv)
    }

    /// Von Neumann entropy (base-2) of the reduced state on the cut's left
    /// side, i.e. the entanglement across the cut in ebits.
    pub fn entanglement_entropy(&self, cut: &Bipartition) -> Result<f64> {
        let sv = self.schmidt_coefficients(cut)?;
        let mut s = 0.0;
        for lambda in sv {
            let l2 = (lambda * lambda).min(1.0);
            if l2 > 0.0 {
                s -= l2 * l2.log2();
            }
        }
        Ok(s.max(0.0))
    }

    /// The state reshaped to a (left × right) matrix, with rows of negligible
    /// norm dropped (they do not contribute singular values).
    fn cut_matrix(&self, cut: &Bipartition) -> Result<DMatrix<Complex64>> {
        for &f in cut.left().iter().chain(cut.right()) {
            if f >= self.dims.len() {
                return Err(LsmError::InvalidArgument(format!(
                    "cut factor {f} out of range for {} factors",
                    self.dims.len()
                )));
            }
        }
        if cut.left().len() + cut.right().len() != self.dims.len() {
            return Err(LsmError::InvalidArgument(
                "bipartition does not cover all factors of the state".into(),
            ));
        }
        let perm: Vec<usize> = cut.left().iter().chain(cut.right()).copied().collect();
        let reordered = self.permute_factors(&perm)?;
        let d_left: usize = cut.left().iter().map(|&f| self.dims[f]).product();
        let d_right = self.amps.len() / d_left;
        let mut rows: Vec<usize> = Vec::new();
        for r in 0..d_left {
            let norm_sq: f64 =
                reordered.amps[r * d_right..(r + 1) * d_right].iter().map(|a| a.norm_sqr()).sum();
            if norm_sq > 1e-26 {
                rows.push(r);
            }
        }
        Ok(DMatrix::from_fn(rows.len(), d_right, |i, j| reordered.amps[rows[i] * d_right + j]))
    }

    /// If the listed factors are jointly disentangled from the rest, returns
    /// their joint state vector (phase-fixed); otherwise `None`.
    pub fn factor_state(&self, factors: &[usize]) -> Result<Option<Vec<Complex64>>> {
        self.check_factors(factors)?;
        if factors.len() == self.dims.len() {
            // reorder to the listed factor order
            let mut v = self.permute_factors(factors)?.amps;
            fix_global_phase(&mut v);
            return Ok(Some(v));
        }
        let k: usize = factors.iter().map(|&f| self.dims[f]).product();
        let combos = self.offsets_over(factors);
        let rests = self.offsets_over(&self.complement(factors));
        let m = DMatrix::from_fn(k, rests.len(), |i, j| self.amps[rests[j] + combos[i]]);
        let svd = m.svd(true, false);
        let mut top = 0;
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s > svd.singular_values[top] {
                top = i;
            }
        }
        if 1.0 - svd.singular_values[top] > TOL_NORM {
            return Ok(None);
        }
        let u = svd.u.as_ref().expect("u requested");
        let mut v: Vec<Complex64> = (0..k).map(|i| u[(i, top)]).collect();
        fix_global_phase(&mut v);
        Ok(Some(v))
    }

    /// True when every single factor is disentangled from the rest.
    pub fn is_fully_product(&self) -> bool {
        if self.dims.len() == 1 {
            return true;
        }
        (0..self.dims.len()).all(|f| matches!(self.factor_state(&[f]), Ok(Some(_))))
    }
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

/// Rotates a vector's global phase so the leading nonzero amplitude is real
/// and nonnegative. Verdicts never depend on global phase; this only keeps
/// reports and comparisons deterministic.
pub fn fix_global_phase(amps: &mut [Complex64]) {
    if let Some(lead) = amps.iter().find(|a| a.norm() > 1e-12) {
        let phase = lead.conj() / lead.norm();
        for a in amps.iter_mut() {
            *a *= phase;
        }
    }
}

/// Tensor product of the given states, dims concatenated in order.
pub fn tensor(parts: &[&PureState]) -> Result<PureState> {
    if parts.is_empty() {
        return Err(LsmError::InvalidArgument("tensor of an empty list".into()));
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    let mut dims = Vec::new();
    for p in parts {
        let mut next = Vec::with_capacity(amps.len() * p.amps.len());
        for &a in &amps {
            for &b in &p.amps {
                next.push(a * b);
            }
        }
        amps = next;
        dims.extend_from_slice(&p.dims);
    }
    PureState::new(amps, dims)
}

/// One of the four Bell states on two qubit factors, in `(A, B)` order.
pub fn bell_state(kind: BellKind) -> PureState {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::ZERO;
    let amps = match kind {
        BellKind::PhiPlus => vec![h, z, z, h],
        BellKind::PhiMinus => vec![h, z, z, -h],
        BellKind::PsiPlus => vec![z, h, h, z],
        BellKind::PsiMinus => vec![z, h, -h, z],
    };
    PureState { amps, dims: vec![2, 2] }
}

/// The four Bell vectors in `BellKind::ALL` order, as a measurement basis on
/// two qubits.
pub fn bell_basis_vectors() -> Vec<Vec<Complex64>> {
    BellKind::ALL.iter().map(|&k| bell_state(k).amps).collect()
}

/// The bipartite maximally entangled state `(1/√d) Σ_i |ii⟩` on dims `[d, d]`.
pub fn ghz_plus(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(LsmError::InvalidArgument(format!(
            "maximally entangled pair needs dimension ≥ 2, got {d}"
        )));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    Ok(PureState { amps, dims: vec![d, d] })
}

/// `|ψ⟩ == e^{iθ}|φ⟩` for some θ, within tolerance.
pub fn equal_up_to_phase(a: &PureState, b: &PureState, tol: f64) -> bool {
    a.dims == b.dims && a.fidelity(b).map(|f| (f - 1.0).abs() <= tol).unwrap_or(false)
}
