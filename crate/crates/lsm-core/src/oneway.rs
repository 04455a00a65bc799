//! Numerical feasibility search for one-way-LOCC distinguishability of
//! ensembles `{(U_k ⊗ I)|φ₀(d)⟩}`.
//!
//! Such an ensemble is one-way distinguishable iff some unit vector `χ` makes
//! `{U_k χ}` orthonormal. We minimize the smooth objective
//! `f(χ) = Σ_{i<j} |⟨χ|U_i†U_j|χ⟩|²` over the unit sphere by projected
//! gradient descent with backtracking line search and random restarts. A
//! minimum at (numerical) zero is a feasibility witness; failure to find one
//! is a heuristic certificate only — random-restart local optimization cannot
//! prove infeasibility.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::qcore::{kron_all, UnitaryOp};
use crate::TOL_NORM;

/// Objective values at or below this count as a feasibility witness.
pub const TOL_FEASIBLE: f64 = 1e-10;
/// Descent stops when the tangent gradient norm falls below this.
pub const GRAD_TOL: f64 = 1e-12;
/// Iteration cap per restart.
pub const MAX_ITERS: usize = 10_000;

/// A set of same-dimension unitaries defining the Gram feasibility problem.
#[derive(Clone, Debug)]
pub struct GramSearchProblem {
    unitaries: Vec<UnitaryOp>,
}

impl GramSearchProblem {
    pub fn new(unitaries: Vec<UnitaryOp>) -> Result<Self> {
        if unitaries.len() < 2 {
            return Err(LsmError::InvalidArgument(
                "a Gram feasibility problem needs at least two unitaries".into(),
            ));
        }
        let d = unitaries[0].dim();
        if unitaries.iter().any(|u| u.dim() != d) {
            return Err(LsmError::InvalidArgument("unitaries differ in dimension".into()));
        }
        Ok(Self { unitaries })
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    pub fn unitaries(&self) -> &[UnitaryOp] {
        &self.unitaries
    }

    /// The pair operators `U_i† U_j` for `i < j`.
    fn pair_matrices(&self) -> Vec<DMatrix<Complex64>> {
        let n = self.unitaries.len();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push(
                    self.unitaries[i].matrix().adjoint() * self.unitaries[j].matrix(),
                );
            }
        }
        pairs
    }
}

/// The six Pauli-tensor unitaries generating all orderings of the first
/// three Bell states from three shared `phi+` pairs, in the fixed problem
/// order `(1,2,3) (1,3,2) (2,3,1) (2,1,3) (3,1,2) (3,2,1)`.
pub fn bell_triple_unitaries() -> GramSearchProblem {
    let i2 = UnitaryOp::identity(2);
    let x = UnitaryOp::pauli_x();
    let z = UnitaryOp::pauli_z();
    let triple = |a: &UnitaryOp, b: &UnitaryOp, c: &UnitaryOp| kron_all(&[a, b, c]).unwrap();
    GramSearchProblem::new(vec![
        triple(&i2, &z, &x),
        triple(&i2, &x, &z),
        triple(&z, &x, &i2),
        triple(&z, &i2, &x),
        triple(&x, &i2, &z),
        triple(&x, &z, &i2),
    ])
    .expect("static problem")
}

/// Indices into the lexicographic 3-permutation ensemble matching the fixed
/// unitary order above.
pub fn bell_triple_permutation_indices() -> [usize; 6] {
    [0, 1, 3, 2, 4, 5]
}

/// Two-unitary control problem `{I, σ}`; `z` has witness `|+⟩`, `x` has
/// witness `|0⟩`.
pub fn pauli_control_problem(axis: char) -> Result<GramSearchProblem> {
    let sigma = match axis {
        'z' => UnitaryOp::pauli_z(),
        'x' => UnitaryOp::pauli_x(),
        other => {
            return Err(LsmError::InvalidArgument(format!(
                "control problem axis must be 'x' or 'z', got {other:?}"
            )))
        }
    };
    GramSearchProblem::new(vec![UnitaryOp::identity(2), sigma])
}

fn check_dim(chi: &[Complex64], prob: &GramSearchProblem) -> Result<()> {
    if chi.len() != prob.dim() {
        return Err(LsmError::InvalidArgument(format!(
            "vector has dimension {} but problem has {}",
            chi.len(),
            prob.dim()
        )));
    }
    Ok(())
}

/// The objective as a polynomial in the coordinates, defined for any vector.
/// Finite-difference oracles probe it off the unit sphere.
pub fn raw_objective(chi: &[Complex64], prob: &GramSearchProblem) -> Result<f64> {
    check_dim(chi, prob)?;
    Ok(prob.pair_matrices().iter().map(|m| pair_term(chi, m).norm_sqr()).sum())
}

fn pair_term(chi: &[Complex64], m: &DMatrix<Complex64>) -> Complex64 {
    let d = chi.len();
    let mut acc = Complex64::ZERO;
    for r in 0..d {
        let mut row = Complex64::ZERO;
        for c in 0..d {
            row += m[(r, c)] * chi[c];
        }
        acc += chi[r].conj() * row;
    }
    acc
}

/// `f(χ) = Σ_{i<j} |⟨χ|U_i†U_j|χ⟩|²` for a unit vector `χ`. Zero exactly when
/// `{U_k χ}` is orthonormal.
pub fn gram_objective(chi: &[Complex64], prob: &GramSearchProblem) -> Result<f64> {
    check_dim(chi, prob)?;
    let norm: f64 = chi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > TOL_NORM {
        return Err(LsmError::InvalidArgument(format!("χ must be a unit vector, ‖χ‖ = {norm}")));
    }
    raw_objective(chi, prob)
}

fn euclidean_gradient(chi: &[Complex64], pairs: &[DMatrix<Complex64>]) -> Vec<Complex64> {
    let d = chi.len();
    let mut grad = vec![Complex64::ZERO; d];
    for m in pairs {
        let g = pair_term(chi, m);
        // ∂f/∂χ̄ = ḡ·Mχ + g·M†χ; Euclidean gradient on R^{2d} is twice that.
        for r in 0..d {
            let mut mx = Complex64::ZERO;
            let mut mdx = Complex64::ZERO;
            for c in 0..d {
                mx += m[(r, c)] * chi[c];
                mdx += m[(c, r)].conj() * chi[c];
            }
            grad[r] += 2.0 * (g.conj() * mx + g * mdx);
        }
    }
    grad
}

fn project_tangent(chi: &[Complex64], grad: &mut [Complex64]) {
    let radial: f64 = chi.iter().zip(grad.iter()).map(|(x, g)| (x.conj() * g).re).sum();
    for (g, x) in grad.iter_mut().zip(chi) {
        *g -= radial * x;
    }
}

/// Euclidean gradient of the objective projected onto the tangent space of
/// the unit sphere at `χ` (real inner product on the 2d real coordinates).
pub fn gram_gradient(chi: &[Complex64], prob: &GramSearchProblem) -> Result<Vec<Complex64>> {
    check_dim(chi, prob)?;
    let norm: f64 = chi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > TOL_NORM {
        return Err(LsmError::InvalidArgument(format!("χ must be a unit vector, ‖χ‖ = {norm}")));
    }
    let mut grad = euclidean_gradient(chi, &prob.pair_matrices());
    project_tangent(chi, &mut grad);
    Ok(grad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchVerdict {
    /// A witness with objective at or below the feasibility tolerance exists.
    Feasible,
    /// No restart reached the tolerance. Heuristic evidence only.
    NoWitnessFound,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub feasibility_tol: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl SearchConfig {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            feasibility_tol: TOL_FEASIBLE,
            grad_tol: GRAD_TOL,
            max_iters: MAX_ITERS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GramSearchResult {
    pub verdict: SearchVerdict,
    /// The best point found over all restarts (a witness when feasible).
    pub best_chi: Vec<Complex64>,
    pub best_objective: f64,
    pub restarts: usize,
    pub per_restart_minima: Vec<f64>,
}

/// Projected gradient descent with backtracking from uniformly random unit
/// starts. Restarts are independent (the seeded generator is split per
/// restart) and run in parallel; results are bit-for-bit deterministic for a
/// fixed `(problem, restarts, seed)`.
pub fn search_witness(prob: &GramSearchProblem, cfg: &SearchConfig) -> Result<GramSearchResult> {
    if cfg.restarts < 1 {
        return Err(LsmError::InvalidArgument("at least one restart is required".into()));
    }
    let pairs = prob.pair_matrices();
    let d = prob.dim();
    let runs: Vec<(f64, Vec<Complex64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64 + 1);
            let start = random_unit(&mut rng, d);
            descend(start, &pairs, cfg)
        })
        .collect();
    let per_restart_minima: Vec<f64> = runs.iter().map(|(f, _)| *f).collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, (fa, _)), (ib, (fb, _))| fa.partial_cmp(fb).unwrap().then(ia.cmp(ib)))
        .map(|(_, run)| run)
        .expect("restarts ≥ 1");
    let verdict = if best.0 <= cfg.feasibility_tol {
        SearchVerdict::Feasible
    } else {
        SearchVerdict::NoWitnessFound
    };
    Ok(GramSearchResult {
        verdict,
        best_chi: best.1.clone(),
        best_objective: best.0,
        restarts: cfg.restarts,
        per_restart_minima,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [Complex64]) {
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in v.iter_mut() {
        *a /= norm;
    }
}

fn objective(chi: &[Complex64], pairs: &[DMatrix<Complex64>]) -> f64 {
    pairs.iter().map(|m| pair_term(chi, m).norm_sqr()).sum()
}

fn descend(
    mut x: Vec<Complex64>,
    pairs: &[DMatrix<Complex64>],
    cfg: &SearchConfig,
) -> (f64, Vec<Complex64>) {
    const ARMIJO: f64 = 1e-4;
    let mut fx = objective(&x, pairs);
    let mut step = 1.0f64;
    for _ in 0..cfg.max_iters {
        let mut g = euclidean_gradient(&x, pairs);
        project_tangent(&x, &mut g);
        let g_norm_sq: f64 = g.iter().map(|a| a.norm_sqr()).sum();
        if g_norm_sq.sqrt() <= cfg.grad_tol {
            break;
        }
        step = (step * 2.0).min(1.0);
        let mut accepted = false;
        while step >= 1e-18 {
            let mut trial: Vec<Complex64> =
                x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            normalize(&mut trial);
            let f_trial = objective(&trial, pairs);
            if f_trial <= fx - ARMIJO * step * g_norm_sq {
                x = trial;
                fx = f_trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (fx, x)
}

#[derive(Serialize, Deserialize)]
struct UnitaryDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct ProblemDto {
    unitaries: Vec<UnitaryDto>,
}

/// Serializes a problem to JSON (matrices as `[re, im]` pair grids).
pub fn problem_to_json(prob: &GramSearchProblem) -> String {
    let dto = ProblemDto {
        unitaries: prob
            .unitaries
            .iter()
            .map(|u| UnitaryDto {
                label: None,
                matrix: (0..u.dim())
                    .map(|i| (0..u.dim()).map(|j| {
                        let c = u.matrix()[(i, j)];
                        [c.re, c.im]
                    }).collect())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&dto).expect("problem serialization")
}

/// Parses a problem from JSON, revalidating unitarity.
pub fn problem_from_json(text: &str) -> Result<GramSearchProblem> {
    let dto: ProblemDto =
        serde_json::from_str(text).map_err(|e| LsmError::Malformed(e.to_string()))?;
    let unitaries = dto
        .unitaries
        .iter()
        .map(|u| {
            let rows: Vec<Vec<Complex64>> = u
                .matrix
                .iter()
                .map(|r| r.iter().map(|p| Complex64::new(p[0], p[1])).collect())
                .collect();
            UnitaryOp::from_rows(&rows)
        })
        .collect::<Result<Vec<_>>>()?;
    GramSearchProblem::new(unitaries)
}
