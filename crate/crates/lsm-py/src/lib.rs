//! Python bindings for the local-state-marking simulator.
//!
//! Exposes dense pure states with their core operations, the built-in state
//! sets, the marking verifications, and the one-way feasibility search.
//! Aggregate results come back as JSON strings with the same schema the CLI
//! reports use.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lsm_core::ensembles;
use lsm_core::locc::Basis;
use lsm_core::oneway;
use lsm_core::qcore;
use lsm_core::LsmError;

fn err(e: LsmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A normalized dense state vector over an ordered list of tensor factors.
#[pyclass(name = "PureState", from_py_object)]
#[derive(Clone)]
struct PyPureState {
    inner: qcore::PureState,
}

#[pymethods]
impl PyPureState {
    /// Build a state from raw amplitudes (row-major over `dims`).
    #[new]
    fn new(amps: Vec<Complex64>, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: qcore::PureState::new(amps, dims).map_err(err)? })
    }

    /// One of the four Bell states: "phi+", "phi-", "psi+", "psi-".
    #[staticmethod]
    fn bell(kind: &str) -> PyResult<Self> {
        Ok(Self { inner: qcore::bell_state(qcore::BellKind::parse(kind).map_err(err)?) })
    }

    /// The maximally entangled pair `(1/√d) Σ |ii⟩` on dims `[d, d]`.
    #[staticmethod]
    fn maximally_entangled(d: usize) -> PyResult<Self> {
        Ok(Self { inner: qcore::ghz_plus(d).map_err(err)? })
    }

    /// Computational basis state `|index⟩` over the given factor dims.
    #[staticmethod]
    fn basis(dims: Vec<usize>, index: usize) -> PyResult<Self> {
        Ok(Self { inner: qcore::PureState::basis_state(dims, index).map_err(err)? })
    }

    /// Tensor product of the given states, dims concatenated.
    #[staticmethod]
    fn tensor(parts: Vec<PyPureState>) -> PyResult<Self> {
        let refs: Vec<&qcore::PureState> = parts.iter().map(|p| &p.inner).collect();
        Ok(Self { inner: qcore::tensor(&refs).map_err(err)? })
    }

    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amps().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn inner_product(&self, other: &PyPureState) -> PyResult<Complex64> {
        self.inner.inner(&other.inner).map_err(err)
    }

    fn fidelity(&self, other: &PyPureState) -> PyResult<f64> {
        self.inner.fidelity(&other.inner).map_err(err)
    }

    /// Apply a unitary (nested-list matrix) to the listed factors.
    fn apply_unitary(
        &self,
        factors: Vec<usize>,
        matrix: Vec<Vec<Complex64>>,
    ) -> PyResult<Self> {
        let u = qcore::UnitaryOp::from_rows(&matrix).map_err(err)?;
        Ok(Self { inner: self.inner.apply_local_unitary(&factors, &u).map_err(err)? })
    }

    /// Projective measurement of the listed factors in a named basis
    /// ("z", "x", or "bell"). Returns (outcome, probability, post_state)
    /// triples for every outcome above the pruning threshold.
    fn measure(
        &self,
        factors: Vec<usize>,
        basis: &str,
    ) -> PyResult<Vec<(usize, f64, PyPureState)>> {
        let named = match basis {
            "z" => Basis::Z,
            "x" => Basis::X,
            "bell" => Basis::Bell,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown basis {other:?}; expected z, x, or bell"
                )))
            }
        };
        if let Some(&f) = factors.iter().find(|&&f| f >= self.inner.num_factors()) {
            return Err(PyValueError::new_err(format!(
                "factor {f} out of range for {} factors",
                self.inner.num_factors()
            )));
        }
        let dim: usize = factors.iter().map(|&f| self.inner.dims()[f]).product();
        let vectors = named.vectors(dim).map_err(err)?;
        let outcomes = self.inner.measure_projective(&factors, &vectors).map_err(err)?;
        Ok(outcomes
            .into_iter()
            .map(|o| (o.outcome, o.probability, Self { inner: o.post }))
            .collect())
    }

    /// Entanglement entropy in ebits across `left` versus the rest.
    fn entropy(&self, left: Vec<usize>) -> PyResult<f64> {
        let cut = qcore::Bipartition::new(left, self.inner.num_factors()).map_err(err)?;
        self.inner.entanglement_entropy(&cut).map_err(err)
    }

    /// Descending Schmidt coefficients across `left` versus the rest.
    fn schmidt_coefficients(&self, left: Vec<usize>) -> PyResult<Vec<f64>> {
        let cut = qcore::Bipartition::new(left, self.inner.num_factors()).map_err(err)?;
        self.inner.schmidt_coefficients(&cut).map_err(err)
    }

    /// Reorder factors; `perm[new_position] = old_factor`.
    fn permute(&self, perm: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.permute_factors(&perm).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("PureState(dims={:?}, dim={})", self.inner.dims(), self.inner.total_dim())
    }
}

/// Members of a built-in state set: "x4", "b4", "b3", or "product4".
#[pyfunction]
fn set_states(name: &str) -> PyResult<Vec<PyPureState>> {
    let set = match name {
        "x4" => ensembles::x4_set(),
        "b4" => ensembles::bell_basis_set(),
        "b3" => ensembles::b3_set(),
        "product4" => ensembles::product_basis_set(),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown set {other:?}; expected x4, b4, b3, or product4"
            )))
        }
    }
    .map_err(err)?;
    Ok(set.states().iter().map(|s| PyPureState { inner: s.clone() }).collect())
}

/// Run a built-in marking verification ("x4", "b4-catalytic",
/// "b3-catalytic") and return the full JSON report.
#[pyfunction]
fn verify_builtin(name: &str) -> PyResult<String> {
    let result = lsm_core::report::run_builtin_verification(name).map_err(err)?;
    serde_json::to_string(&result).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Run the one-way feasibility search on a built-in problem ("bell-triple",
/// "pauli-z", "pauli-x") and return the JSON result.
#[pyfunction]
#[pyo3(signature = (problem, restarts=50, seed=7))]
fn search_oneway(problem: &str, restarts: usize, seed: u64) -> PyResult<String> {
    let prob = match problem {
        "bell-triple" => oneway::bell_triple_unitaries(),
        "pauli-z" => oneway::pauli_control_problem('z').map_err(err)?,
        "pauli-x" => oneway::pauli_control_problem('x').map_err(err)?,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown problem {other:?}; expected bell-triple, pauli-z, or pauli-x"
            )))
        }
    };
    let result =
        oneway::search_witness(&prob, &oneway::SearchConfig::new(restarts, seed)).map_err(err)?;
    let dto = lsm_core::report::SearchResult::from(&result);
    serde_json::to_string(&dto).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Sufficient unmarkability condition for `k` maximally entangled states of
/// local dimension `d`: true iff `k! > d^k`.
#[pyfunction]
fn unmarkable_by_counting(k: usize, d: usize) -> PyResult<bool> {
    ensembles::unmarkable_by_counting(k, d).map_err(err)
}

/// `(discrimination_rate, marking_rate)` in bits per qudit for an ensemble
/// of `n` states when discrimination needs `k` copies.
#[pyfunction]
fn rates(n: usize, d: usize, k: usize) -> PyResult<(f64, f64)> {
    let r = ensembles::rate_compare(n, d, k).map_err(err)?;
    Ok((r.lsd_rate, r.lsm_rate))
}

/// Number of ordered m-tuples of distinct members from a set of k.
#[pyfunction]
fn permutation_ensemble_size(k: usize, m: usize) -> PyResult<usize> {
    if m < 1 || m > k {
        return Err(PyValueError::new_err(format!("need 1 ≤ m ≤ {k}, got {m}")));
    }
    Ok(((k - m + 1)..=k).product())
}

#[pymodule]
fn lsm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPureState>()?;
    m.add_function(wrap_pyfunction!(set_states, m)?)?;
    m.add_function(wrap_pyfunction!(verify_builtin, m)?)?;
    m.add_function(wrap_pyfunction!(search_oneway, m)?)?;
    m.add_function(wrap_pyfunction!(unmarkable_by_counting, m)?)?;
    m.add_function(wrap_pyfunction!(rates, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_ensemble_size, m)?)?;
    Ok(())
}
