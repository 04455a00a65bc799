use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LsmError, Result};
use crate::TOL_NORM;

/// A square complex matrix verified unitary at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    matrix: DMatrix<Complex64>,
}

impl UnitaryOp {
    /// Wraps a matrix, checking `U† U = I` entrywise within the norm tolerance.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(LsmError::InvalidArgument(format!(
                "unitary must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let d = matrix.nrows();
        let gram = matrix.adjoint() * &matrix;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::ZERO };
                if (gram[(i, j)] - expect).norm() > TOL_NORM {
                    return Err(LsmError::InvalidArgument(format!(
                        "matrix is not unitary: (U†U)[{i},{j}] = {}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    /// Builds from row-major nested vectors.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LsmError::InvalidArgument(
                "unitary rows must form a square matrix".into(),
            ));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: DMatrix::identity(d, d) }
    }

    pub fn pauli_x() -> Self {
        let o = Complex64::ZERO;
        let l = Complex64::new(1.0, 0.0);
        Self { matrix: DMatrix::from_row_slice(2, 2, &[o, l, l, o]) }
    }

    pub fn pauli_z() -> Self {
        let o = Complex64::ZERO;
        let l = Complex64::new(1.0, 0.0);
        Self { matrix: DMatrix::from_row_slice(2, 2, &[l, o, o, -l]) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(LsmError::InvalidArgument(format!(
                "cannot compose unitaries of dims {} and {}",
                self.dim(),
                rhs.dim()
            )));
        }
        Ok(Self { matrix: &self.matrix * &rhs.matrix })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self { matrix: self.matrix.kronecker(&rhs.matrix) }
    }
}

/// Kronecker product of a list of unitaries, left to right.
pub fn kron_all(ops: &[&UnitaryOp]) -> Result<UnitaryOp> {
    let mut iter = ops.iter();
    let first = iter.next().ok_or_else(|| {
        LsmError::InvalidArgument("kron_all requires at least one operand".into())
    })?;
    let mut acc = (*first).clone();
    for op in iter {
        acc = acc.kron(op);
    }
    Ok(acc)
}
