//! Dense complex linear algebra for multi-qubit operators and states.
//!
//! Qubit 0 is the left-most Kronecker factor, i.e. the most significant bit
//! of a basis-state index. Every other module relies on this ordering.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                expected: "non-empty matrix matching its data length",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a square matrix from row slices. Panics on ragged input, so it
    /// is meant for literal constants.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self {
            rows: N,
            cols: N,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![ONE; dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Column vector.
    pub fn column(entries: &[C64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut data = Vec::with_capacity(a.len() * b.len());
        for &x in a {
            data.extend(b.iter().map(|y| x * y.conj()));
        }
        Self {
            rows: a.len(),
            cols: b.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.dims(),
                right: other.dims(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for j in 0..self.cols {
                    let a = self.data[i * self.cols + j];
                    data.extend(
                        other.data[k * other.cols..(k + 1) * other.cols]
                            .iter()
                            .map(|&b| a * b),
                    );
                }
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                op: "add",
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.dims() != other.dims() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let product = self
            .matmul(&self.dagger())
            .expect("square matrix times its adjoint");
        product.max_abs_diff(&ComplexMatrix::identity(self.rows)) <= tol
    }

    /// Eigenvalues of the Hermitian part ½(A + A†), ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::BadShape {
                rows: self.rows,
                cols: self.cols,
                expected: "square matrix",
            });
        }
        // Sparse density matrices leave long runs of zero diagonal and
        // ~1e-160 off-diagonal entries after tridiagonalization; nalgebra's
        // relative deflation test never fires on those and the QR sweep
        // returns NaN. Shifting by 2‖H‖_F makes H positive definite so every
        // diagonal entry is large and the tail deflates at once.
        let n = self.rows;
        let herm = DMatrix::from_fn(n, n, |i, j| {
            (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5
        });
        let shift = 2.0 * herm.norm();
        let shifted = &herm + DMatrix::from_diagonal_element(n, n, C64::new(shift, 0.0));
        let mut values: Vec<f64> = SymmetricEigen::new(shifted)
            .eigenvalues
            .iter()
            .map(|v| v - shift)
            .collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])
}

/// Checks that `targets` are distinct and below `num_qubits`.
pub(crate) fn validate_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: t,
                num_qubits,
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateQubit(t));
        }
    }
    Ok(())
}

/// Index bookkeeping for a k-qubit operator acting on chosen qubits of an
/// m-qubit index space. `offsets[s]` is the bit pattern placed into a full
/// index for local index `s`; the first target is the most significant local bit.
pub(crate) struct LocalAction {
    mask: usize,
    offsets: Vec<usize>,
    dim: usize,
}

impl LocalAction {
    pub(crate) fn new(targets: &[usize], num_qubits: usize) -> Self {
        let k = targets.len();
        let bits: Vec<usize> = targets.iter().map(|&q| 1 << (num_qubits - 1 - q)).collect();
        let offsets = (0..1usize << k)
            .map(|s| {
                bits.iter()
                    .enumerate()
                    .filter(|(t, _)| s >> (k - 1 - t) & 1 == 1)
                    .map(|(_, b)| b)
                    .sum()
            })
            .collect();
        Self {
            mask: bits.iter().sum(),
            offsets,
            dim: 1 << num_qubits,
        }
    }

    fn bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |i| i & self.mask == 0)
    }

    /// `data` is a row-major `dim x ncols` block; applies `op` to the row index.
    pub(crate) fn apply_rows(&self, op: &ComplexMatrix, data: &mut [C64], ncols: usize) {
        let local = self.offsets.len();
        let mut gathered = vec![ZERO; local];
        for base in self.bases() {
            for c in 0..ncols {
                for (g, off) in gathered.iter_mut().zip(&self.offsets) {
                    *g = data[(base | off) * ncols + c];
                }
                for (s, off) in self.offsets.iter().enumerate() {
                    let row = &op.data[s * local..(s + 1) * local];
                    data[(base | off) * ncols + c] =
                        row.iter().zip(&gathered).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// Right-multiplies a row-major `nrows x dim` block by `op†`.
    pub(crate) fn apply_cols_adjoint(&self, op: &ComplexMatrix, data: &mut [C64], nrows: usize) {
        let local = self.offsets.len();
        let mut gathered = vec![ZERO; local];
        for r in 0..nrows {
            let row_data = &mut data[r * self.dim..(r + 1) * self.dim];
            for base in (0..self.dim).filter(|i| i & self.mask == 0) {
                for (g, off) in gathered.iter_mut().zip(&self.offsets) {
                    *g = row_data[base | off];
                }
                for (s, off) in self.offsets.iter().enumerate() {
                    let op_row = &op.data[s * local..(s + 1) * local];
                    row_data[base | off] = op_row
                        .iter()
                        .zip(&gathered)
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                }
            }
        }
    }
}

/// Health report for a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDiagnostics {
    /// |tr ρ − 1|
    pub trace_deviation: f64,
    /// max |ρ − ρ†|
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub const TRACE_TOL: f64 = 1e-12;
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = -1e-10;

    pub fn is_valid(&self) -> bool {
        self.trace_deviation <= Self::TRACE_TOL
            && self.hermiticity_deviation <= Self::HERMITIAN_TOL
            && self.min_eigenvalue >= Self::PSD_TOL
    }
}

/// Mixed state of `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// |index⟩⟨index| on `num_qubits` qubits.
    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let dim = 1 << num_qubits;
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        matrix.set(index, index, ONE);
        Self { num_qubits, matrix }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self {
            num_qubits,
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        Ok(Self {
            num_qubits,
            matrix: ComplexMatrix::outer(amplitudes, amplitudes),
        })
    }

    /// Wraps a square 2^m matrix and verifies trace, Hermiticity and positivity.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        let diag = rho.check();
        if !diag.is_valid() {
            return Err(Error::BadShape {
                rows: rho.matrix.rows,
                cols: rho.matrix.cols,
                expected: "valid density matrix (unit trace, Hermitian, PSD)",
            });
        }
        Ok(rho)
    }

    /// Wraps a square 2^m matrix without checking physical validity.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::BadShape {
                rows: matrix.rows,
                cols: matrix.cols,
                expected: "square matrix",
            });
        }
        let num_qubits = qubits_for_dim(matrix.rows)?;
        Ok(Self { num_qubits, matrix })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// ρ ← U ρ U† with `op` acting on `targets`.
    pub fn apply_unitary(&mut self, op: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        self.check_local(op, targets)?;
        let action = LocalAction::new(targets, self.num_qubits);
        let dim = self.dim();
        action.apply_rows(op, self.matrix.as_mut_slice(), dim);
        action.apply_cols_adjoint(op, self.matrix.as_mut_slice(), dim);
        Ok(())
    }

    /// ρ ← Σ K ρ K† with every `K` acting on `targets`.
    pub fn apply_kraus(&mut self, kraus: &[ComplexMatrix], targets: &[usize]) -> Result<()> {
        for k in kraus {
            self.check_local(k, targets)?;
        }
        let action = LocalAction::new(targets, self.num_qubits);
        let dim = self.dim();
        let mut acc = vec![ZERO; dim * dim];
        for k in kraus.iter().filter(|k| k.max_abs() > 0.0) {
            let mut term = self.matrix.as_slice().to_vec();
            action.apply_rows(k, &mut term, dim);
            action.apply_cols_adjoint(k, &mut term, dim);
            for (a, t) in acc.iter_mut().zip(term) {
                *a += t;
            }
        }
        self.matrix.data = acc;
        Ok(())
    }

    fn check_local(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        validate_targets(targets, self.num_qubits)?;
        let local = 1 << targets.len();
        if op.dims() != (local, local) {
            return Err(Error::DimensionMismatch {
                op: "local operator",
                left: op.dims(),
                right: (local, local),
            });
        }
        Ok(())
    }

    /// Reduced state on `keep`, ordered by ascending qubit index.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        validate_targets(keep, self.num_qubits)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        let traced: Vec<usize> = (0..self.num_qubits).filter(|q| !kept.contains(q)).collect();

        let kept_action = LocalAction::new(&kept, self.num_qubits);
        let traced_offsets: Vec<usize> = if traced.is_empty() {
            vec![0]
        } else {
            LocalAction::new(&traced, self.num_qubits).offsets
        };

        let rdim = 1 << kept.len();
        let dim = self.dim();
        let mut out = ComplexMatrix::zeros(rdim, rdim);
        for (r, row_off) in kept_action.offsets.iter().enumerate() {
            for (c, col_off) in kept_action.offsets.iter().enumerate() {
                let sum: C64 = traced_offsets
                    .iter()
                    .map(|t| self.matrix.data[(row_off | t) * dim + (col_off | t)])
                    .sum();
                out.set(r, c, sum);
            }
        }
        Ok(DensityMatrix {
            num_qubits: kept.len(),
            matrix: out,
        })
    }

    /// Real parts of the diagonal: computational-basis outcome probabilities.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    pub fn check(&self) -> StateDiagnostics {
        check_state(self)
    }
}

/// Trace, Hermiticity and positivity diagnostics.
pub fn check_state(rho: &DensityMatrix) -> StateDiagnostics {
    let m = &rho.matrix;
    let trace_deviation = (m.trace() - ONE).norm();
    let hermiticity_deviation = m.max_abs_diff(&m.dagger());
    let min_eigenvalue = m
        .hermitian_eigenvalues()
        .expect("density matrix is square")
        .first()
        .copied()
        .unwrap_or(0.0);
    StateDiagnostics {
        trace_deviation,
        hermiticity_deviation,
        min_eigenvalue,
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::BadShape {
            rows: dim,
            cols: dim,
            expected: "power-of-two dimension",
        });
    }
    Ok(dim.trailing_zeros() as usize)
}
