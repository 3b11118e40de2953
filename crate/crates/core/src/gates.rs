//! Gate unitaries and their embedding into multi-qubit operators.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{
    pauli_x, pauli_y, pauli_z, validate_targets, ComplexMatrix, LocalAction, C64, ONE, ZERO,
};

/// A named gate with its real parameters.
///
/// Two-qubit gates list the control first: `CX` and `CP` act as
/// `|c⟩|t⟩ ↦ …` with the control as the left Kronecker factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    /// √X = ½[[1+i, 1−i], [1−i, 1+i]].
    SX,
    /// diag(e^{−iλ/2}, e^{iλ/2}).
    Rz(f64),
    CX,
    /// diag(1, 1, 1, e^{iλ}).
    CP(f64),
    Swap,
}

impl Gate {
    pub const NAMES: &'static str = "I, X, Y, Z, H, SX, Rz, CX, CP, SWAP";

    pub fn name(&self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::SX => "SX",
            Gate::Rz(_) => "Rz",
            Gate::CX => "CX",
            Gate::CP(_) => "CP",
            Gate::Swap => "SWAP",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::CX | Gate::CP(_) | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Gate::Rz(l) | Gate::CP(l) => vec![l],
            _ => Vec::new(),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let h = 0.5;
        match *self {
            Gate::I => ComplexMatrix::identity(2),
            Gate::X => pauli_x(),
            Gate::Y => pauli_y(),
            Gate::Z => pauli_z(),
            Gate::H => {
                let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::from_rows([[s, s], [s, -s]])
            }
            Gate::SX => ComplexMatrix::from_rows([
                [C64::new(h, h), C64::new(h, -h)],
                [C64::new(h, -h), C64::new(h, h)],
            ]),
            Gate::Rz(l) => ComplexMatrix::from_diagonal(&[
                C64::from_polar(1.0, -l / 2.0),
                C64::from_polar(1.0, l / 2.0),
            ]),
            Gate::CX => ComplexMatrix::from_rows([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ONE, ZERO, ZERO],
                [ZERO, ZERO, ZERO, ONE],
                [ZERO, ZERO, ONE, ZERO],
            ]),
            Gate::CP(l) => ComplexMatrix::from_diagonal(&[ONE, ONE, ONE, C64::from_polar(1.0, l)]),
            Gate::Swap => ComplexMatrix::from_rows([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ZERO, ONE, ZERO],
                [ZERO, ONE, ZERO, ZERO],
                [ZERO, ZERO, ZERO, ONE],
            ]),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rz(l) | Gate::CP(l) => write!(f, "{}({})", self.name(), l),
            _ => f.write_str(self.name()),
        }
    }
}

/// Looks up a gate by name (case-insensitive) and checks its parameter count.
pub fn standard_gate(name: &str, params: &[f64]) -> Result<Gate> {
    let upper = name.to_ascii_uppercase();
    let (gate, expected) = match upper.as_str() {
        "I" | "ID" => (Gate::I, 0),
        "X" => (Gate::X, 0),
        "Y" => (Gate::Y, 0),
        "Z" => (Gate::Z, 0),
        "H" => (Gate::H, 0),
        "SX" => (Gate::SX, 0),
        "RZ" => (Gate::Rz(params.first().copied().unwrap_or(0.0)), 1),
        "CX" | "CNOT" => (Gate::CX, 0),
        "CP" => (Gate::CP(params.first().copied().unwrap_or(0.0)), 1),
        "SWAP" => (Gate::Swap, 0),
        _ => return Err(Error::UnknownGate(name.to_string())),
    };
    if params.len() != expected {
        return Err(Error::WrongParamCount {
            gate: gate.name().to_string(),
            expected,
            got: params.len(),
        });
    }
    Ok(gate)
}

/// diag(1, e^{2πiθ}): |1⟩ is the eigenvector with eigenphase θ.
pub fn eigenphase_unitary(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[ONE, C64::from_polar(1.0, TAU * theta)])
}

/// Controlled-U^{2^j} for U = diag(1, e^{2πiθ}), as a controlled phase
/// whose angle is reduced to [0, 2π) before use.
pub fn controlled_power(theta: f64, j: u32) -> Gate {
    // Multiplying by 2^j is exact; the fractional part keeps large j from
    // accumulating rotation error.
    let turns = (theta * f64::from(2u32).powi(j as i32)).rem_euclid(1.0);
    Gate::CP(TAU * turns)
}

/// Full 2^m × 2^m matrix of `gate` acting on `targets`.
pub fn embed(gate: &Gate, targets: &[usize], num_qubits: usize) -> Result<ComplexMatrix> {
    embed_matrix(&gate.matrix(), gate.name(), targets, num_qubits)
}

pub(crate) fn embed_matrix(
    op: &ComplexMatrix,
    name: &str,
    targets: &[usize],
    num_qubits: usize,
) -> Result<ComplexMatrix> {
    if op.rows() != 1 << targets.len() {
        return Err(Error::ArityMismatch {
            gate: name.to_string(),
            expected: op.rows().trailing_zeros() as usize,
            got: targets.len(),
        });
    }
    validate_targets(targets, num_qubits)?;
    let dim = 1 << num_qubits;
    let mut out = ComplexMatrix::identity(dim);
    LocalAction::new(targets, num_qubits).apply_rows(op, out.as_mut_slice(), dim);
    Ok(out)
}
