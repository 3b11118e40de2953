//! Rewriting circuits into the basis {I, X, SX, Rz, CX}.
//!
//! Decomposition rules (equal up to global phase):
//!
//! * `H` → `Rz(π/2) · SX · Rz(π/2)`
//! * `CP(λ)` on (c, t) → `Rz(λ/2)` on c, `Rz(λ/2)` on t, `CX(c,t)`, `Rz(−λ/2)` on t, `CX(c,t)`
//! * `SWAP(a, b)` → `CX(a,b) · CX(b,a) · CX(a,b)`
//! * `X`, `SX`, `Rz`, `CX` pass through.
//!
//! Adjacent rotations are never merged and no identity padding is emitted, so
//! each emitted op is one noise insertion point.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::ops::Deref;

use crate::circuit::{Circuit, CircuitOp};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::tensor::ComplexMatrix;

pub const BASIS_NAMES: [&str; 5] = ["I", "X", "SX", "Rz", "CX"];

/// A circuit whose ops are restricted to the basis gate set.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisCircuit(Circuit);

impl BasisCircuit {
    /// Accepts an already-basis circuit, rejecting any other gate.
    pub fn try_from_circuit(c: Circuit) -> Result<Self> {
        if let Some(op) = c.ops().iter().find(|op| !is_basis(&op.gate)) {
            return Err(Error::UnknownName {
                what: "basis gate",
                value: op.gate.name().to_string(),
                choices: "I, X, SX, Rz, CX",
            });
        }
        Ok(Self(c))
    }

    pub fn into_inner(self) -> Circuit {
        self.0
    }
}

impl Deref for BasisCircuit {
    type Target = Circuit;

    fn deref(&self) -> &Circuit {
        &self.0
    }
}

pub fn is_basis(gate: &Gate) -> bool {
    matches!(gate, Gate::I | Gate::X | Gate::SX | Gate::Rz(_) | Gate::CX)
}

pub fn transpile(c: &Circuit) -> Result<BasisCircuit> {
    let mut ops = Vec::with_capacity(c.len() * 3);
    let mut emit = |gate: Gate, qubits: &[usize]| {
        ops.push(CircuitOp {
            gate,
            qubits: qubits.to_vec(),
        })
    };
    for op in c.ops() {
        let q = &op.qubits;
        match op.gate {
            Gate::X | Gate::SX | Gate::Rz(_) | Gate::CX => emit(op.gate, q),
            Gate::H => {
                emit(Gate::Rz(FRAC_PI_2), q);
                emit(Gate::SX, q);
                emit(Gate::Rz(FRAC_PI_2), q);
            }
            Gate::CP(lambda) => {
                let (control, target) = (q[0], q[1]);
                emit(Gate::Rz(lambda / 2.0), &[control]);
                emit(Gate::Rz(lambda / 2.0), &[target]);
                emit(Gate::CX, &[control, target]);
                emit(Gate::Rz(-lambda / 2.0), &[target]);
                emit(Gate::CX, &[control, target]);
            }
            Gate::Swap => {
                let (a, b) = (q[0], q[1]);
                emit(Gate::CX, &[a, b]);
                emit(Gate::CX, &[b, a]);
                emit(Gate::CX, &[a, b]);
            }
            Gate::I | Gate::Y | Gate::Z => {
                return Err(Error::NoDecomposition(op.gate.name().to_string()))
            }
        }
    }
    Ok(BasisCircuit(c.with_ops(ops)))
}

/// True iff some unit-modulus `c` gives max |a − c·b| ≤ tol. The phase is
/// taken from the entry where `b` is largest.
pub fn equivalent_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    if a.dims() != b.dims() {
        return false;
    }
    let Some((idx, pivot)) = b
        .as_slice()
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
    else {
        return false;
    };
    if pivot.norm() == 0.0 {
        return a.max_abs() <= tol;
    }
    let ratio = a.as_slice()[idx] / pivot;
    if ratio.norm() == 0.0 {
        return false;
    }
    let phase = ratio / ratio.norm();
    a.max_abs_diff(&b.scale(phase)) <= tol
}

/// Gate counts by name and by qubit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GateCensus {
    pub by_name: BTreeMap<&'static str, usize>,
    /// Number of ops touching each qubit.
    pub by_qubit: Vec<usize>,
}

impl GateCensus {
    pub fn count(&self, name: &str) -> usize {
        self.by_name.get(name).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.by_name.values().sum()
    }
}

pub fn gate_census(c: &BasisCircuit) -> GateCensus {
    let mut census = GateCensus {
        by_name: BASIS_NAMES.iter().map(|&n| (n, 0)).collect(),
        by_qubit: vec![0; c.width()],
    };
    for op in c.ops() {
        *census.by_name.entry(op.gate.name()).or_insert(0) += 1;
        for &q in &op.qubits {
            census.by_qubit[q] += 1;
        }
    }
    census
}
