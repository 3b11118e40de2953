//! Noisy quantum phase estimation toolkit.
//!
//! Builds the phase-estimation circuit, transpiles it to {I, X, SX, Rz, CX},
//! attaches a single-qubit unital channel after every basis gate and
//! simulates the result exactly (density matrices) or by sampling
//! trajectories. The `experiment` module sweeps error probability and qubit
//! count and fits Δθ(p) = k₁ + k₂·e^{−k₃p}.

pub mod channels;
pub mod circuit;
pub mod cli;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod tensor;
pub mod transpile;

pub use channels::{make_channel, ChannelKind, NoiseChannel, TwoQubitNoise};
pub use circuit::{build_inverse_qft, build_qpe, circuit_unitary, Circuit, CircuitOp};
pub use engine::{run_exact, run_trajectories, PhaseDistribution, PhaseStats, SimMode, SimSpec};
pub use error::{Error, Result};
pub use gates::Gate;
pub use tensor::{ComplexMatrix, DensityMatrix};
pub use transpile::{transpile, BasisCircuit};
