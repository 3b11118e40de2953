//! Noisy simulation of basis circuits.
//!
//! Every basis op is followed by the configured channel on each qubit it
//! touches (for CX, on the qubits chosen by [`TwoQubitNoise`]). Two backends
//! share that schedule: exact density-matrix evolution, and Monte Carlo
//! trajectories that sample one Kraus branch per noise site.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{make_channel, ChannelKind, NoiseChannel, TwoQubitNoise};
use crate::circuit::{build_qpe, register_value};
use crate::error::{Error, Result};
use crate::tensor::{DensityMatrix, LocalAction, C64, ONE, ZERO};
use crate::transpile::{transpile, BasisCircuit};

pub const MAX_EXACT_WIDTH: usize = 12;
pub const DEFAULT_SHOTS: u64 = 4096;
const PROB_TOL: f64 = 1e-9;
const SHOTS_PER_CHUNK: u64 = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    #[default]
    Exact,
    Sampled,
}

impl SimMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::Exact => "exact",
            SimMode::Sampled => "sampled",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(SimMode::Exact),
            "sampled" => Ok(SimMode::Sampled),
            _ => Err(Error::UnknownName {
                what: "mode",
                value: s.to_string(),
                choices: "exact, sampled",
            }),
        }
    }
}

/// Mean and standard deviation of the estimate θ̂ = k/2ⁿ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseStats {
    pub theta_bar: f64,
    pub delta_theta: f64,
}

/// Outcome distribution over the measured register values k ∈ [0, 2ⁿ).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDistribution {
    n: usize,
    probs: Vec<f64>,
    mode: SimMode,
    shots: Option<u64>,
}

impl PhaseDistribution {
    pub fn from_probs(probs: Vec<f64>, mode: SimMode, shots: Option<u64>) -> Result<Self> {
        if probs.is_empty() || !probs.len().is_power_of_two() {
            return Err(Error::BadShape {
                rows: probs.len(),
                cols: 1,
                expected: "probability vector of length 2^n",
            });
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| p.is_nan() || *p < -PROB_TOL) || (total - 1.0).abs() > PROB_TOL {
            return Err(Error::OutOfRange {
                what: "total probability",
                value: total,
                allowed: "non-negative entries summing to 1",
            });
        }
        Ok(Self {
            n: probs.len().trailing_zeros() as usize,
            probs,
            mode,
            shots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mode(&self) -> SimMode {
        self.mode
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    pub fn estimate(&self, k: usize) -> f64 {
        k as f64 / self.probs.len() as f64
    }

    pub fn stats(&self) -> PhaseStats {
        distribution_stats(self)
    }

    pub fn total_variation(&self, other: &PhaseDistribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Population mean and standard deviation of θ̂ under the distribution.
pub fn distribution_stats(d: &PhaseDistribution) -> PhaseStats {
    let theta_bar: f64 = d
        .probs
        .iter()
        .enumerate()
        .map(|(k, p)| p * d.estimate(k))
        .sum();
    let variance: f64 = d
        .probs
        .iter()
        .enumerate()
        .map(|(k, p)| p * (d.estimate(k) - theta_bar).powi(2))
        .sum();
    PhaseStats {
        theta_bar,
        delta_theta: variance.max(0.0).sqrt(),
    }
}

/// A basis circuit plus its noise model.
#[derive(Clone, Debug)]
pub struct SimSpec {
    circuit: BasisCircuit,
    channel: NoiseChannel,
    two_qubit_noise: TwoQubitNoise,
    seed: u64,
}

impl SimSpec {
    pub fn new(circuit: BasisCircuit, kind: ChannelKind, p: f64) -> Result<Self> {
        Ok(Self {
            circuit,
            channel: make_channel(kind, p)?,
            two_qubit_noise: TwoQubitNoise::default(),
            seed: 0,
        })
    }

    /// Transpiled phase-estimation circuit for `n` estimation qubits.
    pub fn qpe(n: usize, theta: f64, kind: ChannelKind, p: f64) -> Result<Self> {
        Self::new(transpile(&build_qpe(n, theta)?)?, kind, p)
    }

    pub fn with_two_qubit_noise(mut self, placement: TwoQubitNoise) -> Self {
        self.two_qubit_noise = placement;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn circuit(&self) -> &BasisCircuit {
        &self.circuit
    }

    pub fn channel(&self) -> &NoiseChannel {
        &self.channel
    }

    pub fn two_qubit_noise(&self) -> TwoQubitNoise {
        self.two_qubit_noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn noise_sites<'a>(&self, qubits: &'a [usize]) -> &'a [usize] {
        if self.channel.is_identity() {
            return &[];
        }
        match qubits.len() {
            1 => qubits,
            _ => self.two_qubit_noise.sites(qubits),
        }
    }

    fn measured_count(&self) -> usize {
        self.circuit.measured().len()
    }
}

pub fn run_exact(spec: &SimSpec) -> Result<PhaseDistribution> {
    run_exact_observed(spec, |_, _| {})
}

/// Exact evolution; `observer` sees the state after every op and its noise.
pub fn run_exact_observed(
    spec: &SimSpec,
    mut observer: impl FnMut(usize, &DensityMatrix),
) -> Result<PhaseDistribution> {
    let width = spec.circuit.width();
    if width > MAX_EXACT_WIDTH {
        return Err(Error::OutOfRange {
            what: "width",
            value: width as f64,
            allowed: "width ≤ 12 for density-matrix simulation",
        });
    }
    let mut rho = DensityMatrix::basis_state(width, 0);
    for (step, op) in spec.circuit.ops().iter().enumerate() {
        rho.apply_unitary(&op.gate.matrix(), &op.qubits)?;
        for &q in spec.noise_sites(&op.qubits) {
            rho.apply_kraus(spec.channel.kraus(), &[q])?;
        }
        observer(step, &rho);
    }

    let measured = spec.circuit.measured();
    if measured.is_empty() {
        return PhaseDistribution::from_probs(vec![1.0], SimMode::Exact, None);
    }
    let reduced = rho.partial_trace(measured)?;
    let mut kept = measured.to_vec();
    kept.sort_unstable();
    // Position of each measured qubit inside the reduced register.
    let positions: Vec<usize> = measured
        .iter()
        .map(|q| kept.iter().position(|k| k == q).expect("kept qubit"))
        .collect();
    let mut probs = vec![0.0; 1 << measured.len()];
    for (idx, p) in reduced.diagonal().into_iter().enumerate() {
        probs[register_value(idx, &positions, kept.len())] += p.max(0.0);
    }
    PhaseDistribution::from_probs(probs, SimMode::Exact, None)
}

/// Samples `shots` trajectories; identical specs and seeds give identical
/// frequencies regardless of thread scheduling.
pub fn run_trajectories(spec: &SimSpec, shots: u64) -> Result<PhaseDistribution> {
    if shots == 0 {
        return Err(Error::OutOfRange {
            what: "shots",
            value: 0.0,
            allowed: "shots ≥ 1",
        });
    }
    let width = spec.circuit.width();
    let actions: Vec<LocalAction> = spec
        .circuit
        .ops()
        .iter()
        .map(|op| LocalAction::new(&op.qubits, width))
        .collect();
    let site_actions: Vec<LocalAction> =
        (0..width).map(|q| LocalAction::new(&[q], width)).collect();
    let matrices: Vec<_> = spec
        .circuit
        .ops()
        .iter()
        .map(|op| op.gate.matrix())
        .collect();
    let kraus: Vec<_> = spec.channel.active_kraus().cloned().collect();

    let chunks = shots.div_ceil(SHOTS_PER_CHUNK);
    let outcomes = 1usize << spec.measured_count();
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(chunk);
            let in_chunk = SHOTS_PER_CHUNK.min(shots - chunk * SHOTS_PER_CHUNK);
            let mut counts = vec![0u64; outcomes];
            let mut psi = vec![ZERO; 1 << width];
            let mut branch = vec![ZERO; 1 << width];
            for _ in 0..in_chunk {
                psi.fill(ZERO);
                psi[0] = ONE;
                for ((op, action), matrix) in spec.circuit.ops().iter().zip(&actions).zip(&matrices)
                {
                    action.apply_rows(matrix, &mut psi, 1);
                    for &q in spec.noise_sites(&op.qubits) {
                        sample_kraus_branch(
                            &kraus,
                            &site_actions[q],
                            &mut psi,
                            &mut branch,
                            &mut rng,
                        );
                    }
                }
                let index = sample_index(&psi, &mut rng);
                counts[register_value(index, spec.circuit.measured(), width)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; outcomes],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let probs = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    PhaseDistribution::from_probs(probs, SimMode::Sampled, Some(shots))
}

/// Replaces `psi` by K|ψ⟩/‖K|ψ⟩‖ with K drawn with probability ‖K|ψ⟩‖².
fn sample_kraus_branch(
    kraus: &[crate::tensor::ComplexMatrix],
    action: &LocalAction,
    psi: &mut [C64],
    branch: &mut [C64],
    rng: &mut ChaCha8Rng,
) {
    if kraus.len() == 1 {
        action.apply_rows(&kraus[0], psi, 1);
        normalize(psi);
        return;
    }
    let mut u: f64 = rng.random();
    for (i, k) in kraus.iter().enumerate() {
        branch.copy_from_slice(psi);
        action.apply_rows(k, branch, 1);
        let weight: f64 = branch.iter().map(|z| z.norm_sqr()).sum();
        if u < weight || i == kraus.len() - 1 {
            psi.copy_from_slice(branch);
            normalize(psi);
            return;
        }
        u -= weight;
    }
}

fn normalize(psi: &mut [C64]) {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        psi.iter_mut().for_each(|z| *z /= norm);
    }
}

fn sample_index(psi: &[C64], rng: &mut ChaCha8Rng) -> usize {
    let mut u: f64 = rng.random();
    for (i, z) in psi.iter().enumerate() {
        let w = z.norm_sqr();
        if u < w {
            return i;
        }
        u -= w;
    }
    // Rounding left a sliver of mass; fall back to the last populated index.
    psi.iter().rposition(|z| z.norm_sqr() > 0.0).unwrap_or(0)
}
