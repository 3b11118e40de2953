//! Single-qubit unital noise channels in Kraus form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{pauli_x, pauli_y, pauli_z, ComplexMatrix, DensityMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::BitFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::BitPhaseFlip,
        ChannelKind::Depolarizing,
    ];
    pub const CHOICES: &'static str = "bitflip, phaseflip, bitphaseflip, depolarizing";

    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "bitflip",
            ChannelKind::PhaseFlip => "phaseflip",
            ChannelKind::BitPhaseFlip => "bitphaseflip",
            ChannelKind::Depolarizing => "depolarizing",
        }
    }

    /// Label used in human-readable tables.
    pub fn title(&self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "Bit flip",
            ChannelKind::PhaseFlip => "Phase flip",
            ChannelKind::BitPhaseFlip => "Bit-phase flip",
            ChannelKind::Depolarizing => "Depolarizing",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "bitflip" => Ok(ChannelKind::BitFlip),
            "phaseflip" => Ok(ChannelKind::PhaseFlip),
            "bitphaseflip" => Ok(ChannelKind::BitPhaseFlip),
            "depolarizing" | "depolarising" => Ok(ChannelKind::Depolarizing),
            _ => Err(Error::UnknownName {
                what: "channel",
                value: s.to_string(),
                choices: Self::CHOICES,
            }),
        }
    }
}

/// Which qubits of a CX receive noise afterwards.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoQubitNoise {
    #[default]
    Both,
    Target,
    None,
}

impl TwoQubitNoise {
    pub const CHOICES: &'static str = "both, target, none";

    pub fn as_str(&self) -> &'static str {
        match self {
            TwoQubitNoise::Both => "both",
            TwoQubitNoise::Target => "target",
            TwoQubitNoise::None => "none",
        }
    }

    /// Qubits of a two-qubit op (control, target) that receive noise.
    pub fn sites<'a>(&self, qubits: &'a [usize]) -> &'a [usize] {
        match self {
            TwoQubitNoise::Both => qubits,
            TwoQubitNoise::Target => &qubits[1..],
            TwoQubitNoise::None => &[],
        }
    }
}

impl fmt::Display for TwoQubitNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TwoQubitNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "both" => Ok(TwoQubitNoise::Both),
            "target" => Ok(TwoQubitNoise::Target),
            "none" => Ok(TwoQubitNoise::None),
            _ => Err(Error::UnknownName {
                what: "two-qubit noise placement",
                value: s.to_string(),
                choices: Self::CHOICES,
            }),
        }
    }
}

/// A single-qubit CPTP map with error probability `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseChannel {
    kind: ChannelKind,
    p: f64,
    kraus: Vec<ComplexMatrix>,
}

impl NoiseChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Kraus operators with nonzero weight.
    pub fn active_kraus(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.kraus.iter().filter(|k| k.max_abs() > 0.0)
    }

    pub fn is_identity(&self) -> bool {
        self.p == 0.0
    }

    /// Σ K ρ K† on a single-qubit (not necessarily Hermitian) 2×2 matrix.
    pub fn apply_to_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2, 2);
        for k in &self.kraus {
            let term = k
                .matmul(m)
                .and_then(|km| km.matmul(&k.dagger()))
                .expect("2x2 operands");
            out = out.add(&term).expect("2x2 operands");
        }
        out
    }

    /// max |Σ K†K − I|
    pub fn completeness_deviation(&self) -> f64 {
        self.sum_of(|k| k.dagger().matmul(k).expect("2x2"))
            .max_abs_diff(&ComplexMatrix::identity(2))
    }

    /// max |Σ K K† − I|
    pub fn unitality_deviation(&self) -> f64 {
        self.sum_of(|k| k.matmul(&k.dagger()).expect("2x2"))
            .max_abs_diff(&ComplexMatrix::identity(2))
    }

    fn sum_of(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .map(f)
            .fold(ComplexMatrix::zeros(2, 2), |acc, m| {
                acc.add(&m).expect("2x2")
            })
    }

    /// Choi matrix Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j| (unnormalized).
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let mut choi = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let mut unit = ComplexMatrix::zeros(2, 2);
                unit.set(i, j, ONE);
                let block = self.apply_to_matrix(&unit).kron(&unit);
                choi = choi.add(&block).expect("4x4");
            }
        }
        choi
    }
}

pub fn make_channel(kind: ChannelKind, p: f64) -> Result<NoiseChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let identity = ComplexMatrix::identity(2);
    let w = |weight: f64| C64::new(weight.max(0.0).sqrt(), 0.0);
    let kraus = match kind {
        ChannelKind::BitFlip => vec![identity.scale(w(1.0 - p)), pauli_x().scale(w(p))],
        ChannelKind::PhaseFlip => vec![identity.scale(w(1.0 - p)), pauli_z().scale(w(p))],
        ChannelKind::BitPhaseFlip => vec![identity.scale(w(1.0 - p)), pauli_y().scale(w(p))],
        // (1−p)ρ + p·I/2 = (1 − 3p/4)ρ + (p/4)(XρX + YρY + ZρZ)
        ChannelKind::Depolarizing => vec![
            identity.scale(w(1.0 - 0.75 * p)),
            pauli_x().scale(w(p / 4.0)),
            pauli_y().scale(w(p / 4.0)),
            pauli_z().scale(w(p / 4.0)),
        ],
    };
    Ok(NoiseChannel { kind, p, kraus })
}

/// The channel written directly as its defining map, without Kraus operators.
pub fn formula_map(kind: ChannelKind, p: f64, rho: &ComplexMatrix) -> ComplexMatrix {
    let keep = rho.scale(C64::new(1.0 - p, 0.0));
    let conj = |pauli: ComplexMatrix| {
        pauli
            .matmul(rho)
            .and_then(|m| m.matmul(&pauli))
            .expect("2x2")
            .scale(C64::new(p, 0.0))
    };
    let noise = match kind {
        ChannelKind::BitFlip => conj(pauli_x()),
        ChannelKind::PhaseFlip => conj(pauli_z()),
        ChannelKind::BitPhaseFlip => conj(pauli_y()),
        // Tr(ρ)·I/2 so the map stays linear on non-unit-trace inputs.
        ChannelKind::Depolarizing => ComplexMatrix::identity(2).scale(rho.trace() * (p / 2.0)),
    };
    keep.add(&noise).expect("2x2")
}

/// Probe states |0⟩⟨0|, |1⟩⟨1|, |+⟩⟨+|, |+i⟩⟨+i|.
pub fn probe_states() -> [ComplexMatrix; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |a: C64, b: C64| [a, b];
    [
        ket(ONE, ZERO),
        ket(ZERO, ONE),
        ket(C64::new(s, 0.0), C64::new(s, 0.0)),
        ket(C64::new(s, 0.0), C64::new(0.0, s)),
    ]
    .map(|v| ComplexMatrix::outer(&v, &v))
}

/// Largest disagreement between the Kraus form and the defining map over
/// the probe states.
pub fn kraus_to_map_check(ch: &NoiseChannel) -> f64 {
    probe_states()
        .iter()
        .map(|rho| {
            ch.apply_to_matrix(rho)
                .max_abs_diff(&formula_map(ch.kind, ch.p, rho))
        })
        .fold(0.0, f64::max)
}

/// Applies `ch` to one qubit of `rho`.
pub fn apply_channel(
    rho: &DensityMatrix,
    ch: &NoiseChannel,
    qubit: usize,
) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.apply_kraus(ch.kraus(), &[qubit])?;
    Ok(out)
}

/// Bloch vector (⟨X⟩, ⟨Y⟩, ⟨Z⟩) of a single-qubit state.
pub fn bloch_vector(rho: &ComplexMatrix) -> [f64; 3] {
    let expect = |pauli: ComplexMatrix| pauli.matmul(rho).expect("2x2").trace().re;
    [expect(pauli_x()), expect(pauli_y()), expect(pauli_z())]
}

/// ½(I + r·σ)
pub fn from_bloch(r: [f64; 3]) -> ComplexMatrix {
    let [x, y, z] = r;
    ComplexMatrix::from_rows([
        [C64::new((1.0 + z) / 2.0, 0.0), C64::new(x / 2.0, -y / 2.0)],
        [C64::new(x / 2.0, y / 2.0), C64::new((1.0 - z) / 2.0, 0.0)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [f64; 6] = [0.0, 0.001, 0.01, 0.1, 0.5, 1.0];

    fn single(m: ComplexMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(m).unwrap()
    }

    #[test]
    fn zero_probability_is_identity() {
        for kind in ChannelKind::ALL {
            let ch = make_channel(kind, 0.0).unwrap();
            for rho in probe_states() {
                assert!(ch.apply_to_matrix(&rho).max_abs_diff(&rho) < 1e-15);
            }
        }
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let ch = make_channel(ChannelKind::Depolarizing, 1.0).unwrap();
        let half = DensityMatrix::maximally_mixed(1);
        for rho in probe_states() {
            assert!(ch.apply_to_matrix(&rho).max_abs_diff(half.matrix()) < 1e-15);
        }
    }

    #[test]
    fn half_bitflip_on_zero() {
        let ch = make_channel(ChannelKind::BitFlip, 0.5).unwrap();
        let out = apply_channel(&DensityMatrix::basis_state(1, 0), &ch, 0).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(1).matrix())
                < 1e-15
        );
    }

    #[test]
    fn invalid_probability() {
        assert!(matches!(
            make_channel(ChannelKind::BitFlip, 1.5),
            Err(Error::InvalidProbability(_))
        ));
        assert!(make_channel(ChannelKind::Depolarizing, -0.01).is_err());
        assert!(make_channel(ChannelKind::Depolarizing, f64::NAN).is_err());
    }

    #[test]
    fn phase_flip_leaves_diagonal_states() {
        let ch = make_channel(ChannelKind::PhaseFlip, 0.3).unwrap();
        let rho = single(ComplexMatrix::from_diagonal(&[
            C64::new(0.7, 0.0),
            C64::new(0.3, 0.0),
        ]));
        let out = apply_channel(&rho, &ch, 0).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn bit_flip_on_zero_state() {
        let ch = make_channel(ChannelKind::BitFlip, 0.1).unwrap();
        let out = apply_channel(&DensityMatrix::basis_state(1, 0), &ch, 0).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[C64::new(0.9, 0.0), C64::new(0.1, 0.0)]);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn depolarizing_shrinks_bloch_vector() {
        let r = [0.3, -0.5, 0.6];
        for p in [0.1, 0.37, 0.9] {
            let ch = make_channel(ChannelKind::Depolarizing, p).unwrap();
            let out = apply_channel(&single(from_bloch(r)), &ch, 0).unwrap();
            let got = bloch_vector(out.matrix());
            for (g, x) in got.iter().zip(r) {
                assert!((g - (1.0 - p) * x).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn apply_channel_rejects_bad_qubit() {
        let ch = make_channel(ChannelKind::BitFlip, 0.1).unwrap();
        assert!(apply_channel(&DensityMatrix::basis_state(2, 0), &ch, 2).is_err());
    }

    #[test]
    fn kraus_form_matches_formula() {
        for kind in ChannelKind::ALL {
            for p in GRID {
                let ch = make_channel(kind, p).unwrap();
                assert!(kraus_to_map_check(&ch) <= 1e-12, "{kind} p={p}");
            }
        }
        let ch = make_channel(ChannelKind::Depolarizing, 0.4).unwrap();
        assert!(kraus_to_map_check(&ch) <= 1e-12);
    }

    #[test]
    fn bitflip_fixes_plus_and_phaseflip_dephases_it() {
        let plus = probe_states()[2].clone();
        let ch = make_channel(ChannelKind::BitFlip, 1.0).unwrap();
        assert!(ch.apply_to_matrix(&plus).max_abs_diff(&plus) < 1e-15);

        let half = DensityMatrix::maximally_mixed(1).into_matrix();
        let ch = make_channel(ChannelKind::PhaseFlip, 0.5).unwrap();
        assert!(ch.apply_to_matrix(&plus).max_abs_diff(&half) < 1e-15);
        assert!(formula_map(ChannelKind::PhaseFlip, 0.5, &plus).max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn names_parse() {
        for kind in ChannelKind::ALL {
            assert_eq!(kind.as_str().parse::<ChannelKind>().unwrap(), kind);
        }
        assert_eq!(
            "Bit-Phase Flip".parse::<ChannelKind>().unwrap(),
            ChannelKind::BitPhaseFlip
        );
        assert!("typo".parse::<ChannelKind>().is_err());
        assert_eq!(
            "target".parse::<TwoQubitNoise>().unwrap(),
            TwoQubitNoise::Target
        );
        assert_eq!(TwoQubitNoise::Target.sites(&[3, 5]), &[5]);
    }
}
