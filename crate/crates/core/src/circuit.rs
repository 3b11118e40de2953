//! Circuit representation, the phase-estimation circuit builder and the
//! line-oriented text format.
//!
//! Text format: a header line `width=<m> measure=<q0,q1,...>` followed by one
//! op per line, `GATE <params> <qubits>`, where `<params>` is a comma list or
//! `-` for parameter-free gates. Blank lines and `#` comments are ignored.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gates::{controlled_power, standard_gate, Gate};
use crate::tensor::{validate_targets, ComplexMatrix, LocalAction};

pub const MAX_ESTIMATION_QUBITS: usize = 12;
pub const MAX_UNITARY_WIDTH: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitOp {
    pub gate: Gate,
    pub qubits: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    ops: Vec<CircuitOp>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            ops: Vec::new(),
            measured: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Qubits read out at the end, least significant bit first.
    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn push(&mut self, gate: Gate, qubits: &[usize]) -> Result<&mut Self> {
        if qubits.len() != gate.arity() {
            return Err(Error::ArityMismatch {
                gate: gate.name().to_string(),
                expected: gate.arity(),
                got: qubits.len(),
            });
        }
        validate_targets(qubits, self.width)?;
        self.ops.push(CircuitOp {
            gate,
            qubits: qubits.to_vec(),
        });
        Ok(self)
    }

    pub fn set_measured(&mut self, qubits: &[usize]) -> Result<()> {
        validate_targets(qubits, self.width)?;
        self.measured = qubits.to_vec();
        Ok(())
    }

    /// Appends `other`, relabelling its qubit `i` as `mapping[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, mapping: &[usize]) -> Result<()> {
        for op in &other.ops {
            let qubits: Vec<usize> = op.qubits.iter().map(|&q| mapping[q]).collect();
            self.push(op.gate, &qubits)?;
        }
        Ok(())
    }

    pub(crate) fn with_ops(&self, ops: Vec<CircuitOp>) -> Circuit {
        Circuit {
            width: self.width,
            ops,
            measured: self.measured.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width={} measure={}", self.width, join(&self.measured))?;
        for op in &self.ops {
            let params = op.gate.params();
            let params = if params.is_empty() {
                "-".to_string()
            } else {
                join(&params)
            };
            writeln!(f, "{} {} {}", op.gate.name(), params, join(&op.qubits))?;
        }
        Ok(())
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `width=<m> measure=<csv>` header".into(),
        })?;
        let parse_err = |line: usize, message: String| Error::Parse { line, message };

        let mut width = None;
        let mut measured = Vec::new();
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("width", v)) => {
                    width = Some(
                        v.parse::<usize>()
                            .map_err(|e| parse_err(header_line, format!("width: {e}")))?,
                    )
                }
                Some(("measure", v)) => {
                    measured = parse_list::<usize>(v)
                        .map_err(|e| parse_err(header_line, format!("measure: {e}")))?
                }
                _ => {
                    return Err(parse_err(
                        header_line,
                        format!("unexpected header field `{field}`"),
                    ))
                }
            }
        }
        let width = width.ok_or_else(|| parse_err(header_line, "header lacks width=".into()))?;
        let mut circuit = Circuit::new(width);
        circuit
            .set_measured(&measured)
            .map_err(|e| parse_err(header_line, e.to_string()))?;

        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [name, params, qubits] = fields[..] else {
                return Err(parse_err(
                    line,
                    format!("expected `GATE params qubits`, got `{content}`"),
                ));
            };
            let params: Vec<f64> = if params == "-" {
                Vec::new()
            } else {
                parse_list(params).map_err(|e| parse_err(line, format!("params: {e}")))?
            };
            let qubits: Vec<usize> =
                parse_list(qubits).map_err(|e| parse_err(line, format!("qubits: {e}")))?;
            let gate = standard_gate(name, &params).map_err(|e| parse_err(line, e.to_string()))?;
            circuit
                .push(gate, &qubits)
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(circuit)
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse()).collect()
}

/// Inverse quantum Fourier transform on `n` qubits, where qubit `j` carries
/// bit `j` of the register value. Maps Σ_x e^{2πi·xk/2ⁿ}|x⟩/√2ⁿ to |k⟩.
pub fn build_inverse_qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for q in 0..n / 2 {
        c.push(Gate::Swap, &[q, n - 1 - q])
            .expect("distinct in-range qubits");
    }
    for target in 0..n {
        for control in 0..target {
            c.push(
                Gate::CP(-PI / f64::from(2u32).powi((target - control) as i32)),
                &[control, target],
            )
            .expect("distinct in-range qubits");
        }
        c.push(Gate::H, &[target]).expect("in-range qubit");
    }
    let all: Vec<usize> = (0..n).collect();
    c.set_measured(&all).expect("in-range qubits");
    c
}

/// Phase estimation circuit: qubits `0..n` form the estimation register
/// (qubit `j` is bit `j` of the readout), qubit `n` holds the eigenvector
/// |1⟩ of U = diag(1, e^{2πiθ}).
pub fn build_qpe(n: usize, theta: f64) -> Result<Circuit> {
    if !(1..=MAX_ESTIMATION_QUBITS).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as f64,
            allowed: "1 ≤ n ≤ 12",
        });
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::OutOfRange {
            what: "theta",
            value: theta,
            allowed: "0 ≤ theta < 1",
        });
    }
    let target = n;
    let mut c = Circuit::new(n + 1);
    c.push(Gate::X, &[target])?;
    for q in 0..n {
        c.push(Gate::H, &[q])?;
    }
    for j in 0..n {
        c.push(controlled_power(theta, j as u32), &[j, target])?;
    }
    let mapping: Vec<usize> = (0..n).collect();
    c.append_mapped(&build_inverse_qft(n), &mapping)?;
    c.set_measured(&mapping)?;
    Ok(c)
}

/// Product of the embedded gate matrices in application order.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    if c.width() > MAX_UNITARY_WIDTH {
        return Err(Error::OutOfRange {
            what: "width",
            value: c.width() as f64,
            allowed: "width ≤ 10 for dense unitaries",
        });
    }
    let dim = 1 << c.width();
    let mut u = ComplexMatrix::identity(dim);
    for op in c.ops() {
        LocalAction::new(&op.qubits, c.width()).apply_rows(
            &op.gate.matrix(),
            u.as_mut_slice(),
            dim,
        );
    }
    Ok(u)
}

/// Readout value of a full basis index: measured qubit `i` contributes bit `i`.
pub fn register_value(index: usize, measured: &[usize], width: usize) -> usize {
    measured
        .iter()
        .enumerate()
        .map(|(bit, &q)| ((index >> (width - 1 - q)) & 1) << bit)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{C64, ONE, ZERO};
    use std::f64::consts::TAU;

    /// Inverse DFT in the register-value basis: entry (k, x) = ω^{−xk}/√N,
    /// with basis index ↔ register value given by `register_value`.
    fn inverse_dft_in_qubit_basis(n: usize) -> ComplexMatrix {
        let dim = 1 << n;
        let measured: Vec<usize> = (0..n).collect();
        let norm = 1.0 / (dim as f64).sqrt();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for row in 0..dim {
            let k = register_value(row, &measured, n);
            for col in 0..dim {
                let x = register_value(col, &measured, n);
                let angle = -TAU * ((x * k) % dim) as f64 / dim as f64;
                m.set(row, col, C64::from_polar(norm, angle));
            }
        }
        m
    }

    fn outcome_probabilities(c: &Circuit) -> Vec<f64> {
        let u = circuit_unitary(c).unwrap();
        let dim = 1 << c.width();
        let mut probs = vec![0.0; 1 << c.measured().len()];
        for i in 0..dim {
            probs[register_value(i, c.measured(), c.width())] += u.get(i, 0).norm_sqr();
        }
        probs
    }

    #[test]
    fn inverse_qft_single_qubit_is_h() {
        let c = build_inverse_qft(1);
        assert_eq!(
            c.ops(),
            &[CircuitOp {
                gate: Gate::H,
                qubits: vec![0]
            }]
        );
    }

    #[test]
    fn inverse_qft_matches_dft_definition() {
        for n in 1..=6 {
            let u = circuit_unitary(&build_inverse_qft(n)).unwrap();
            let expected = inverse_dft_in_qubit_basis(n);
            assert!(u.max_abs_diff(&expected) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn inverse_qft_of_uniform_superposition() {
        let n = 3;
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.push(Gate::H, &[q]).unwrap();
        }
        c.append_mapped(&build_inverse_qft(n), &[0, 1, 2]).unwrap();
        c.set_measured(&[0, 1, 2]).unwrap();
        let probs = outcome_probabilities(&c);
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qpe_single_qubit_half() {
        let c = build_qpe(1, 0.5).unwrap();
        assert_eq!(c.width(), 2);
        assert_eq!(c.measured(), &[0]);
        let probs = outcome_probabilities(&c);
        assert!((probs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qpe_exact_for_representable_phases() {
        for (n, t) in [(2, 1), (3, 5), (5, 1), (5, 31), (5, 16), (6, 37)] {
            let theta = t as f64 / (1 << n) as f64;
            let probs = outcome_probabilities(&build_qpe(n, theta).unwrap());
            assert!((probs[t] - 1.0).abs() < 1e-10, "n={n} t={t}");
        }
    }

    #[test]
    fn qpe_two_qubits_quarter_statevector() {
        // Apply the 8x8 unitary to |000⟩; the register must read k = 1,
        // i.e. qubit 0 = 1, qubit 1 = 0, eigenvector qubit 2 = 1: index 0b101.
        let u = circuit_unitary(&build_qpe(2, 0.25).unwrap()).unwrap();
        let amp = u.get(0b101, 0);
        assert!((amp.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qpe_concentration_for_unrepresentable_phase() {
        for n in 2..=6 {
            let theta = 0.3;
            let probs = outcome_probabilities(&build_qpe(n, theta).unwrap());
            let (best, p) = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            let scaled = theta * (1 << n) as f64;
            assert!(best == scaled.floor() as usize || best == scaled.ceil() as usize % (1 << n));
            assert!(*p >= 4.0 / (PI * PI), "n={n} p={p}");
        }
    }

    #[test]
    fn qpe_range_errors() {
        assert!(build_qpe(0, 0.5).is_err());
        assert!(build_qpe(13, 0.5).is_err());
        assert!(build_qpe(3, 1.0).is_err());
        assert!(build_qpe(3, -0.1).is_err());
    }

    #[test]
    fn unitary_of_trivial_circuits() {
        assert_eq!(
            circuit_unitary(&Circuit::new(2)).unwrap(),
            ComplexMatrix::identity(4)
        );
        let mut c = Circuit::new(1);
        c.push(Gate::X, &[0]).unwrap();
        assert_eq!(
            circuit_unitary(&c).unwrap(),
            ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
        );
        assert!(circuit_unitary(&Circuit::new(11)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = build_qpe(3, 0.3).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("width=4 measure=0,1,2\n"));
        assert!(text.contains("\nX - 3\n"));
        let parsed: Circuit = text.parse().unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn text_parse_errors_carry_line_numbers() {
        let err = "width=2 measure=0\nH - 0\nFOO - 1\n"
            .parse::<Circuit>()
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = "width=2 measure=0\nCX - 0\n"
            .parse::<Circuit>()
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!("".parse::<Circuit>().is_err());
    }

    #[test]
    fn push_rejects_bad_operands() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::CX, &[0]).is_err());
        assert!(c.push(Gate::CX, &[1, 1]).is_err());
        assert!(c.push(Gate::X, &[2]).is_err());
    }
}
