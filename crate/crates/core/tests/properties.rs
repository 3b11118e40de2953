use std::f64::consts::PI;

use proptest::prelude::*;
use qpe_lab::channels::{bloch_vector, from_bloch};
use qpe_lab::circuit::register_value;
use qpe_lab::engine::SimMode;
use qpe_lab::experiment::{read_rows_csv, rows_to_csv_string, SweepRow};
use qpe_lab::gates::{controlled_power, embed};
use qpe_lab::tensor::C64;
use qpe_lab::transpile::{equivalent_up_to_phase, gate_census};
use qpe_lab::*;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn square(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), dim * dim)
        .prop_map(move |d| ComplexMatrix::new(dim, dim, d).unwrap())
}

fn pure_state(num_qubits: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(complex(), 1 << num_qubits)
        .prop_filter("non-zero", |v| {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
        })
        .prop_map(|v| {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
            DensityMatrix::from_pure(&v).unwrap()
        })
}

fn mixed_state(num_qubits: usize) -> impl Strategy<Value = DensityMatrix> {
    (pure_state(num_qubits), pure_state(num_qubits), 0.0..1.0f64).prop_map(|(a, b, w)| {
        let m = a
            .matrix()
            .scale(C64::new(w, 0.0))
            .add(&b.matrix().scale(C64::new(1.0 - w, 0.0)))
            .unwrap();
        DensityMatrix::from_matrix(m).unwrap()
    })
}

fn single_qubit_gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        Just(Gate::X),
        Just(Gate::H),
        Just(Gate::SX),
        (-PI..PI).prop_map(Gate::Rz),
    ]
}

fn two_qubit_gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        Just(Gate::CX),
        Just(Gate::Swap),
        (-PI..PI).prop_map(Gate::CP)
    ]
}

prop_compose! {
    fn random_circuit(max_width: usize, max_ops: usize)
        (width in 2..=max_width)
        (ops in prop::collection::vec(
            (prop_oneof![single_qubit_gate(), two_qubit_gate()], 0..width, 1..width),
            0..=max_ops,
        ), width in Just(width)) -> Circuit
    {
        let mut c = Circuit::new(width);
        for (gate, a, shift) in ops {
            if gate.arity() == 1 {
                c.push(gate, &[a]).unwrap();
            } else {
                c.push(gate, &[a, (a + shift) % width]).unwrap();
            }
        }
        c
    }
}

fn channel_kind() -> impl Strategy<Value = ChannelKind> {
    prop::sample::select(ChannelKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(a in square(2), b in square(2), c in square(2)) {
        let left = a.kron(&b).kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in square(2), b in square(2), c in square(2), d in square(2)) {
        let lhs = a.kron(&b).matmul(&c.kron(&d)).unwrap();
        let rhs = a.matmul(&c).unwrap().kron(&b.matmul(&d).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace(rho in mixed_state(3), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..=3)) {
        let reduced = rho.partial_trace(&keep).unwrap();
        prop_assert_eq!(reduced.num_qubits(), keep.len());
        prop_assert!((reduced.matrix().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(reduced.check().is_valid());
    }

    #[test]
    fn partial_trace_of_product_state(a in mixed_state(1), b in mixed_state(2)) {
        let joint = DensityMatrix::from_matrix(a.matrix().kron(b.matrix())).unwrap();
        prop_assert!(joint.partial_trace(&[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(joint.partial_trace(&[1, 2]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn gates_are_unitary(g in prop_oneof![single_qubit_gate(), two_qubit_gate()]) {
        prop_assert!(g.matrix().is_unitary(1e-12));
    }

    #[test]
    fn disjoint_embeddings_commute(
        g in single_qubit_gate(),
        h in two_qubit_gate(),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let a = embed(&g, &[perm[0]], 4).unwrap();
        let b = embed(&h, &[perm[1], perm[2]], 4).unwrap();
        prop_assert!(a.matmul(&b).unwrap().max_abs_diff(&b.matmul(&a).unwrap()) < 1e-12);
    }

    #[test]
    fn local_unitary_matches_embedded_conjugation(rho in mixed_state(3), g in two_qubit_gate(), a in 0usize..3, shift in 1usize..3) {
        let targets = [a, (a + shift) % 3];
        let mut local = rho.clone();
        local.apply_unitary(&g.matrix(), &targets).unwrap();
        let u = embed(&g, &targets, 3).unwrap();
        let full = u.matmul(rho.matrix()).unwrap().matmul(&u.dagger()).unwrap();
        prop_assert!(local.matrix().max_abs_diff(&full) < 1e-12);
    }

    #[test]
    fn channels_contract_bloch_vectors(kind in channel_kind(), p in 0.0..=1.0f64, r in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)) {
        let len = (r.0 * r.0 + r.1 * r.1 + r.2 * r.2).sqrt().max(1.0);
        let r = [r.0 / len, r.1 / len, r.2 / len];
        let ch = make_channel(kind, p).unwrap();
        let out = bloch_vector(&ch.apply_to_matrix(&from_bloch(r)));
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assert!(norm(out) <= norm(r) + 1e-12);
    }

    #[test]
    fn choi_matrix_is_psd(kind in channel_kind(), p in 0.0..=1.0f64) {
        let choi = make_channel(kind, p).unwrap().choi_matrix();
        let min = choi.hermitian_eigenvalues().unwrap()[0];
        prop_assert!(min >= -1e-12, "min eigenvalue {}", min);
    }

    #[test]
    fn channel_on_subsystem_keeps_state_valid(rho in mixed_state(3), kind in channel_kind(), p in 0.0..=1.0f64, q in 0usize..3) {
        let ch = make_channel(kind, p).unwrap();
        let out = qpe_lab::channels::apply_channel(&rho, &ch, q).unwrap();
        prop_assert!(out.check().is_valid());
    }

    #[test]
    fn transpile_preserves_unitary(c in random_circuit(4, 12)) {
        let basis = transpile(&c).unwrap();
        let original = circuit_unitary(&c).unwrap();
        let rewritten = circuit_unitary(&basis).unwrap();
        prop_assert!(equivalent_up_to_phase(&rewritten, &original, 1e-10));
    }

    #[test]
    fn transpile_is_deterministic(c in random_circuit(4, 12)) {
        prop_assert_eq!(transpile(&c).unwrap().to_text(), transpile(&c).unwrap().to_text());
    }

    #[test]
    fn circuit_text_round_trips(c in random_circuit(5, 16)) {
        let parsed: Circuit = c.to_text().parse().unwrap();
        prop_assert_eq!(parsed.to_text(), c.to_text());
        prop_assert!(circuit_unitary(&parsed).unwrap().max_abs_diff(&circuit_unitary(&c).unwrap()) < 1e-15);
    }

    #[test]
    fn controlled_power_ignores_integer_shifts(theta in 0.0..1.0f64, j in 0u32..10) {
        let base = controlled_power(theta, j).matrix();
        let shifted = controlled_power(theta + 1.0, j).matrix();
        prop_assert!(base.max_abs_diff(&shifted) < 1e-9);
    }

    #[test]
    fn controlled_power_squares(theta in 0.0..1.0f64, j in 0u32..8) {
        let once = controlled_power(theta, j).matrix();
        let twice = controlled_power(theta, j + 1).matrix();
        prop_assert!(once.matmul(&once).unwrap().max_abs_diff(&twice) < 1e-9);
    }

    #[test]
    fn qpe_census_grows_with_n(n in 1usize..8, theta in 0.0..1.0f64) {
        let small = gate_census(&transpile(&build_qpe(n, theta).unwrap()).unwrap());
        let large = gate_census(&transpile(&build_qpe(n + 1, theta).unwrap()).unwrap());
        for name in qpe_lab::transpile::BASIS_NAMES {
            prop_assert!(large.count(name) >= small.count(name), "{} shrank", name);
        }
    }

    #[test]
    fn register_value_reads_measured_bits(width in 1usize..8, index in 0usize..256) {
        let index = index % (1 << width);
        let all: Vec<usize> = (0..width).collect();
        let k = register_value(index, &all, width);
        for (j, &q) in all.iter().enumerate() {
            prop_assert_eq!((k >> j) & 1, (index >> (width - 1 - q)) & 1);
        }
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec(
        (channel_kind(), 1usize..12, 0.0..1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..0.5f64, any::<bool>(), any::<u64>()),
        0..20,
    )) {
        let rows: Vec<SweepRow> = rows
            .into_iter()
            .map(|(channel, n, theta_actual, p, theta_bar, delta_theta, sampled, seed)| SweepRow {
                channel,
                n,
                theta_actual,
                p,
                theta_bar,
                delta_theta,
                mode: if sampled { SimMode::Sampled } else { SimMode::Exact },
                shots: if sampled { 4096 } else { 0 },
                seed,
            })
            .collect();
        let text = rows_to_csv_string(&rows, &[]).unwrap();
        prop_assert_eq!(read_rows_csv(text.as_bytes()).unwrap(), rows);
    }
}
