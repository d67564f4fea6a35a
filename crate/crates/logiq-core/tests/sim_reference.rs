//! Factoring transparency: random circuits applied through the factored
//! state reproduce a monolithic dense statevector exactly, including the
//! measurement sequence when both consume the same random stream.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use logiq_core::sim::dense::DenseState;
use logiq_core::sim::gates::Gate;
use logiq_core::sim::state::{FactoredState, QubitId};

#[derive(Debug, Clone, Copy)]
enum Op {
    Gate1(Gate, usize),
    Gate2(Gate, usize, usize),
    Measure(usize),
}

fn random_ops(rng: &mut ChaCha12Rng, n: usize, len: usize) -> Vec<Op> {
    (0..len)
        .map(|_| {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..8) {
                0 => Op::Gate1(Gate::H, q),
                1 => Op::Gate1(Gate::S, q),
                2 => Op::Gate1(Gate::T, q),
                3 => Op::Gate1(Gate::Ry(rng.gen_range(-3.0..3.0)), q),
                4 | 5 => {
                    let mut q2 = rng.gen_range(0..n);
                    while q2 == q {
                        q2 = rng.gen_range(0..n);
                    }
                    if rng.gen() {
                        Op::Gate2(Gate::Cx, q, q2)
                    } else {
                        Op::Gate2(Gate::Cz, q, q2)
                    }
                }
                6 => Op::Gate1(Gate::Phase(rng.gen_range(-3.0..3.0)), q),
                _ => Op::Measure(q),
            }
        })
        .collect()
}

#[test]
fn factored_state_matches_dense_reference_on_random_circuits() {
    let mut meta_rng = ChaCha12Rng::seed_from_u64(2718);
    for trial in 0..60 {
        let n = meta_rng.gen_range(2..=12usize);
        let len = meta_rng.gen_range(5..40);
        let ops = random_ops(&mut meta_rng, n, len);

        let mut factored = FactoredState::new();
        let qs: Vec<QubitId> = (0..n).map(|_| factored.alloc()).collect();
        let mut dense = DenseState::zeros(n);
        // Shared stream: both engines draw one uniform per measurement.
        let mut rng_f = ChaCha12Rng::seed_from_u64(1000 + trial);
        let mut rng_d = ChaCha12Rng::seed_from_u64(1000 + trial);

        for op in &ops {
            match *op {
                Op::Gate1(g, q) => {
                    factored.apply_gate(g, &[qs[q]]).unwrap();
                    dense.apply_gate(g, &[q]);
                }
                Op::Gate2(g, a, b) => {
                    factored.apply_gate(g, &[qs[a], qs[b]]).unwrap();
                    dense.apply_gate(g, &[a, b]);
                }
                Op::Measure(q) => {
                    let bf = factored.measure_isolate(qs[q], &mut rng_f).unwrap();
                    let bd = dense.measure(q, &mut rng_d);
                    assert_eq!(bf, bd, "trial {trial}: measurement diverged");
                }
            }
        }
        // Full-state overlap must be 1 (up to global phase per factor keeps
        // exact equality here: no phases are discarded by either engine).
        let amps = factored.assemble(&qs).unwrap();
        let ip: Complex64 = dense
            .amplitudes()
            .iter()
            .zip(&amps)
            .map(|(d, f)| d.conj() * f)
            .sum();
        assert!(
            (ip.norm() - 1.0).abs() < 1e-9,
            "trial {trial}: state overlap {}",
            ip.norm()
        );
        assert!((factored.factor_norm(qs[0]).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn qft_peak_factor_width_stays_within_three_blocks() {
    use logiq_core::sim::exec::simulate_single;
    use logiq_core::sim::noise::NoiseModel;
    use logiq_core::steane::builder::SingleQubitPrep;
    use logiq_core::steane::qft::{build_qft3, CtMethod};

    // Fourier-basis input entangles all blocks; the executor's gadget
    // contraction must still keep every factor at or below 21 qubits.
    let angles: Vec<f64> = (0..3)
        .map(|j| 2.0 * std::f64::consts::PI * 5.0 / f64::from(1u32 << (j + 1)))
        .collect();
    let preps = [
        SingleQubitPrep::Phase(angles[0]),
        SingleQubitPrep::Phase(angles[1]),
        SingleQubitPrep::Phase(angles[2]),
    ];
    for method in [CtMethod::Recursive, CtMethod::Ancilla] {
        let built = build_qft3(method, &preps, "widt").unwrap();
        let program = built.builder.finish();
        for seed in 0..3 {
            let run = simulate_single(&program, &NoiseModel::zero(), seed, 0, None).unwrap();
            let peak = run.state.peak_factor_width();
            assert!(peak <= 21, "{method:?}: peak factor width {peak}");
        }
    }
}
