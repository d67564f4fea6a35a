//! Hot-path benchmarks: Clifford enumeration, factored-state gate
//! application, gadget execution, and a full noiseless QFT trajectory.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use logiq_core::clifford::TwoQubitCliffordGroup;
use logiq_core::sim::exec::run_program;
use logiq_core::sim::gates::Gate;
use logiq_core::sim::noise::NoiseModel;
use logiq_core::sim::state::FactoredState;
use logiq_core::steane::builder::{ProgramBuilder, SingleQubitPrep};
use logiq_core::steane::gadgets::{teleport_p_gate, TeleportMethod};
use logiq_core::steane::qft::{build_qft3, CtMethod};

fn clifford_enumeration(c: &mut Criterion) {
    c.bench_function("clifford/enumerate_11520", |b| {
        b.iter(|| TwoQubitCliffordGroup::enumerate().len())
    });
}

fn factored_gates(c: &mut Criterion) {
    c.bench_function("sim/cx_chain_14q", |b| {
        b.iter_batched(
            || {
                let mut s = FactoredState::new();
                let qs: Vec<_> = (0..14).map(|_| s.alloc()).collect();
                for &q in &qs {
                    s.apply_gate(Gate::H, &[q]).unwrap();
                }
                (s, qs)
            },
            |(mut s, qs)| {
                for w in qs.windows(2) {
                    s.apply_gate(Gate::Cx, &[w[0], w[1]]).unwrap();
                }
                s.num_allocated()
            },
            BatchSize::SmallInput,
        )
    });
}

fn teleport_gadget(c: &mut Criterion) {
    let mut b = ProgramBuilder::new("bench-gadget");
    let q = b.add_block("q");
    let a = b.add_block("a");
    b.encode_nonft(q, &SingleQubitPrep::Plus, false, None);
    teleport_p_gate(&mut b, q, a, std::f64::consts::FRAC_PI_4, TeleportMethod::Two, None)
        .unwrap();
    let program = b.finish();
    let noise = NoiseModel::preset("h2-1").unwrap();
    c.bench_function("gadget/teleport_t_noisy_shot", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            run_program(&program, &noise, 1, seed).unwrap().len()
        })
    });
}

fn qft_trajectory(c: &mut Criterion) {
    let preps = [SingleQubitPrep::One, SingleQubitPrep::Zero, SingleQubitPrep::One];
    let built = build_qft3(CtMethod::Ancilla, &preps, "bench-qft").unwrap();
    let program = built.builder.finish();
    let mut group = c.benchmark_group("qft");
    group.sample_size(10);
    group.bench_function("ancilla_noiseless_shot", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            run_program(&program, &NoiseModel::zero(), 1, seed).unwrap().len()
        })
    });
    group.finish();
}

criterion_group!(benches, clifford_enumeration, factored_gates, teleport_gadget, qft_trajectory);
criterion_main!(benches);
