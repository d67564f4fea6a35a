//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured values. Run with `cargo test --test acceptance`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use logiq_core::clifford::{CliffordElement, TwoQubitCliffordGroup};
use logiq_core::ir::qasm::{emit_qasm, parse_qasm};
use logiq_core::ir::resources::count_resources;
use logiq_core::ir::{BlockKind, BlockMeta, CBitRef, LogicalProgram, MeasBasis, QubitRef, Stmt};
use logiq_core::protocols::model::depolarizing_logical_model;
use logiq_core::protocols::qft::{hofmann_bounds, run_control_t_benchmark, run_qft_benchmark};
use logiq_core::protocols::rb::{build_rb_circuits, run_rb};
use logiq_core::protocols::tbench::{build_t_bench_circuits, run_t_bench, TPrep};
use logiq_core::protocols::{fit_rb, fit_t_decay, DecaySeries};
use logiq_core::sim::exec::{
    flat_summary, run_program, simulate_single, Fault, FlatOpKind,
};
use logiq_core::sim::gates::Gate;
use logiq_core::sim::noise::NoiseModel;
use logiq_core::steane::builder::{ProgramBuilder, SingleQubitPrep};
use logiq_core::steane::gadgets::TeleportMethod;
use logiq_core::steane::oracle;
use logiq_core::steane::qft::{build_qft3, CtMethod};

const ZERO: NoiseModel = NoiseModel::zero();

// ---------------------------------------------------------------------------
// Criterion 1: noiseless exactness of every protocol.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_noiseless_exactness() {
    let t0 = std::time::Instant::now();
    // Two-qubit RB at every published length.
    let group = TwoQubitCliffordGroup::enumerate();
    let circuits = build_rb_circuits(&group, &[2, 6, 10, 14], 2, 11).unwrap();
    let series = run_rb(&circuits, &ZERO, 10, 1).unwrap();
    for (i, &s) in series.survival.iter().enumerate() {
        assert_eq!(s, 1.0, "RB survival at L={}", series.lengths[i]);
        assert_eq!(series.retention[i], 1.0);
    }

    // T benchmark, both gadget methods, twirl on.
    for method in [TeleportMethod::One, TeleportMethod::Two] {
        let circuits =
            build_t_bench_circuits(&[4, 8, 12, 16], method, 2, 13, true, TPrep::NonFt).unwrap();
        let series = run_t_bench(&circuits, &ZERO, 10, 2, false).unwrap();
        for (i, &s) in series.survival.iter().enumerate() {
            assert_eq!(s, 1.0, "{method:?} survival at L={}", series.lengths[i]);
        }
    }

    // QFT over all 16 basis states, both controlled-T methods.
    for method in [CtMethod::Recursive, CtMethod::Ancilla] {
        let result = run_qft_benchmark(method, &ZERO, 6, 5).unwrap();
        assert_eq!(result.raw.f1, Some(1.0), "{method:?} F1");
        assert_eq!(result.raw.f2, Some(1.0), "{method:?} F2");
        assert_eq!(result.raw.favg_bound, Some(1.0));
        assert_eq!(result.retention, 1.0);
    }

    // Controlled-T over the eight mixed-eigenbasis states.
    let ct = run_control_t_benchmark(&ZERO, 6, 7).unwrap();
    for s in &ct.raw.per_state {
        assert_eq!(s.fidelity, Some(1.0), "control-T state {:?}/{}", s.basis, s.x);
    }
    println!(
        "criterion 1 pass: all noiseless protocols exact (RB, T x2, QFT x2, CT) in {:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: Clifford group enumeration, closure, inversion.
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_clifford_group() {
    let group = TwoQubitCliffordGroup::enumerate();
    assert_eq!(group.len(), 11_520);
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let a = group.get(rng.gen_range(0..group.len()));
        let b = group.get(rng.gen_range(0..group.len()));
        assert!(group.contains(&a.canonical_form().compose(b.canonical_form())));
    }
    for _ in 0..100 {
        let len = rng.gen_range(1..=10);
        let mut total = CliffordElement::identity();
        for _ in 0..len {
            total = group.get(rng.gen_range(0..group.len())).multiply(&total);
        }
        let inv = group.invert(&total).unwrap();
        assert!(inv.multiply(&total).canonical_form().is_identity());
    }
    println!(
        "criterion 2 pass: 11520 elements, closure x10^4, inversion x100 (mean CNOTs {:.4})",
        group.mean_cnots_per_element()
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: decoder completeness and exhaustive fault injection.
// ---------------------------------------------------------------------------

fn pauli_gates(kind: char, q: QubitRef) -> Vec<Stmt> {
    match kind {
        'X' => vec![Stmt::Gate { gate: Gate::X, qubits: vec![q] }],
        'Z' => vec![Stmt::Gate { gate: Gate::Z, qubits: vec![q] }],
        'Y' => vec![
            Stmt::Gate { gate: Gate::Z, qubits: vec![q] },
            Stmt::Gate { gate: Gate::X, qubits: vec![q] },
        ],
        _ => vec![],
    }
}

#[test]
fn criterion_03_decoder_and_fault_tolerance() {
    // (i) All 21 single-qubit Paulis before a destructive measurement decode
    // to the ideal logical value, on |0> in Z and |+> in X.
    for (prep, basis) in [
        (SingleQubitPrep::Zero, MeasBasis::Z),
        (SingleQubitPrep::Plus, MeasBasis::X),
    ] {
        for q in 0..7u32 {
            for kind in ['X', 'Y', 'Z'] {
                let mut b = ProgramBuilder::new("dec");
                let blk = b.add_block("q");
                b.encode_nonft(blk, &prep, false, None);
                for s in pauli_gates(kind, QubitRef { reg: blk.reg, index: q }) {
                    b.push_stmt(s);
                }
                b.meas_decode(blk, basis, false, "r", None);
                let program = b.finish();
                let run = simulate_single(&program, &ZERO, u64::from(q), 0, None).unwrap();
                assert_eq!(
                    run.record.registers["rLog"], 0,
                    "{kind} on qubit {q} in {basis:?}"
                );
            }
        }
    }

    // (ii) Exhaustive single-fault injection through the repeat-until-success
    // initializer: every accepted run, after one round of ideal QEC, is |0>.
    let mut b = ProgramBuilder::new("rus");
    let blk = b.add_block("q");
    let phys = b.add_phys_reg("p", 1);
    b.init_zero_ft_rus(blk, QubitRef { reg: phys, index: 0 }, "init", 3).unwrap();
    let program = b.finish();
    let summary = flat_summary(&program);
    let reference = oracle::encoded_zero();
    let mut sites = 0u32;
    let mut accepted_checked = 0u32;
    for op in &summary {
        let faults: Vec<Fault> = match op.kind {
            FlatOpKind::Gate1 | FlatOpKind::Reset => ['X', 'Y', 'Z']
                .into_iter()
                .map(|k| Fault::PauliAfter {
                    flat_index: op.index,
                    paulis: vec![(op.slots[0], k)],
                })
                .collect(),
            FlatOpKind::Gate1Block => op
                .slots
                .iter()
                .flat_map(|&slot| {
                    ['X', 'Y', 'Z'].into_iter().map(move |k| Fault::PauliAfter {
                        flat_index: op.index,
                        paulis: vec![(slot, k)],
                    })
                })
                .collect(),
            FlatOpKind::Gate2 => {
                let mut v = Vec::new();
                for a in ['I', 'X', 'Y', 'Z'] {
                    for bch in ['I', 'X', 'Y', 'Z'] {
                        if a == 'I' && bch == 'I' {
                            continue;
                        }
                        v.push(Fault::PauliAfter {
                            flat_index: op.index,
                            paulis: vec![(op.slots[0], a), (op.slots[1], bch)],
                        });
                    }
                }
                v
            }
            FlatOpKind::Measure => vec![Fault::FlipMeasurement { flat_index: op.index }],
            _ => vec![],
        };
        for fault in faults {
            sites += 1;
            for seed in 0..4 {
                let run = simulate_single(&program, &ZERO, seed, 0, Some(&fault)).unwrap();
                if run.record.rus_discard {
                    continue;
                }
                accepted_checked += 1;
                let qs: Vec<_> = (0..7)
                    .map(|i| {
                        run.qubit_ids
                            [program.qubit_slot(QubitRef { reg: blk.reg, index: i })]
                        .unwrap()
                    })
                    .collect();
                let amps = run.state.assemble(&qs).unwrap();
                let fixed = oracle::ideal_qec(&amps);
                assert!(
                    oracle::overlap2(&fixed, &reference) > 1.0 - 1e-9,
                    "fault at op {} leaves uncorrectable residue",
                    op.index
                );
            }
        }
    }
    assert!(sites > 150, "exhaustive enumeration covered {sites} faults");

    // (iii) Single Paulis before or after a transversal CNOT leave decodable
    // blocks: 2 blocks x 7 qubits x 3 Paulis x 2 positions.
    for position in [0u8, 1] {
        for target_block in [0u8, 1] {
            for q in 0..7u32 {
                for kind in ['X', 'Y', 'Z'] {
                    let mut b = ProgramBuilder::new("ftcx");
                    let qa = b.add_block("qa");
                    let qb = b.add_block("qb");
                    b.encode_nonft(qa, &SingleQubitPrep::Zero, false, None);
                    b.encode_nonft(qb, &SingleQubitPrep::Zero, false, None);
                    let blk = if target_block == 0 { qa } else { qb };
                    if position == 0 {
                        for s in pauli_gates(kind, QubitRef { reg: blk.reg, index: q }) {
                            b.push_stmt(s);
                        }
                    }
                    b.transversal_cx(qa, qb, None).unwrap();
                    if position == 1 {
                        for s in pauli_gates(kind, QubitRef { reg: blk.reg, index: q }) {
                            b.push_stmt(s);
                        }
                    }
                    b.meas_decode(qa, MeasBasis::Z, false, "ra", None);
                    b.meas_decode(qb, MeasBasis::Z, false, "rb", None);
                    let program = b.finish();
                    let run = simulate_single(&program, &ZERO, 1, 0, None).unwrap();
                    assert_eq!(run.record.registers["raLog"], 0, "{kind} q{q} pos{position}");
                    assert_eq!(run.record.registers["rbLog"], 0, "{kind} q{q} pos{position}");
                }
            }
        }
    }
    println!("criterion 3 pass: 21-Pauli decode, {sites} RUS fault sites ({accepted_checked} accepted runs), 84 CNOT faults");
}

// ---------------------------------------------------------------------------
// Criterion 4: depolarizing component model reproduces the published F1/F2.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_depolarizing_model() {
    let (f1, f2) = depolarizing_logical_model(0.9980, 0.990, 12_500, 4).unwrap();
    assert!((f1 - 0.898).abs() < 0.01, "F1 = {f1}");
    assert!((f2 - 0.889).abs() < 0.01, "F2 = {f2}");
    println!("criterion 4 pass: model F1 = {f1:.4} (0.898+-0.01), F2 = {f2:.4} (0.889+-0.01)");
}

// ---------------------------------------------------------------------------
// Criterion 5: Hofmann arithmetic to two decimals.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_hofmann_arithmetic() {
    let (lo, avg) = hofmann_bounds(0.78, 0.66, 8);
    assert!((lo - 0.44).abs() < 5e-3);
    assert_eq!((avg * 100.0).round() as i64, 50);
    let (lo2, avg2) = hofmann_bounds(0.72, 0.65, 8);
    assert!((lo2 - 0.37).abs() < 5e-3);
    assert_eq!((avg2 * 100.0).round() as i64, 44);
    println!("criterion 5 pass: (0.78,0.66)->0.50 and (0.72,0.65)->0.44");
}

// ---------------------------------------------------------------------------
// Criterion 6: Table-II resource counts.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_resource_counts() {
    let preps = [SingleQubitPrep::Zero, SingleQubitPrep::Zero, SingleQubitPrep::Zero];
    let anc = build_qft3(CtMethod::Ancilla, &preps, "res-a").unwrap();
    let r = count_resources(&anc.builder.finish());
    assert_eq!(r.physical_qubits, 28);
    assert_eq!((r.injections_min, r.injections_max), (11, 11));
    assert_eq!((r.logical_tq_min, r.logical_tq_max), (13, 14));
    assert!(
        r.physical_tq_max as f64 <= 263.0 * 1.15 && r.physical_tq_min as f64 >= 256.0 * 0.85,
        "ancilla physical TQ {}-{}",
        r.physical_tq_min,
        r.physical_tq_max
    );

    let rec = build_qft3(CtMethod::Recursive, &preps, "res-r").unwrap();
    let r2 = count_resources(&rec.builder.finish());
    assert_eq!(r2.physical_qubits, 28);
    assert_eq!((r2.injections_min, r2.injections_max), (9, 12));
    assert_eq!((r2.logical_tq_min, r2.logical_tq_max), (15, 18));
    assert!(
        r2.physical_tq_max as f64 <= 291.0 * 1.15 && r2.physical_tq_min as f64 >= 237.0 * 0.85,
        "recursive physical TQ {}-{}",
        r2.physical_tq_min,
        r2.physical_tq_max
    );
    println!(
        "criterion 6 pass: ancilla 11 inj / 13-14 TQ / 28q (phys {}-{}), recursive 9-12 / 15-18 (phys {}-{})",
        r.physical_tq_min, r.physical_tq_max, r2.physical_tq_min, r2.physical_tq_max
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: fit recovery with bootstrap coverage.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_fit_coverage() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let shots_per_point = 1000u64; // 10 circuits x 100 shots

    let mut rb_cover = 0;
    let f_true = 0.99f64;
    for rep in 0..50 {
        let lengths = vec![2u32, 6, 10, 14];
        let survival: Vec<f64> = lengths
            .iter()
            .map(|&l| {
                let p = 0.75 * f_true.powi(l as i32) + 0.25;
                let dist = rand_distr::Binomial::new(shots_per_point, p).unwrap();
                rng.sample(dist) as f64 / shots_per_point as f64
            })
            .collect();
        let series = DecaySeries {
            protocol: "rb".into(),
            method: "synthetic".into(),
            lengths,
            survival,
            shots: vec![shots_per_point; 4],
            retention: vec![1.0; 4],
            seed: 100 + rep,
        };
        let fit = fit_rb(&series, 1.5).unwrap();
        if (fit.params[1] - f_true).abs() <= 3.0 * fit.param_stderr[1].max(1e-9) {
            rb_cover += 1;
        }
    }
    assert!(rb_cover >= 48, "rb coverage {rb_cover}/50");

    let mut t_cover = 0;
    let eps_true = 0.005f64;
    for rep in 0..50 {
        let lengths = vec![4u32, 8, 12, 16];
        let survival: Vec<f64> = lengths
            .iter()
            .map(|&l| {
                let p = 0.5 + 0.5 * (1.0 - 2.0 * eps_true).powi(l as i32);
                let dist = rand_distr::Binomial::new(shots_per_point, p).unwrap();
                rng.sample(dist) as f64 / shots_per_point as f64
            })
            .collect();
        let series = DecaySeries {
            protocol: "t-bench".into(),
            method: "synthetic".into(),
            lengths,
            survival,
            shots: vec![shots_per_point; 4],
            retention: vec![1.0; 4],
            seed: 200 + rep,
        };
        let fit = fit_t_decay(&series).unwrap();
        if (fit.params[0] - eps_true).abs() <= 3.0 * fit.param_stderr[0].max(1e-9) {
            t_cover += 1;
        }
    }
    assert!(t_cover >= 48, "t coverage {t_cover}/50");
    println!("criterion 7 pass: coverage RB {rb_cover}/50, T {t_cover}/50 at 3 bootstrap SE");
}

// ---------------------------------------------------------------------------
// Criterion 8: Eq.-6 exactness under injected logical dephasing.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_dephasing_oracle() {
    // Apply the logical P(pi/4) directly as a parity phase on the logical-Z
    // support, bypassing the gadget, with probability eps of a logical Z per
    // step; survival must match 1/2 + (1/2)(1-2 eps)^L binomially.
    use logiq_core::sim::state::FactoredState;
    use logiq_core::steane::code;

    let eps = 0.03f64;
    let shots = 10_000u64;
    let mut b = ProgramBuilder::new("enc");
    let blk = b.add_block("q");
    b.encode_nonft(blk, &SingleQubitPrep::Plus, false, None);
    let program = b.finish();

    for length in [4u32, 8, 12, 16] {
        let mut survive = 0u64;
        for shot in 0..shots {
            let run = simulate_single(&program, &ZERO, 8, shot, None).unwrap();
            let mut state: FactoredState = run.state;
            let qs: Vec<_> = (0..7)
                .map(|i| {
                    run.qubit_ids[program.qubit_slot(QubitRef { reg: blk.reg, index: i })]
                        .unwrap()
                })
                .collect();
            let logical_support = [qs[4], qs[5], qs[6]];
            let mut rng = ChaCha12Rng::seed_from_u64(0x5eed ^ u64::from(length));
            rng.set_stream(shot);
            for _ in 0..length {
                state
                    .apply_parity_phase(&logical_support, std::f64::consts::FRAC_PI_4)
                    .unwrap();
                if rng.gen::<f64>() < eps {
                    for &q in &logical_support {
                        state.apply_pauli('Z', q).unwrap();
                    }
                }
            }
            // Logical X readout.
            for &q in &qs {
                state.apply_gate(Gate::H, &[q]).unwrap();
            }
            let mut bits = 0u8;
            for (i, &q) in qs.iter().enumerate() {
                if state.measure(q, true, &mut rng).unwrap() {
                    bits |= 1 << i;
                }
            }
            let rec = code::decode_measurement(bits);
            let expected = (length / 4) % 2 == 1;
            if rec.decoded_logical == expected {
                survive += 1;
            }
        }
        let p = survive as f64 / shots as f64;
        let expect = 0.5 + 0.5 * (1.0 - 2.0 * eps).powi(length as i32);
        let sigma = (expect * (1.0 - expect) / shots as f64).sqrt();
        assert!(
            (p - expect).abs() < 3.0 * sigma,
            "L={length}: {p} vs {expect} (sigma {sigma})"
        );
    }
    println!("criterion 8 pass: Eq.-6 dephasing decay exact at eps = {eps} over L in 4..16");
}

// ---------------------------------------------------------------------------
// Criterion 9: qualitative hardware-shape checks under preset noise.
// ---------------------------------------------------------------------------

fn wilson_sigma(p: f64, n: f64) -> f64 {
    ((p * (1.0 - p)).max(1e-6) / n.max(1.0)).sqrt()
}

#[test]
fn criterion_09a_postselection_improves_fidelity() {
    let noise = NoiseModel::preset("h2-1").unwrap();
    // Amplify the two-qubit error so the effect is resolvable at modest
    // shot counts; post-selection gains grow with p2.
    let noise = NoiseModel { p2: noise.p2 * 3.0, ..noise };

    // T benchmark, both methods: pooled over lengths.
    for method in [TeleportMethod::One, TeleportMethod::Two] {
        let circuits =
            build_t_bench_circuits(&[4, 8, 12, 16], method, 4, 21, true, TPrep::NonFt).unwrap();
        let raw = run_t_bench(&circuits, &noise, 60, 3, false).unwrap();
        let ps = run_t_bench(&circuits, &noise, 60, 3, true).unwrap();
        let pool = |s: &DecaySeries| {
            let num: f64 = s
                .survival
                .iter()
                .zip(&s.shots)
                .map(|(&p, &n)| p * n as f64)
                .sum();
            let den: f64 = s.shots.iter().map(|&n| n as f64).sum();
            (num / den, den)
        };
        let (p_raw, n_raw) = pool(&raw);
        let (p_ps, n_ps) = pool(&ps);
        let sigma = (wilson_sigma(p_raw, n_raw).powi(2) + wilson_sigma(p_ps, n_ps).powi(2)).sqrt();
        assert!(
            p_ps >= p_raw - 3.0 * sigma,
            "{method:?}: ps {p_ps:.3} vs raw {p_raw:.3} (sigma {sigma:.4})"
        );
    }

    // QFT, both methods, per basis.
    for method in [CtMethod::Recursive, CtMethod::Ancilla] {
        let result = run_qft_benchmark(method, &noise, 25, 23).unwrap();
        for (raw, ps) in [
            (result.raw.f1.unwrap(), result.postselected.f1.unwrap()),
            (result.raw.f2.unwrap(), result.postselected.f2.unwrap()),
        ] {
            let sigma =
                (wilson_sigma(raw, 180.0).powi(2) + wilson_sigma(ps, 60.0).powi(2)).sqrt();
            assert!(
                ps >= raw - 3.0 * sigma,
                "{method:?}: ps {ps:.3} vs raw {raw:.3}"
            );
        }
        assert!(result.retention > 0.0 && result.retention < 1.0);
    }

    // Controlled-T.
    let ct = run_control_t_benchmark(&noise, 40, 29).unwrap();
    for (raw, ps) in [
        (ct.raw.f1.unwrap(), ct.postselected.f1.unwrap()),
        (ct.raw.f2.unwrap(), ct.postselected.f2.unwrap()),
    ] {
        let sigma = (wilson_sigma(raw, 160.0).powi(2) + wilson_sigma(ps, 60.0).powi(2)).sqrt();
        assert!(ps >= raw - 3.0 * sigma, "control-T ps {ps:.3} vs raw {raw:.3}");
    }
    println!("criterion 9a pass: post-selected >= raw in all T/QFT/CT cells (3 sigma)");
}

#[test]
fn criterion_09b_partial_ft_rus_ordering() {
    // Two-qubit-gate-dominated noise plus idle memory error: limit 1 keeps
    // fewer shots but the kept shots saw fewer gates and less data idling.
    let noise = NoiseModel {
        p2: 0.012,
        p_idle_per_tick: 0.004,
        ..NoiseModel::zero()
    };
    let mut results = Vec::new();
    for limit in [1u32, 2] {
        let circuits = build_t_bench_circuits(
            &[4, 8, 12],
            TeleportMethod::Two,
            3,
            31,
            false,
            TPrep::PartialFt { rus_limit: limit },
        )
        .unwrap();
        let series = run_t_bench(&circuits, &noise, 220, 5, false).unwrap();
        let fit = fit_t_decay(&series).unwrap();
        // Retention at L = 8.
        let i8 = series.lengths.iter().position(|&l| l == 8).unwrap();
        results.push((limit, fit.favg, series.retention[i8]));
    }
    let (_, f1, r1) = results[0];
    let (_, f2, r2) = results[1];
    assert!(r1 < r2, "retention ordering: limit1 {r1:.3} < limit2 {r2:.3}");
    assert!(f1 > f2, "fidelity ordering: limit1 {f1:.4} > limit2 {f2:.4}");
    println!(
        "criterion 9b pass: limit1 (F={f1:.4}, retention={r1:.3}) vs limit2 (F={f2:.4}, retention={r2:.3})"
    );
}

#[test]
fn criterion_09c_method_two_not_worse_under_idle_noise() {
    let noise = NoiseModel { p_idle_per_tick: 0.004, ..NoiseModel::zero() };
    let mut eps = Vec::new();
    let mut se = Vec::new();
    for method in [TeleportMethod::One, TeleportMethod::Two] {
        let circuits =
            build_t_bench_circuits(&[4, 8, 12, 16], method, 3, 41, true, TPrep::NonFt).unwrap();
        let series = run_t_bench(&circuits, &noise, 250, 7, false).unwrap();
        let fit = fit_t_decay(&series).unwrap();
        eps.push(fit.params[0]);
        se.push(fit.param_stderr[0]);
    }
    let sigma = (se[0].powi(2) + se[1].powi(2)).sqrt();
    assert!(
        eps[1] <= eps[0] + 3.0 * sigma,
        "method two eps {:.5} vs method one {:.5} (sigma {:.5})",
        eps[1],
        eps[0],
        sigma
    );
    println!(
        "criterion 9c pass: idle-dominated eps method1 {:.5}, method2 {:.5}",
        eps[0], eps[1]
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: interchange round trip and simulation equivalence.
// ---------------------------------------------------------------------------

fn random_program(rng: &mut ChaCha12Rng, idx: usize) -> LogicalProgram {
    let mut p = LogicalProgram::new(format!("corpus-{idx}"));
    let nq = rng.gen_range(1..=3u32);
    let qregs: Vec<usize> = (0..nq)
        .map(|i| p.add_qreg(format!("q{i}"), rng.gen_range(1..=4)))
        .collect();
    let cregs: Vec<usize> =
        (0..rng.gen_range(1..=2u32)).map(|i| p.add_creg(format!("c{i}"), rng.gen_range(1..=4))).collect();
    let random_qubit = |p: &LogicalProgram, rng: &mut ChaCha12Rng| {
        let reg = qregs[rng.gen_range(0..qregs.len())];
        QubitRef { reg, index: rng.gen_range(0..p.qregs[reg].width) }
    };
    let n_stmts = rng.gen_range(3..25);
    let mut stmts = Vec::new();
    for _ in 0..n_stmts {
        let q = random_qubit(&p, rng);
        let stmt = match rng.gen_range(0..10) {
            0 => Stmt::Gate { gate: Gate::H, qubits: vec![q] },
            1 => Stmt::Gate { gate: Gate::S, qubits: vec![q] },
            2 => Stmt::Gate { gate: Gate::T, qubits: vec![q] },
            3 => Stmt::Gate { gate: Gate::Ry(rng.gen_range(-3.0..3.0)), qubits: vec![q] },
            4 => Stmt::Gate { gate: Gate::Phase(rng.gen_range(-3.0..3.0)), qubits: vec![q] },
            5 => {
                let mut q2 = random_qubit(&p, rng);
                let mut tries = 0;
                while q2 == q && tries < 10 {
                    q2 = random_qubit(&p, rng);
                    tries += 1;
                }
                if q2 == q {
                    Stmt::Gate { gate: Gate::H, qubits: vec![q] }
                } else if rng.gen() {
                    Stmt::Gate { gate: Gate::Cx, qubits: vec![q, q2] }
                } else {
                    Stmt::Gate { gate: Gate::Cz, qubits: vec![q, q2] }
                }
            }
            6 => {
                let reg = cregs[rng.gen_range(0..cregs.len())];
                let index = rng.gen_range(0..p.cregs[reg].width);
                Stmt::Measure { qubit: q, target: CBitRef { reg, index } }
            }
            7 => Stmt::Reset { qubit: q },
            8 => {
                let creg = cregs[rng.gen_range(0..cregs.len())];
                let width = p.cregs[creg].width;
                let value = rng.gen_range(0..(1u64 << width));
                Stmt::If {
                    creg,
                    value,
                    body: Box::new(Stmt::Gate { gate: Gate::X, qubits: vec![q] }),
                }
            }
            _ => Stmt::Barrier { qubits: vec![q] },
        };
        stmts.push(stmt);
    }
    // Wrap a run of statements in a labelled (sometimes guarded) block.
    if stmts.len() > 4 && rng.gen::<bool>() {
        let tail = stmts.split_off(stmts.len() / 2);
        let guard = if rng.gen::<bool>() {
            Some((cregs[0], rng.gen_range(0..(1u64 << p.cregs[cregs[0]].width))))
        } else {
            None
        };
        stmts.push(Stmt::Block {
            meta: BlockMeta { kind: BlockKind::Span { label: format!("s{idx}") }, guard },
            stmts: tail,
        });
    }
    p.stmts = stmts;
    p
}

#[test]
fn criterion_10_interchange() {
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    let noise = NoiseModel { p1: 0.01, p_spam: 0.02, ..NoiseModel::zero() };
    let mut simulated = 0;
    for i in 0..1000 {
        let program = random_program(&mut rng, i);
        assert!(program.validate().is_empty(), "corpus program {i} invalid");
        let text = emit_qasm(&program).unwrap();
        let parsed = parse_qasm(&text).unwrap();
        let text2 = emit_qasm(&parsed).unwrap();
        assert_eq!(text, text2, "byte-exact round trip failed for program {i}");
        if i % 10 == 0 {
            let r1 = run_program(&program, &noise, 40, 1234 + i as u64).unwrap();
            let r2 = run_program(&parsed, &noise, 40, 1234 + i as u64).unwrap();
            assert_eq!(r1, r2, "simulation equivalence failed for program {i}");
            simulated += 1;
        }
    }
    // Also round-trip the real benchmark programs (gadget metadata included).
    let built = build_qft3(
        CtMethod::Ancilla,
        &[SingleQubitPrep::One, SingleQubitPrep::Zero, SingleQubitPrep::One],
        "rt-qft",
    )
    .unwrap();
    let program = built.builder.finish();
    let text = emit_qasm(&program).unwrap();
    let parsed = parse_qasm(&text).unwrap();
    assert_eq!(emit_qasm(&parsed).unwrap(), text);
    let r1 = run_program(&program, &ZERO, 5, 7).unwrap();
    let r2 = run_program(&parsed, &ZERO, 5, 7).unwrap();
    assert_eq!(r1, r2);
    println!("criterion 10 pass: 1000-program byte-exact corpus, {simulated}+1 simulation-equivalence checks");
}

// ---------------------------------------------------------------------------
// Supplementary spec examples tied to published numbers.
// ---------------------------------------------------------------------------

#[test]
fn supplementary_rus_discard_rate_is_small_under_preset_noise() {
    // "At most a few percent" of shots discarded by the fault-tolerant
    // initialization under machine-preset parameters.
    let mut b = ProgramBuilder::new("rus-rate");
    let blk = b.add_block("q");
    let phys = b.add_phys_reg("p", 1);
    b.init_zero_ft_rus(blk, QubitRef { reg: phys, index: 0 }, "init", 3).unwrap();
    b.meas_decode(blk, MeasBasis::Z, false, "r", None);
    let program = b.finish();
    let noise = NoiseModel::preset("h2-1").unwrap();
    let records = run_program(&program, &noise, 10_000, 77).unwrap();
    let discarded = records.iter().filter(|r| r.rus_discard).count() as f64 / 10_000.0;
    assert!(discarded < 0.05, "discard rate {discarded}");
    println!("supplementary pass: RUS discard rate {discarded:.4} < 0.05");
}

#[test]
fn supplementary_qft_unitary_equivalence_on_mub_inputs() {
    // Both methods agree with the dense three-qubit oracle on every MUB
    // input at the state level.
    use logiq_core::protocols::qft::{qft_reference, MubBasis};
    for method in [CtMethod::Recursive, CtMethod::Ancilla] {
        for basis in [MubBasis::Computational, MubBasis::Fourier] {
            for x in 0..8u8 {
                let reference = qft_reference(x, basis).unwrap();
                let preps: [SingleQubitPrep; 3] = match basis {
                    MubBasis::Computational => [0, 1, 2].map(|j| {
                        if (x >> (2 - j)) & 1 == 1 {
                            SingleQubitPrep::One
                        } else {
                            SingleQubitPrep::Zero
                        }
                    }),
                    MubBasis::Fourier => {
                        [0, 1, 2].map(|j| SingleQubitPrep::Phase(reference.angles[j]))
                    }
                };
                let built = build_qft3(method, &preps, "mub").unwrap();
                let outputs = built.outputs;
                let program = built.builder.finish();
                let run = simulate_single(&program, &ZERO, 3, 0, None).unwrap();
                let mut qs = Vec::new();
                for blk in outputs {
                    for i in 0..7 {
                        qs.push(
                            run.qubit_ids
                                [program.qubit_slot(QubitRef { reg: blk.reg, index: i })]
                            .unwrap(),
                        );
                    }
                }
                let amps = run.state.assemble(&qs).unwrap();
                // Dense oracle: 3-qubit QFT output amplitudes (wire j = bit j).
                let ideal = dense_qft_output(x, basis);
                let encoded = oracle::encoded_logical_state(&ideal);
                assert!(
                    oracle::overlap2(&amps, &encoded) > 1.0 - 1e-9,
                    "{method:?} {basis:?} x={x}"
                );
            }
        }
    }
    println!("supplementary pass: QFT state-level unitary equivalence on all 16 MUB inputs, both methods");
}

/// Dense-oracle ideal output of the (swapless) QFT circuit for either basis.
fn dense_qft_output(x: u8, basis: logiq_core::protocols::qft::MubBasis) -> Vec<Complex64> {
    use logiq_core::protocols::qft::MubBasis;
    let mut out = vec![Complex64::new(0.0, 0.0); 8];
    match basis {
        MubBasis::Computational => {
            let norm = 1.0 / 8.0f64.sqrt();
            for idx in 0..8usize {
                let mut phase = 0.0;
                for j in 0..3 {
                    if idx & (1 << j) != 0 {
                        phase += 2.0 * std::f64::consts::PI * f64::from(x)
                            / f64::from(1u32 << (3 - j));
                    }
                }
                out[idx] = Complex64::from_polar(norm, phase);
            }
        }
        MubBasis::Fourier => {
            out[(8 - usize::from(x)) % 8] = Complex64::new(1.0, 0.0);
        }
    }
    out
}

#[test]
fn supplementary_monotonic_noise_response() {
    // Fitted decay worsens monotonically with p2 at matched seeds.
    let group = TwoQubitCliffordGroup::enumerate();
    let circuits = build_rb_circuits(&group, &[2, 6, 10], 3, 51).unwrap();
    let mut fs = Vec::new();
    for &p2 in &[0.002, 0.01, 0.03] {
        let noise = NoiseModel { p2, ..NoiseModel::zero() };
        let series = run_rb(&circuits, &noise, 120, 9).unwrap();
        let fit = fit_rb(&series, group.mean_cnots_per_element()).unwrap();
        fs.push(fit.params[1]);
    }
    assert!(fs[0] > fs[1] && fs[1] > fs[2], "f not monotone: {fs:?}");
    println!("supplementary pass: fitted f monotone in p2: {fs:?}");
}
