//! Batch driver: configure, run, and report every experiment from the
//! command line with deterministic seeds and reproducible artifacts.
//!
//! Each run writes to a directory keyed by the config hash (no timestamps):
//! a manifest, machine-readable results JSON, plot-ready decay CSVs, emitted
//! OpenQASM where applicable, and a human-readable summary table. Re-running
//! the same config produces byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use logiq_core::clifford::TwoQubitCliffordGroup;
use logiq_core::ir::qasm::emit_qasm;
use logiq_core::ir::resources::count_resources;
use logiq_core::protocols::qft::{
    build_qft_state_program, qft_reference, run_control_t_benchmark, run_qft_benchmark,
    MubBasis, MubBenchmarkResult,
};
use logiq_core::protocols::rb::{build_rb_circuits, run_rb};
use logiq_core::protocols::tbench::{build_t_bench_circuits, run_t_bench, TPrep};
use logiq_core::protocols::{fit_rb, fit_t_decay, FitResult};
use logiq_core::sim::noise::NoiseModel;
use logiq_core::steane::builder::SingleQubitPrep;
use logiq_core::steane::gadgets::TeleportMethod;
use logiq_core::steane::qft::{build_qft3, CtMethod};

#[derive(Parser)]
#[command(name = "logiq", about = "Logical-qubit benchmarking toolkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Two-qubit logical randomized benchmarking.
    Rb(ProtoArgs),
    /// Logical T-gate decay benchmark.
    TBench(ProtoArgs),
    /// Three-qubit logical QFT fidelity lower bound.
    Qft(ProtoArgs),
    /// Logical controlled-T fidelity lower bound.
    ControlT(ProtoArgs),
    /// Partially fault-tolerant T benchmark (simulation of the flagged
    /// repeat-until-success preparation).
    FtTSim(ProtoArgs),
    /// Emit benchmark programs as OpenQASM 2.0.
    EmitQasm(ProtoArgs),
    /// Static resource counts for the QFT constructions.
    Resources(ProtoArgs),
    /// Run from a JSON config document.
    Run {
        /// Path to the config JSON.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Clone)]
struct ProtoArgs {
    /// Noise preset (zero, h1-1, h2-1).
    #[arg(long, default_value = "zero")]
    noise: String,
    /// Shots per circuit (decay benchmarks) or per state (QFT family).
    #[arg(long)]
    shots: Option<u64>,
    /// Master seed.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Sequence lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<u32>>,
    /// Random circuits per sequence length.
    #[arg(long)]
    circuits: Option<u32>,
    /// Gadget or controlled-T method: one/two or recursive/ancilla.
    #[arg(long)]
    method: Option<String>,
    /// Report the post-selected analysis alongside the raw one.
    #[arg(long, default_value_t = true)]
    postselect: bool,
    /// Twirl the injected state in the T benchmark.
    #[arg(long, default_value_t = true)]
    twirl: bool,
    /// Repeat-until-success limits for ft-t-sim.
    #[arg(long, value_delimiter = ',')]
    rus_limits: Option<Vec<u32>>,
    /// Output root (defaults to $LOGIQ_OUT or ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// The protocol configuration; JSON documents use exactly these keys.
#[derive(Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    protocol: String,
    noise: NoiseSpec,
    shots: u64,
    seed: u64,
    #[serde(default)]
    lengths: Vec<u32>,
    #[serde(default = "default_circuits")]
    circuits_per_length: u32,
    #[serde(default)]
    method: String,
    #[serde(default = "default_true")]
    postselect: bool,
    #[serde(default = "default_true")]
    twirl: bool,
    #[serde(default)]
    rus_limits: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    out: Option<PathBuf>,
}

fn default_circuits() -> u32 {
    10
}

fn default_true() -> bool {
    true
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum NoiseSpec {
    Preset(String),
    Explicit(NoiseModel),
}

impl NoiseSpec {
    fn resolve(&self) -> Result<NoiseModel, String> {
        let m = match self {
            NoiseSpec::Preset(name) => {
                NoiseModel::preset(name).map_err(|e| format!("noise: {e}"))?
            }
            NoiseSpec::Explicit(m) => *m,
        };
        m.validate().map_err(|e| format!("noise: {e}"))?;
        Ok(m)
    }
}

impl ProtoArgs {
    fn into_config(self, protocol: &str) -> RunConfig {
        let (default_lengths, default_shots): (&[u32], u64) = match protocol {
            "rb" => (&[2, 6, 10, 14], 100),
            "t-bench" | "ft-t-sim" => (&[4, 8, 12, 16], 100),
            _ => (&[], 100),
        };
        RunConfig {
            protocol: protocol.to_string(),
            noise: NoiseSpec::Preset(self.noise),
            shots: self.shots.unwrap_or(default_shots),
            seed: self.seed,
            lengths: self.lengths.unwrap_or_else(|| default_lengths.to_vec()),
            circuits_per_length: self.circuits.unwrap_or(10),
            method: self.method.unwrap_or_else(|| match protocol {
                "t-bench" | "ft-t-sim" => "two".into(),
                _ => "ancilla".into(),
            }),
            postselect: self.postselect,
            twirl: self.twirl,
            rus_limits: self.rus_limits.unwrap_or_else(|| vec![1, 2]),
            out: self.out,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.cmd {
        Cmd::Rb(a) => a.into_config("rb"),
        Cmd::TBench(a) => a.into_config("t-bench"),
        Cmd::Qft(a) => a.into_config("qft"),
        Cmd::ControlT(a) => a.into_config("control-t"),
        Cmd::FtTSim(a) => a.into_config("ft-t-sim"),
        Cmd::EmitQasm(a) => a.into_config("emit-qasm"),
        Cmd::Resources(a) => a.into_config("resources"),
        Cmd::Run { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::FAILURE;
                }
            };
            match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: bad config: {e}");
                    return ExitCode::FAILURE;
                }
            }
        }
    };
    match execute(&config) {
        Ok(dir) => {
            println!("artifacts written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn out_dir(config: &RunConfig, hash: &str) -> PathBuf {
    let root = config
        .out
        .clone()
        .or_else(|| std::env::var_os("LOGIQ_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(format!("{}-{}", config.protocol, &hash[..12]))
}

fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| format!("writing {name}: {e}"))
}

fn execute(config: &RunConfig) -> Result<PathBuf, String> {
    let noise = config.noise.resolve()?;
    let hash = config_hash(config);
    let dir = out_dir(config, &hash);
    std::fs::create_dir_all(&dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;

    let manifest = serde_json::json!({
        "config": config,
        "config_hash": hash,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_file(&dir, "manifest.json", &format!("{:#}\n", manifest))?;

    let mut summary = String::new();
    match config.protocol.as_str() {
        "rb" => run_rb_protocol(config, &noise, &dir, &mut summary)?,
        "t-bench" => run_tbench_protocol(config, &noise, &dir, &mut summary, TPrep::NonFt)?,
        "ft-t-sim" => run_ft_t_protocol(config, &noise, &dir, &mut summary)?,
        "qft" => run_qft_protocol(config, &noise, &dir, &mut summary)?,
        "control-t" => run_ct_protocol(config, &noise, &dir, &mut summary)?,
        "emit-qasm" => run_emit_protocol(config, &dir, &mut summary)?,
        "resources" => run_resources_protocol(config, &dir, &mut summary)?,
        other => return Err(format!("unknown protocol '{other}'")),
    }
    write_file(&dir, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(dir)
}

fn parse_teleport_method(name: &str) -> Result<TeleportMethod, String> {
    match name {
        "one" | "1" => Ok(TeleportMethod::One),
        "two" | "2" => Ok(TeleportMethod::Two),
        other => Err(format!("method must be one|two, got '{other}'")),
    }
}

fn parse_ct_method(name: &str) -> Result<CtMethod, String> {
    match name {
        "recursive" => Ok(CtMethod::Recursive),
        "ancilla" => Ok(CtMethod::Ancilla),
        other => Err(format!("method must be recursive|ancilla, got '{other}'")),
    }
}

fn fit_json(fit: &FitResult) -> serde_json::Value {
    serde_json::to_value(fit).expect("fit serializes")
}

fn run_rb_protocol(
    config: &RunConfig,
    noise: &NoiseModel,
    dir: &Path,
    summary: &mut String,
) -> Result<(), String> {
    let group = TwoQubitCliffordGroup::enumerate();
    let circuits = build_rb_circuits(&group, &config.lengths, config.circuits_per_length, config.seed)
        .map_err(|e| e.to_string())?;
    let series = run_rb(&circuits, noise, config.shots, config.seed).map_err(|e| e.to_string())?;
    let mean_cnots = group.mean_cnots_per_element();
    let fit = fit_rb(&series, mean_cnots).map_err(|e| e.to_string())?;
    write_file(dir, "decay.csv", &series.to_csv())?;
    let results = serde_json::json!({
        "series": series,
        "fit": fit_json(&fit),
        "mean_cnots_per_clifford": mean_cnots,
    });
    write_file(dir, "results.json", &format!("{:#}\n", results))?;
    let _ = writeln!(summary, "two-qubit logical RB ({} shots/circuit)", config.shots);
    let _ = writeln!(
        summary,
        "  f = {:.6} +- {:.6}   F_avg/Clifford = {:.6} +- {:.6}",
        fit.params[1], fit.param_stderr[1], fit.favg, fit.favg_stderr
    );
    let _ = writeln!(
        summary,
        "  per-CNOT infidelity = {:.3e} (mean CNOTs/Clifford = {:.4})",
        fit.per_cnot_infidelity.unwrap_or(0.0),
        mean_cnots
    );
    Ok(())
}

fn run_tbench_protocol(
    config: &RunConfig,
    noise: &NoiseModel,
    dir: &Path,
    summary: &mut String,
    prep: TPrep,
) -> Result<(), String> {
    let method = parse_teleport_method(&config.method)?;
    let circuits = build_t_bench_circuits(
        &config.lengths,
        method,
        config.circuits_per_length,
        config.seed,
        config.twirl,
        prep,
    )
    .map_err(|e| e.to_string())?;
    let raw = run_t_bench(&circuits, noise, config.shots, config.seed, false)
        .map_err(|e| e.to_string())?;
    let raw_fit = fit_t_decay(&raw).map_err(|e| e.to_string())?;
    write_file(dir, "decay.csv", &raw.to_csv())?;
    let mut results = serde_json::json!({
        "raw": { "series": raw, "fit": fit_json(&raw_fit) },
    });
    let _ = writeln!(summary, "logical T benchmark, method {:?}", method);
    let _ = writeln!(
        summary,
        "  raw:  eps = {:.5} +- {:.5}   F_avg = {:.5} +- {:.5}",
        raw_fit.params[0], raw_fit.param_stderr[0], raw_fit.favg, raw_fit.favg_stderr
    );
    if config.postselect {
        let ps = run_t_bench(&circuits, noise, config.shots, config.seed, true)
            .map_err(|e| e.to_string())?;
        let ps_fit = fit_t_decay(&ps).map_err(|e| e.to_string())?;
        write_file(dir, "decay_ps.csv", &ps.to_csv())?;
        results["postselected"] =
            serde_json::json!({ "series": ps, "fit": fit_json(&ps_fit) });
        let _ = writeln!(
            summary,
            "  p.s.: eps = {:.5} +- {:.5}   F_avg = {:.5} +- {:.5}  (retention at max L = {:.3})",
            ps_fit.params[0],
            ps_fit.param_stderr[0],
            ps_fit.favg,
            ps_fit.favg_stderr,
            ps.retention.last().copied().unwrap_or(1.0)
        );
    }
    write_file(dir, "results.json", &format!("{:#}\n", results))?;
    Ok(())
}

fn run_ft_t_protocol(
    config: &RunConfig,
    noise: &NoiseModel,
    dir: &Path,
    summary: &mut String,
) -> Result<(), String> {
    let method = parse_teleport_method(&config.method)?;
    let mut rows = Vec::new();
    let _ = writeln!(summary, "partially fault-tolerant T simulation (method {:?})", method);
    for &limit in &config.rus_limits {
        let circuits = build_t_bench_circuits(
            &config.lengths,
            method,
            config.circuits_per_length,
            config.seed,
            config.twirl,
            TPrep::PartialFt { rus_limit: limit },
        )
        .map_err(|e| e.to_string())?;
        let series = run_t_bench(&circuits, noise, config.shots, config.seed, false)
            .map_err(|e| e.to_string())?;
        let fit = fit_t_decay(&series).map_err(|e| e.to_string())?;
        write_file(dir, &format!("decay_limit{limit}.csv"), &series.to_csv())?;
        let retention_l8 = series
            .lengths
            .iter()
            .position(|&l| l == 8)
            .map(|i| series.retention[i])
            .unwrap_or(f64::NAN);
        let _ = writeln!(
            summary,
            "  RUS limit {}: F_avg = {:.4} +- {:.4}, retention(L=8) = {:.3}",
            limit, fit.favg, fit.favg_stderr, retention_l8
        );
        rows.push(serde_json::json!({
            "rus_limit": limit,
            "series": series,
            "fit": fit_json(&fit),
        }));
    }
    write_file(dir, "results.json", &format!("{:#}\n", serde_json::json!({ "rows": rows })))?;
    Ok(())
}

fn mub_summary(summary: &mut String, label: &str, result: &MubBenchmarkResult) {
    let fmt = |v: Option<f64>| v.map_or("  n/a".to_string(), |x| format!("{x:.3}"));
    let _ = writeln!(summary, "{label}");
    let _ = writeln!(summary, "  {:<18} {:>6} {:>6} {:>10}", "", "F1", "F2", "Favg bound");
    let _ = writeln!(
        summary,
        "  {:<18} {:>6} {:>6} {:>10}",
        "raw",
        fmt(result.raw.f1),
        fmt(result.raw.f2),
        fmt(result.raw.favg_bound)
    );
    let _ = writeln!(
        summary,
        "  {:<18} {:>6} {:>6} {:>10}   retention {:.3}",
        "post-selected",
        fmt(result.postselected.f1),
        fmt(result.postselected.f2),
        fmt(result.postselected.favg_bound),
        result.retention
    );
}

fn run_qft_protocol(
    config: &RunConfig,
    noise: &NoiseModel,
    dir: &Path,
    summary: &mut String,
) -> Result<(), String> {
    let method = parse_ct_method(&config.method)?;
    let result =
        run_qft_benchmark(method, noise, config.shots, config.seed).map_err(|e| e.to_string())?;
    write_file(
        dir,
        "results.json",
        &format!("{:#}\n", serde_json::to_value(&result).expect("serializes")),
    )?;
    mub_summary(summary, &format!("QFT fidelity bounds, {method:?} controlled-T"), &result);
    Ok(())
}

fn run_ct_protocol(
    config: &RunConfig,
    noise: &NoiseModel,
    dir: &Path,
    summary: &mut String,
) -> Result<(), String> {
    let result =
        run_control_t_benchmark(noise, config.shots, config.seed).map_err(|e| e.to_string())?;
    write_file(
        dir,
        "results.json",
        &format!("{:#}\n", serde_json::to_value(&result).expect("serializes")),
    )?;
    mub_summary(summary, "controlled-T fidelity bounds (ancilla-assisted)", &result);
    Ok(())
}

fn run_emit_protocol(config: &RunConfig, dir: &Path, summary: &mut String) -> Result<(), String> {
    let method = parse_ct_method(&config.method)?;
    let mut count = 0;
    for basis in [MubBasis::Computational, MubBasis::Fourier] {
        for x in 0u8..8 {
            let reference = qft_reference(x, basis).map_err(|e| e.to_string())?;
            let program =
                build_qft_state_program(method, &reference).map_err(|e| e.to_string())?;
            let text = emit_qasm(&program.program).map_err(|e| e.to_string())?;
            let name = format!("{}-{:?}-x{}.qasm", config.method, basis, x).to_lowercase();
            write_file(dir, &name, &text)?;
            count += 1;
        }
    }
    let _ = writeln!(summary, "emitted {count} QFT benchmark programs ({})", config.method);
    Ok(())
}

fn run_resources_protocol(
    config: &RunConfig,
    dir: &Path,
    summary: &mut String,
) -> Result<(), String> {
    let preps = [SingleQubitPrep::Zero, SingleQubitPrep::Zero, SingleQubitPrep::Zero];
    let mut rows = Vec::new();
    let _ = writeln!(
        summary,
        "{:<12} {:>12} {:>10} {:>12} {:>12}",
        "CT method", "injections", "log. TQ", "phys. TQ", "phys. qubits"
    );
    for method in [CtMethod::Recursive, CtMethod::Ancilla] {
        if !config.method.is_empty() && config.method != method.name() {
            continue;
        }
        let built = build_qft3(method, &preps, "resources").map_err(|e| e.to_string())?;
        let r = count_resources(&built.builder.finish());
        let _ = writeln!(
            summary,
            "{:<12} {:>12} {:>10} {:>12} {:>12}",
            method.name(),
            format!("{}-{}", r.injections_min, r.injections_max),
            format!("{}-{}", r.logical_tq_min, r.logical_tq_max),
            format!("{}-{}", r.physical_tq_min, r.physical_tq_max),
            r.physical_qubits
        );
        rows.push(serde_json::json!({ "method": method.name(), "resources": r }));
    }
    write_file(dir, "results.json", &format!("{:#}\n", serde_json::json!({ "rows": rows })))?;
    Ok(())
}
