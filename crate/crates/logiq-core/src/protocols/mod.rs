//! The benchmarking protocols and their analysis: two-qubit logical
//! randomized benchmarking, logical-T decay, the QFT and controlled-T
//! mutually-unbiased-bases fidelity bounds, decay-curve fitting with
//! bootstrap uncertainties, and the depolarizing component-level model.

pub mod fit;
pub mod model;
pub mod qft;
pub mod rb;
pub mod series;
pub mod tbench;

use thiserror::Error;

pub use fit::{fit_rb, fit_t_decay, DecayModel, FitError, FitResult};
pub use model::depolarizing_logical_model;
pub use qft::{
    hofmann_bounds, qft_reference, run_control_t_benchmark, run_qft_benchmark, MubBasis,
    MubBenchmarkResult,
};
pub use rb::{build_rb_circuits, run_rb};
pub use series::DecaySeries;
pub use tbench::{build_t_bench_circuits, run_t_bench, TPrep};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("lengths list is empty")]
    EmptyLengths,
    #[error("sequence length {0} is not a positive multiple of 4")]
    LengthNotMultipleOfFour(u32),
    #[error("basis-state index {0} out of range 0..8")]
    InputOutOfRange(u8),
    #[error("fidelities must lie in (0, 1]")]
    BadFidelity,
    #[error(transparent)]
    Build(#[from] crate::steane::builder::BuildError),
    #[error(transparent)]
    Exec(#[from] crate::sim::exec::ExecError),
    #[error(transparent)]
    Fit(#[from] FitError),
}
