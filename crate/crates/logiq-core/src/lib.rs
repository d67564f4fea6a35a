//! Logical-qubit benchmarking toolkit for the [[7,1,3]] color code.
//!
//! The crate provides, bottom to top:
//!
//! - [`pauli`], [`clifford`]: Pauli algebra with exact phases, and the
//!   11,520-element two-qubit Clifford group with canonical forms, shortest
//!   generator words, and inversion.
//! - [`sim`]: a factored pure-state simulator with dynamic qubit allocation,
//!   mid-circuit measurement, classical conditioning, and Monte Carlo Pauli
//!   noise trajectories.
//! - [`ir`]: a logical program representation plus an OpenQASM 2.0 subset
//!   emitter/parser with byte-exact round-tripping.
//! - [`steane`]: the code tables, encoders, fault-tolerant initialization,
//!   transversal gates, teleportation gadgets, and logical QFT builders.
//! - [`protocols`]: randomized benchmarking, logical-T decay, QFT and
//!   controlled-T fidelity bounds, decay fitting with bootstrap errors, and
//!   the depolarizing component-level model.

pub mod clifford;
pub mod ir;
pub mod pauli;
pub mod protocols;
pub mod sim;
pub mod steane;

pub use clifford::{CliffordElement, TwoQubitCliffordGroup};
pub use ir::{LogicalProgram, MeasBasis};
pub use pauli::{PauliString, Phase};
pub use sim::{FactoredState, NoiseModel, QubitId, ShotRecord};
pub use steane::code::SyndromeRecord;
