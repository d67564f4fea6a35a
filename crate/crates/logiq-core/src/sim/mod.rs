//! Pure-state trajectory simulator with factored storage, dynamic qubit
//! allocation, classical registers, and Monte Carlo Pauli noise.

pub mod dense;
pub mod exec;
pub mod gates;
pub mod noise;
pub mod state;

pub use dense::DenseState;
pub use exec::{run_program, simulate_single, ExecError, MeasEvent, ShotRecord, SyndromeEvent};
pub use gates::{Gate, C64};
pub use noise::{NoiseModel, NoiseError};
pub use state::{FactoredState, QubitId, SimError};
