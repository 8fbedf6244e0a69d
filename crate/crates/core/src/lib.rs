//! Circuit cutting for hybrid quantum-classical neural networks.
//!
//! A quantum layer that is wider than the available device is split into
//! sequentially executed subcircuits of at most `m` qubits. Each cut wire is
//! replaced by a `<Z>` measurement in one subcircuit and an angle re-encoding
//! of that value in a later one, and gradients flow back across those links so
//! every subcircuit's parameters stay trainable.

pub mod circuit;
pub mod cutplan;
pub mod data;
pub mod hqnn;
pub mod profiler;
pub mod simulator;
pub mod verify;

pub use circuit::{build_ansatz, AnsatzOptions, Axis, Circuit, CircuitBuilder, Encoding, Gate, GateKind};
pub use cutplan::{cut_circuit, design_cutting_points, generate_subcircuits, validate, CutPlan, SubcircuitGraph};
pub use data::{Dataset, DataError};
pub use hqnn::{Architecture, HybridModel, ModelError, TrainConfig, TrainingRecord};
pub use profiler::{FlopsReport, FlopsTable};
pub use simulator::{ExecutionResult, SimError, Simulator, StateVector};
