//! DRAM timing model: device presets, the scheduler and an independent
//! command checker.

pub mod audit;
pub mod command;
pub mod config;
pub mod sim;
pub mod stats;

pub use audit::{audit_commands, TimingAuditor, Violation};
pub use command::{Command, CommandKind, CommandSink, NullSink, TraceWriter};
pub use config::{load_preset, DeviceConfig, Timings, PRESET_NAMES};
pub use sim::{simulate_phase, simulate_phase_with, DataOrder, SimOptions, DEFAULT_LOOKAHEAD};
pub use stats::{ideal_phase_cycles, utilization, PhaseStats};
