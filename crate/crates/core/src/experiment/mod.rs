//! Experiment matrix: simulate presets under both mappings, compare with
//! the reference utilizations and write reports.

pub mod compare;
pub mod reference;
pub mod report;
pub mod run;
pub mod verify;

pub use compare::{compare_to_reference, ComparisonReport, DEFAULT_TOLERANCE_PP};
pub use reference::{ReferenceRow, ReferenceTable};
pub use report::{
    emit_reports, format_comparison, format_table, load_results, ReportPaths, CSV_HEADER,
};
pub use run::{
    run_matrix, simulate_cell, ExperimentSpec, PhaseResult, ResultSet, RowSummary, DEFAULT_SIDE,
};
pub use verify::{verify_mapping, CheckOutcome};
