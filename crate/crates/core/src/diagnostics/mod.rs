//! Residuals, estimate ledgers, perturbation constants and stage reports.

mod estimates;
mod lemma;
mod report;
mod residual;

pub use estimates::{
    measure, sample_times, verify_stage_estimates, EstimateRow, Measurement, RowStatus,
    StageScales, ESTIMATE_NAMES,
};
pub use lemma::{
    gamma_ceiling, max_constants, track_lemma_quantities, LemmaRow, StepScales,
};
pub use report::{
    build_report, emit_report, read_report, stage_report, write_snapshots, NormRow, Report,
    ScheduleRow, ScheduleSnapshot, StageMeta,
    StageReport, TimeRow, SCHEMA_VERSION,
};
pub use residual::{
    euler_reynolds_residual, stationary_residual, time_derivative, Residual, TimeDerivative,
    RESIDUAL_FLOOR,
};
