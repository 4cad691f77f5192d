//! Cohort ingestion, screening orchestration, reports and the
//! cross-corpus harness.

pub mod cohort;
pub mod crossdb;
pub mod manifest;
pub mod report;
pub mod screening;

pub use cohort::{build_cohort, CohortRow, CohortTable};
pub use crossdb::{crossdb_features, run_crossdb, CorpusFeatures, CrossDbConfig, CrossDbResult, Split, EMOTION_LABELS};
pub use manifest::{load_manifest, parse_manifest, ParticipantRecord, Recording, RiskLabel, INTENSITY_COLUMNS};
pub use report::{emit_report, render, ReportFormat};
pub use screening::{run_screening, AnalysisReport, ScreeningConfig, DISCLAIMER};
