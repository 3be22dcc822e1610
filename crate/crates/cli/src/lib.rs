//! Run configurations, the analysis driver and report emitters behind the
//! `wcomp` binary.

pub mod analysis;
pub mod config;
pub mod emit;

pub use analysis::{analyze, AnalysisReport, CriterionEntry, EntryStatus, MatrixSummary, Provenance, SkipReason};
pub use config::{load_spec, load_thresholds, CriterionId, RunConfig};
pub use emit::{parse_report, to_json, write_json, write_profiles};
