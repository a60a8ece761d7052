//! Configuration ingestion, scenario presets, CSV/SVG artifact emission and
//! run-record persistence for regression comparison.

pub mod config;
pub mod record;
pub mod scenario;
pub mod svg;
pub mod table;

pub use config::{load_config_file, preset_config, GridSpec, Overrides, RunMode, ScenarioConfig, ScenarioKind, Variant};
pub use record::{compare_runs, CompareReport, FileDigest, RunRecord};
pub use scenario::run_scenario;
pub use table::Table;
