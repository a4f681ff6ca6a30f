//! Scenario configuration, orchestration, cross-method comparison and the
//! invariant ledger.

pub mod analysis;
pub mod compare;
pub mod config;
pub mod scenario;
pub mod verify;

pub use analysis::{analyze_level, LevelAnalysis, LevelSummary};
pub use compare::{compare_paths, Comparison};
pub use config::{DensitySpec, DtScaling, LevelParams, Method, ScenarioConfig};
pub use scenario::{
    analyze_dir, load_scenario, run_level, run_scenario, verify_dir, LevelRun, ScenarioOutcome, Status, Summary,
};
pub use verify::{verify_suite, Ledger, LedgerEntry, Verdict, REGISTRY};
