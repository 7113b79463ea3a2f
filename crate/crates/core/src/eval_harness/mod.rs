//! Evaluation: clustering metrics, holdout selection of K, and the simulation
//! scenario runner that produces CSV result tables.

mod metrics;
mod scenario;
mod select;

pub use metrics::{agreement, align_labels, nmi, EXACT_ALIGN_MAX_K};
pub use scenario::{
    builtin_scenario, run_scenario, write_csv, Method, NuPattern, ResultRow, ScenarioConfig, Sweep, BUILTIN_SCENARIOS,
};
pub use select::{select_k, select_k_with, KSelection};
