//! Scenario definition, closed-loop execution, run logs and metrics.

pub mod log;
pub mod metrics;
pub mod overrides;
pub mod scenario;
pub mod sim;

pub use log::{read_log, write_log, Column, RunLog, RunStatus};
pub use metrics::{compute_metrics, Metrics};
pub use scenario::Scenario;
pub use sim::run_scenario;
