//! Configuration-driven experiments: parallel deterministic replications,
//! verification scenarios, intensity sweeps and output files.

pub mod config;
pub mod emit;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{ExperimentConfig, Scenario, Statistic, Tolerances};
pub use emit::{emit, emit_sweep, RecordFormat};
pub use report::{build_report, run_experiment, SummaryReport, Verdict};
pub use run::{PreparedExperiment, ReplicationRecord};
pub use sweep::{sweep, SweepRow, SweepTable};

/// Environment variable that overrides the worker thread count.
pub const THREADS_ENV: &str = "IRG_THREADS";

/// Thread count requested through [`THREADS_ENV`], if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}
