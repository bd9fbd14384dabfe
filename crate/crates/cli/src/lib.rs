//! Seeded experiment harness for compound-return TD learning: step-size
//! sweeps on the random walk, return-variance studies, reference tables
//! and SVG charts. Every experiment is deterministic given its seed and
//! independent of the number of worker threads.

pub mod config;
pub mod error;
pub mod plot;
pub mod sweep;
pub mod table;
pub mod tables;
pub mod variance_study;

pub use config::{EnvName, EstimatorSpec, SweepConfig, VarianceConfig};
pub use error::{ExperimentError, Result};
pub use sweep::{run_random_walk_sweep, SweepResult, SweepRow};
pub use tables::emit_tables;
pub use variance_study::{run_variance_study, VarianceRow, VarianceStudy};

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(ExperimentError::Config("workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ExperimentError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
