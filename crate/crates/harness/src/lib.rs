//! Simulation studies, CSV ingestion and result files for `balldiv`.

pub mod config;
pub mod error;
pub mod ingest;
pub mod oracle_report;
pub mod output;
pub mod study;
pub mod subsample;

pub use config::{level_preset, power_preset, GridEntry, Preset, StudyConfig, SubsampleConfig};
pub use error::{Error, Result};
pub use ingest::{load_csv, LabeledData};
pub use oracle_report::{oracle_report, OracleReport};
pub use output::{write_json, write_study};
pub use study::{run_power_study, run_power_study_with, PowerCurve};
pub use subsample::{allocate, run_subsample_study, SubsampleStudy};

/// Runs `f` on a pool of `threads` workers, or on the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new().num_threads(k).build()?.install(f)),
        None => Ok(f()),
    }
}
