//! Experiment harness: sampling protocols, play-budget sweeps,
//! repetitions, metrics, statistics, and result persistence.

pub mod config;
pub mod records;
pub mod run;
pub mod stats;

pub use config::{DomainSpec, ExperimentConfig, ModeName};
pub use records::ExperimentRecord;
pub use run::{run_experiment, RunArtifacts};
pub use stats::{mcnemar, mean_sem, McNemarResult, SemSummary};
