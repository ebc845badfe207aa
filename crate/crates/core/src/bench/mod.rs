//! Experiment layer: analytic solutions, configuration files, the runner,
//! reproduction presets and their checks.

pub mod checks;
pub mod config;
pub mod presets;
pub mod runner;
pub mod solutions;

pub use checks::{Check, Status};
pub use config::{BcLayout, DomainSpec, ExperimentConfig, Generator, ImexSpec, RegionFix, RegionId, SweepRange};
pub use presets::{preset, repro, Preset, ReproSummary, PRESETS};
pub use runner::{execute, run, RunManifest, RunOptions, RunOutcome, SCHEMA_VERSION};
pub use solutions::{registry_solutions, solution, Solution};
