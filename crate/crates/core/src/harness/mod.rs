//! Configuration, experiment orchestration and file output.

pub mod config;
pub mod exec;
pub mod experiments;
pub mod output;
pub mod svg;
pub mod validate;

pub use config::NetworkConfig;
pub use exec::Execution;
pub use experiments::{run_phase_snapshots, run_raster, run_single, run_sweep};
