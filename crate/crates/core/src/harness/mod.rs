//! Configurations, benchmark presets, runs, sweeps, and file outputs.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{Case, ConfigFile, ConfigOverrides, DirichletSpec, MeshSpec, RunConfig, SweepSpec};
pub use output::{write_outputs, SUMMARY_HEADER};
pub use presets::{preset_test1, preset_test2};
pub use run::{build_mesh, run, run_observed, simulate, RunErrors, RunResult};
pub use sweep::{sweep, SweepResult, SweepRow};
