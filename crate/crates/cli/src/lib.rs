//! Library surface of the experiment harness, so the orchestration is
//! testable without spawning the binary.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod verify;

pub use commands::{catalogue_text, cmd_run, cmd_sweep, out_dir, RunSummary, SweepSummary};
pub use config::{resolve, Config, Experiment};
pub use verify::{cmd_verify, Status, VerifyReport};
