//! Reproducible experiment plumbing for `edgecolor`: a command line that
//! generates instances, runs the online algorithms and diagnostics, and
//! records every run in a manifest that `rerun` can replay bit-exactly.
//!
//! Exit codes: 0 ok, 1 invariant violation, 2 bad input.

pub mod cli;
pub mod config;
pub mod manifest;
mod run;

pub use config::{
    BackendKind, Command, ExperimentConfig, Format, GenFamily, COLOR_DEFAULT_REPLICAS,
};
pub use manifest::{sha256_hex, Artifact, RngProvenance, RunManifest, SeedResult, MANIFEST_FILE};
pub use run::{csv_to_json, execute, rerun, GATE_SE};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_BAD_INPUT: u8 = 2;
