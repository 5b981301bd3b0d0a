use std::path::PathBuf;

use clap::ValueEnum;
use edgecolor_core::coloring::{Algorithm, Preset, ReductionConfig};
use edgecolor_core::diagnostics::Probe;
use edgecolor_core::generate::{ArrivalOrder, GeneralModel};
use edgecolor_core::rounding::{Backend, DEFAULT_REPLICAS};
use serde::{Deserialize, Serialize};

/// Ensemble size used by `color` when `--replicas` is not given. Every pass
/// of every phase carries its own ensemble, so the rounding default would
/// not fit in memory.
pub const COLOR_DEFAULT_REPLICAS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Exact,
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GenFamily {
    /// `n` counts both sides.
    Regular {
        n: usize,
        delta: usize,
        order: ArrivalOrder,
    },
    General {
        n: usize,
        delta: usize,
        model: GeneralModel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    Gen {
        spec: GenFamily,
    },
    Round {
        instance: PathBuf,
        require_bipartite: bool,
        uniform_missing: bool,
    },
    Color {
        instance: PathBuf,
        algo: Algorithm,
        /// `None` derives it from the rounding constant.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        require_bipartite: bool,
        uniform_missing: bool,
    },
    Verify {
        instance: PathBuf,
        matching: Option<PathBuf>,
        coloring: Option<PathBuf>,
        uniform_missing: bool,
    },
    Diag {
        instance: PathBuf,
        probe: Probe,
        phase_trials: u64,
        report: String,
        require_bipartite: bool,
        uniform_missing: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen { .. } => "gen",
            Command::Round { .. } => "round",
            Command::Color { .. } => "color",
            Command::Verify { .. } => "verify",
            Command::Diag { .. } => "diag",
        }
    }
}

/// Everything an experiment depends on besides the code version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub format: Format,
    pub preset: Preset,
    pub backend: BackendKind,
    /// `None` picks the subcommand's default.
    pub replicas: Option<usize>,
    pub trials: u64,
    pub exact_cap: usize,
}

impl ExperimentConfig {
    pub fn backend(&self) -> Backend {
        match self.backend {
            BackendKind::Exact => Backend::Exact {
                cap: self.exact_cap,
            },
            BackendKind::Ensemble => Backend::Ensemble {
                replicas: self.replicas.unwrap_or(match self.command {
                    Command::Color { .. } => COLOR_DEFAULT_REPLICAS,
                    _ => DEFAULT_REPLICAS,
                }),
            },
        }
    }

    pub fn reduction(&self) -> ReductionConfig {
        let mut cfg = ReductionConfig::for_preset(self.preset);
        if let Command::Color { alpha: Some(a), .. } = self.command {
            cfg.alpha = a;
        }
        cfg
    }
}
