use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use edgecolor_core::coloring::{Algorithm, Preset};
use edgecolor_core::diagnostics::Probe;
use edgecolor_core::generate::{ArrivalOrder, GeneralModel};
use edgecolor_core::rounding::DEFAULT_EXACT_CAP;
use serde::de::DeserializeOwned;

use crate::config::{BackendKind, Command, ExperimentConfig, Format, GenFamily};

/// Parses a snake_case (or kebab-case) variant name of a serde enum.
fn variant<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown value {s:?}"))
}

fn positive_alpha(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(a) if a.is_finite() && a >= 1.0 => Ok(a),
        _ => Err(format!("alpha must be a number >= 1, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "edgecolor",
    version,
    about = "Online edge coloring and online rounding experiments"
)]
pub struct Cli {
    /// Seeds, comma separated or repeated; each seed is an independent run.
    #[arg(long, global = true, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    /// Output directory (for `rerun`: defaults to `rerun/` next to the manifest).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of per-edge tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// paper | desk
    #[arg(long, global = true, value_parser = variant::<Preset>, default_value = "paper")]
    pub preset: Preset,
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Ensemble)]
    pub backend: BackendKind,
    /// Ensemble size (default 100000; 1000 for `color`).
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: u64,
    /// Largest number of vertices the exact backend may track.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        family: GenArgs,
    },
    /// Round the instance's fractional matching online.
    Round {
        instance: PathBuf,
        #[arg(long)]
        require_bipartite: bool,
        /// Accept edges without a value and give them x = 1/delta.
        #[arg(long)]
        uniform_missing: bool,
    },
    /// Edge-color the instance online.
    Color {
        instance: PathBuf,
        /// greedy | bipartite-reduction | general
        #[arg(long, value_parser = variant::<Algorithm>, default_value = "general")]
        algo: Algorithm,
        /// Take the target ratio from the rounding constant (the default).
        #[arg(long, conflicts_with = "alpha")]
        alpha_from_c: bool,
        /// Override the target ratio.
        #[arg(long, value_parser = positive_alpha)]
        alpha: Option<f64>,
        #[arg(long)]
        require_bipartite: bool,
        #[arg(long)]
        uniform_missing: bool,
    },
    /// Check an instance and, optionally, a matching or coloring of it.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        matching: Option<PathBuf>,
        #[arg(long)]
        coloring: Option<PathBuf>,
        #[arg(long)]
        uniform_missing: bool,
    },
    /// Statistical checks of marginals, covariances and concentration.
    Diag {
        instance: PathBuf,
        /// all | worst
        #[arg(long, value_parser = variant::<Probe>, default_value = "all")]
        probe: Probe,
        /// Colorings sampled for the per-phase degree statistics.
        #[arg(long, default_value_t = 0)]
        phase_trials: u64,
        /// File name of the summary report inside the output directory.
        #[arg(long, default_value = "report.json")]
        report: String,
        #[arg(long)]
        require_bipartite: bool,
        #[arg(long)]
        uniform_missing: bool,
    },
    /// Re-execute a manifest's config and compare digests.
    Rerun { manifest: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GenArgs {
    /// Random delta-regular bipartite graph; `--n` counts both sides.
    Regular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        /// interleaved | one_sided | random
        #[arg(long, value_parser = variant::<ArrivalOrder>, default_value = "interleaved")]
        order: ArrivalOrder,
    },
    /// Random graph with maximum degree delta, random arrival order.
    General {
        /// erdos_renyi | union_of_matchings
        #[arg(long, value_parser = variant::<GeneralModel>, default_value = "union_of_matchings")]
        model: GeneralModel,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
    },
}

fn absolute(p: PathBuf) -> Result<PathBuf> {
    std::path::absolute(&p).with_context(|| format!("resolving {}", p.display()))
}

impl Cli {
    /// The experiment this command line describes; `None` for `rerun`.
    /// Input paths are made absolute so a manifest can be replayed from
    /// any working directory.
    pub fn config(&self) -> Result<Option<ExperimentConfig>> {
        let command = match &self.command {
            Sub::Rerun { .. } => return Ok(None),
            Sub::Gen { family } => Command::Gen {
                spec: match *family {
                    GenArgs::Regular { n, delta, order } => GenFamily::Regular { n, delta, order },
                    GenArgs::General { model, n, delta } => GenFamily::General { n, delta, model },
                },
            },
            Sub::Round {
                instance,
                require_bipartite,
                uniform_missing,
            } => Command::Round {
                instance: absolute(instance.clone())?,
                require_bipartite: *require_bipartite,
                uniform_missing: *uniform_missing,
            },
            Sub::Color {
                instance,
                algo,
                alpha_from_c: _,
                alpha,
                require_bipartite,
                uniform_missing,
            } => Command::Color {
                instance: absolute(instance.clone())?,
                algo: *algo,
                alpha: *alpha,
                require_bipartite: *require_bipartite,
                uniform_missing: *uniform_missing,
            },
            Sub::Verify {
                instance,
                matching,
                coloring,
                uniform_missing,
            } => Command::Verify {
                instance: absolute(instance.clone())?,
                matching: matching.clone().map(absolute).transpose()?,
                coloring: coloring.clone().map(absolute).transpose()?,
                uniform_missing: *uniform_missing,
            },
            Sub::Diag {
                instance,
                probe,
                phase_trials,
                report,
                require_bipartite,
                uniform_missing,
            } => Command::Diag {
                instance: absolute(instance.clone())?,
                probe: *probe,
                phase_trials: *phase_trials,
                report: report.clone(),
                require_bipartite: *require_bipartite,
                uniform_missing: *uniform_missing,
            },
        };
        Ok(Some(ExperimentConfig {
            command,
            seeds: self.seed.clone(),
            out: absolute(self.out.clone().unwrap_or_else(|| PathBuf::from(".")))?,
            format: self.format,
            preset: self.preset,
            backend: self.backend,
            replicas: self.replicas,
            trials: self.trials,
            exact_cap: self.exact_cap,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_accept_kebab_and_snake_case() {
        assert_eq!(
            variant::<ArrivalOrder>("one-sided"),
            Ok(ArrivalOrder::OneSided)
        );
        assert_eq!(
            variant::<GeneralModel>("erdos_renyi"),
            Ok(GeneralModel::ErdosRenyi)
        );
        assert!(variant::<Algorithm>("vizing").is_err());
    }

    #[test]
    fn config_echoes_global_flags() {
        let cli = Cli::try_parse_from([
            "edgecolor",
            "color",
            "g.jsonl",
            "--algo",
            "greedy",
            "--seed",
            "1,2",
            "--preset",
            "paper",
            "--backend",
            "exact",
            "--exact-cap",
            "10",
        ])
        .unwrap();
        let cfg = cli.config().unwrap().unwrap();
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.preset, Preset::Paper);
        assert_eq!(
            cfg.backend(),
            edgecolor_core::rounding::Backend::Exact { cap: 10 }
        );
        assert!(
            matches!(cfg.command, Command::Color { algo: Algorithm::Greedy, ref instance, .. } if instance.is_absolute())
        );
    }

    #[test]
    fn color_defaults_to_a_small_ensemble() {
        let cli = Cli::try_parse_from(["edgecolor", "color", "g.jsonl"]).unwrap();
        let cfg = cli.config().unwrap().unwrap();
        assert_eq!(
            cfg.backend(),
            edgecolor_core::rounding::Backend::Ensemble {
                replicas: crate::COLOR_DEFAULT_REPLICAS
            }
        );
    }
}
