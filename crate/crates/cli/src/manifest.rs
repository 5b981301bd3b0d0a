use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file and its digest. Output paths are relative to the run's `out`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub generator: String,
    pub addressing: String,
}

impl Default for RngProvenance {
    fn default() -> Self {
        Self {
            generator: "ChaCha8 (rand_chacha 0.9)".into(),
            addressing: "seed -> key; replica -> stream id; (arrival * 4 + stage) * 64 -> word \
                         position; sub-experiments use child seeds derived by tag"
                .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub inputs: Vec<Artifact>,
    pub results: Vec<SeedResult>,
    /// Outputs spanning all seeds.
    pub shared: Vec<Artifact>,
    pub violations: Vec<String>,
    pub wall_clock_seconds: f64,
    pub rng: RngProvenance,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            inputs: Vec::new(),
            results: Vec::new(),
            shared: Vec::new(),
            violations: Vec::new(),
            wall_clock_seconds: 0.0,
            rng: RngProvenance::default(),
        }
    }

    pub fn path(&self) -> PathBuf {
        self.config.out.join(MANIFEST_FILE)
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = self.path();
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Differences in inputs and per-seed results between two runs of the
    /// same config. Wall clock and output directory are ignored.
    pub fn differences(&self, other: &RunManifest) -> Vec<String> {
        let mut out = Vec::new();
        if self.inputs != other.inputs {
            out.push("input digests differ".to_string());
        }
        if self.results.len() != other.results.len() {
            out.push(format!(
                "{} seed results vs {}",
                self.results.len(),
                other.results.len()
            ));
        }
        for (a, b) in self.results.iter().zip(&other.results) {
            if a.seed != b.seed {
                out.push(format!("seed {} vs {}", a.seed, b.seed));
                continue;
            }
            if a.summary != b.summary {
                out.push(format!("seed {}: summaries differ", a.seed));
            }
            diff_artifacts(
                &mut out,
                &format!("seed {}", a.seed),
                &a.artifacts,
                &b.artifacts,
            );
        }
        diff_artifacts(&mut out, "shared", &self.shared, &other.shared);
        if self.violations != other.violations {
            out.push("violation lists differ".to_string());
        }
        out
    }
}

fn diff_artifacts(out: &mut Vec<String>, scope: &str, a: &[Artifact], b: &[Artifact]) {
    if a.len() != b.len() {
        out.push(format!("{scope}: {} artifacts vs {}", a.len(), b.len()));
    }
    for (x, y) in a.iter().zip(b) {
        if x != y {
            out.push(format!(
                "{scope}: {} ({}) vs {} ({})",
                x.path.display(),
                &x.sha256[..12.min(x.sha256.len())],
                y.path.display(),
                &y.sha256[..12.min(y.sha256.len())]
            ));
        }
    }
}
