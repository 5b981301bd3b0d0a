use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use edgecolor_core::coloring::{color_instance, verify_coloring, Algorithm};
use edgecolor_core::diagnostics::{concentration_report, estimate_covariances, estimate_marginals};
use edgecolor_core::generate::{gen_general, gen_regular_bipartite};
use edgecolor_core::io::{
    parse_coloring, parse_instance, parse_matching, write_coloring, write_instance, write_matching,
    MissingValues,
};
use edgecolor_core::rounding::{round_online, schedule_csv};
use edgecolor_core::{validate_instance, GraphInstance, Matching};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig, Format, GenFamily};
use crate::manifest::{sha256_hex, Artifact, RunManifest, SeedResult};

/// Statistical gates fail beyond this many standard errors.
pub const GATE_SE: f64 = 4.0;

/// Writes the run's files and collects their digests.
struct Outputs<'a> {
    dir: &'a Path,
    prefix: Option<String>,
    artifacts: Vec<Artifact>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path, prefix: Option<String>) -> Self {
        Self {
            dir,
            prefix,
            artifacts: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let rel = match &self.prefix {
            Some(p) => PathBuf::from(p).join(name),
            None => PathBuf::from(name),
        };
        let path = self.dir.join(&rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(Artifact {
            path: rel,
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    /// A per-edge table in the configured format.
    fn table(&mut self, stem: &str, csv: &str, format: Format) -> Result<()> {
        let body = match format {
            Format::Csv => csv.to_string(),
            Format::Json => csv_to_json(csv),
        };
        self.write(&format!("{stem}.{}", format.extension()), &body)
    }
}

/// Rows of a CSV table as a JSON array of objects; integer and float cells
/// become numbers.
pub fn csv_to_json(csv: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rows: Vec<Value> = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let obj: serde_json::Map<String, Value> = header
                .iter()
                .zip(l.split(','))
                .map(|(k, v)| ((*k).to_string(), cell(v)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("table serializes") + "\n"
}

fn cell(v: &str) -> Value {
    if let Ok(i) = v.parse::<i64>() {
        return json!(i);
    }
    match v.parse::<f64>() {
        Ok(f) if f.is_finite() => json!(f),
        _ => json!(v),
    }
}

fn load_instance(path: &Path, uniform_missing: bool) -> Result<(GraphInstance, Artifact)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let missing = if uniform_missing {
        MissingValues::Uniform
    } else {
        MissingValues::Reject
    };
    let inst =
        parse_instance(&text, missing).with_context(|| format!("parsing {}", path.display()))?;
    let artifact = Artifact {
        path: path.to_path_buf(),
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((inst, artifact))
}

/// Loads an instance the algorithms may run on: structurally valid and, if
/// requested, bipartite.
fn load_valid(
    path: &Path,
    uniform_missing: bool,
    require_bipartite: bool,
) -> Result<(GraphInstance, Artifact)> {
    let (inst, artifact) = load_instance(path, uniform_missing)?;
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().take(5).map(ToString::to_string).collect();
        bail!(
            "{} is not a valid instance ({} violations): {}",
            path.display(),
            violations.len(),
            shown.join("; ")
        );
    }
    if require_bipartite && !inst.is_bipartite() {
        bail!(
            "{} is not bipartite (it contains an odd cycle) and --require-bipartite was given",
            path.display()
        );
    }
    Ok((inst, artifact))
}

fn matching_violations(inst: &GraphInstance, m: &Matching) -> Vec<String> {
    let edges: std::collections::HashSet<_> = inst.edges().map(|e| e.edge).collect();
    let mut out: Vec<String> = m
        .conflicts()
        .iter()
        .map(|(a, b)| format!("matched edges {a} and {b} share an endpoint"))
        .collect();
    out.extend(
        m.edges()
            .iter()
            .filter(|e| !edges.contains(e))
            .map(|e| format!("matched edge {e} is not in the instance")),
    );
    out
}

/// Runs one experiment, writing its artifacts under `cfg.out`. The manifest
/// itself is returned, not written.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunManifest> {
    ensure!(!cfg.seeds.is_empty(), "at least one seed is required");
    let start = Instant::now();
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut manifest = RunManifest::new(cfg.clone());
    let multi = cfg.seeds.len() > 1;
    let prefix = |seed: u64| multi.then(|| format!("seed-{seed}"));

    match &cfg.command {
        Command::Gen { spec } => {
            for &seed in &cfg.seeds {
                let inst = match *spec {
                    GenFamily::Regular { n, delta, order } => {
                        ensure!(
                            n % 2 == 0,
                            "regular bipartite instances need an even --n, got {n}"
                        );
                        gen_regular_bipartite(n / 2, delta, seed, order)?
                    }
                    GenFamily::General { n, delta, model } => {
                        ensure!(delta < n.max(1), "--delta {delta} must be below --n {n}");
                        gen_general(n, delta, model, seed)
                    }
                };
                let mut out = Outputs::new(&cfg.out, prefix(seed));
                out.write("instance.jsonl", &write_instance(&inst))?;
                manifest.violations.extend(
                    validate_instance(&inst)
                        .iter()
                        .map(|v| format!("seed {seed}: generated instance invalid: {v}")),
                );
                manifest.results.push(SeedResult {
                    seed,
                    artifacts: out.artifacts,
                    summary: json!({
                        "n": inst.n,
                        "delta": inst.delta,
                        "edges": inst.edge_count(),
                        "max_degree": inst.max_degree(),
                        "bipartite": inst.is_bipartite(),
                    }),
                });
            }
        }
        Command::Round {
            instance,
            require_bipartite,
            uniform_missing,
        } => {
            let (inst, input) = load_valid(instance, *uniform_missing, *require_bipartite)?;
            manifest.inputs.push(input);
            let backend = cfg.backend();
            for &seed in &cfg.seeds {
                let run = round_online(&inst, backend, seed)?;
                let mut out = Outputs::new(&cfg.out, prefix(seed));
                out.write("matching.json", &write_matching(&run.matching))?;
                out.table("schedule", &schedule_csv(&run.schedule), cfg.format)?;
                manifest.violations.extend(
                    matching_violations(&inst, &run.matching)
                        .into_iter()
                        .map(|v| format!("seed {seed}: {v}")),
                );
                let mut summary = json!({
                    "edges": inst.edge_count(),
                    "matched": run.matching.len(),
                    "bipartite": inst.is_bipartite(),
                    "total_deficiency": run.schedule.total_deficiency(),
                    "total_excess": run.schedule.total_excess(),
                });
                if cfg.trials > 0 {
                    let rep = estimate_marginals(&inst, backend, cfg.trials, seed)?;
                    out.table("marginals", &rep.to_csv(), cfg.format)?;
                    summary["marginals"] = json!({
                        "exact": rep.exact,
                        "trials": rep.trials,
                        "worst_z": rep.worst_z,
                        "max_abs_error": rep.max_abs_error,
                        "median_se": rep.median_se(),
                    });
                }
                manifest.results.push(SeedResult {
                    seed,
                    artifacts: out.artifacts,
                    summary,
                });
            }
        }
        Command::Color {
            instance,
            algo,
            alpha: _,
            require_bipartite,
            uniform_missing,
        } => {
            let (inst, input) = load_valid(instance, *uniform_missing, *require_bipartite)?;
            manifest.inputs.push(input);
            if *algo == Algorithm::Reduction && !inst.is_bipartite() {
                eprintln!("warning: the reduction assumes a bipartite input; colors stay proper but the palette bound does not apply");
            }
            let backend = cfg.backend();
            let reduction = cfg.reduction();
            let mut rows = String::from("seed,algorithm,palette,delta,ratio,proper,greedy_edges\n");
            for &seed in &cfg.seeds {
                let outcome = color_instance(&inst, *algo, &reduction, backend, seed)?;
                let report = verify_coloring(&inst, &outcome.coloring);
                let mut out = Outputs::new(&cfg.out, prefix(seed));
                out.write("coloring.csv", &write_coloring(&inst, &outcome.coloring))?;
                out.write(
                    "report.json",
                    &(serde_json::to_string_pretty(&json!({
                        "algorithm": algo,
                        "palette": report.palette,
                        "delta": inst.delta,
                        "ratio": report.ratio,
                        "proper": report.proper,
                        "alpha": reduction.alpha,
                        "per_phase": outcome.phases,
                        "deficiency_total": outcome.deficiency_total,
                        "plans": outcome.plans,
                        "greedy_edges": outcome.greedy_edges,
                        "greedy_offset": outcome.greedy_offset,
                        "size_mismatch": report.size_mismatch,
                        "offending": report.offending,
                    }))? + "\n"),
                )?;
                if !report.proper {
                    manifest.violations.push(match report.offending {
                        Some((a, b, c)) => {
                            format!("seed {seed}: edges {a} and {b} share color {c}")
                        }
                        None => format!("seed {seed}: coloring does not cover every edge"),
                    });
                }
                let algo_name = serde_json::to_value(algo)?;
                rows.push_str(&format!(
                    "{seed},{},{},{},{},{},{}\n",
                    algo_name.as_str().unwrap_or_default(),
                    report.palette,
                    inst.delta,
                    report.ratio,
                    report.proper,
                    outcome.greedy_edges
                ));
                manifest.results.push(SeedResult {
                    seed,
                    artifacts: out.artifacts,
                    summary: json!({
                        "algorithm": algo,
                        "palette": report.palette,
                        "span": outcome.coloring.span(),
                        "delta": inst.delta,
                        "ratio": report.ratio,
                        "proper": report.proper,
                        "greedy_edges": outcome.greedy_edges,
                        "levels": outcome.plans.len(),
                    }),
                });
            }
            let mut shared = Outputs::new(&cfg.out, None);
            shared.table("summary", &rows, cfg.format)?;
            manifest.shared = shared.artifacts;
        }
        Command::Verify {
            instance,
            matching,
            coloring,
            uniform_missing,
        } => {
            let (inst, input) = load_instance(instance, *uniform_missing)?;
            manifest.inputs.push(input);
            let structural: Vec<String> = validate_instance(&inst)
                .iter()
                .map(ToString::to_string)
                .collect();
            let mut summary = json!({
                "instance_valid": structural.is_empty(),
                "instance_violations": structural,
                "bipartite": inst.is_bipartite(),
                "edges": inst.edge_count(),
            });
            manifest.violations.extend(structural);
            if let Some(path) = matching {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let m =
                    parse_matching(&text).with_context(|| format!("parsing {}", path.display()))?;
                manifest.inputs.push(Artifact {
                    path: path.clone(),
                    sha256: sha256_hex(text.as_bytes()),
                });
                let v = matching_violations(&inst, &m);
                summary["matching"] =
                    json!({ "size": m.len(), "valid": v.is_empty(), "violations": v });
                manifest.violations.extend(v);
            }
            if let Some(path) = coloring {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let c = parse_coloring(&inst, &text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                manifest.inputs.push(Artifact {
                    path: path.clone(),
                    sha256: sha256_hex(text.as_bytes()),
                });
                let report = verify_coloring(&inst, &c);
                if !report.proper {
                    manifest.violations.push(match report.offending {
                        Some((a, b, col)) => format!("edges {a} and {b} share color {col}"),
                        None => "coloring does not cover every edge".to_string(),
                    });
                }
                summary["coloring"] = serde_json::to_value(&report)?;
            }
            let mut out = Outputs::new(&cfg.out, None);
            out.write(
                "verify.json",
                &(serde_json::to_string_pretty(&summary)? + "\n"),
            )?;
            manifest.results.push(SeedResult {
                seed: cfg.seeds[0],
                artifacts: out.artifacts,
                summary,
            });
        }
        Command::Diag {
            instance,
            probe,
            phase_trials,
            report,
            require_bipartite,
            uniform_missing,
        } => {
            let (inst, input) = load_valid(instance, *uniform_missing, *require_bipartite)?;
            manifest.inputs.push(input);
            let backend = cfg.backend();
            for &seed in &cfg.seeds {
                let marg = estimate_marginals(&inst, backend, cfg.trials, seed)?;
                let cov = estimate_covariances(&inst, backend, *probe, cfg.trials, seed)?;
                let conc = concentration_report(
                    &inst,
                    &cfg.reduction(),
                    backend,
                    cfg.trials,
                    *phase_trials,
                    seed,
                )?;
                let mut out = Outputs::new(&cfg.out, prefix(seed));
                out.table("marginals", &marg.to_csv(), cfg.format)?;
                out.table("pairs", &cov.pairs_csv(), cfg.format)?;
                out.table("vertices", &cov.vertices_csv(), cfg.format)?;

                let mut gates = Vec::new();
                let marginal_ok = if marg.exact {
                    marg.max_abs_error <= 1e-9
                } else {
                    marg.worst_z.abs() <= GATE_SE
                };
                gates.push(("marginals", marginal_ok));
                gates.push(("pair_covariance", cov.max_cov_z_excess <= GATE_SE));
                gates.push(("high_mass", cov.max_high_z_excess <= GATE_SE));
                gates.push(("covariance_identity", cov.max_identity_gap <= 1e-12));
                gates.push(("partition", cov.partition_violations == 0));
                for (name, ok) in &gates {
                    if !ok {
                        manifest
                            .violations
                            .push(format!("seed {seed}: gate {name} failed"));
                    }
                }
                let summary = json!({
                    "gates_passed": gates.iter().all(|(_, ok)| *ok),
                    "worst_marginal_z": marg.worst_z,
                    "max_cov_z_excess": cov.max_cov_z_excess,
                    "max_high_z_excess": cov.max_high_z_excess,
                    "gates": gates.iter().map(|(k, ok)| (k.to_string(), json!(ok))).collect::<serde_json::Map<_, _>>(),
                    "marginals": {
                        "exact": marg.exact,
                        "trials": marg.trials,
                        "worst_z": marg.worst_z,
                        "max_abs_error": marg.max_abs_error,
                        "median_se": marg.median_se(),
                        "total_deficiency": marg.total_deficiency,
                    },
                    "covariance": {
                        "pairs": cov.pairs.len(),
                        "max_cov_z_excess": cov.max_cov_z_excess,
                        "max_high_z_excess": cov.max_high_z_excess,
                        "max_identity_gap": cov.max_identity_gap,
                        "partition_violations": cov.partition_violations,
                    },
                    "concentration": conc,
                });
                out.write(report, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
                manifest.results.push(SeedResult {
                    seed,
                    artifacts: out.artifacts,
                    summary,
                });
            }
        }
    }
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(manifest)
}

/// Re-executes a manifest's config into `out` and compares the results.
/// Mismatches become violations of the returned manifest.
pub fn rerun(manifest_path: &Path, out: Option<PathBuf>) -> Result<(RunManifest, RunManifest)> {
    let original = RunManifest::load(manifest_path)?;
    let mut cfg = original.config.clone();
    let out = out.unwrap_or_else(|| {
        manifest_path
            .parent()
            .unwrap_or(Path::new("."))
            .join("rerun")
    });
    cfg.out = std::path::absolute(&out).with_context(|| format!("resolving {}", out.display()))?;
    ensure!(
        cfg.out != original.config.out,
        "rerun output directory must differ from the original run's"
    );
    let mut fresh = execute(&cfg)?;
    let diffs = original.differences(&fresh);
    if fresh.version != original.version {
        fresh.violations.push(format!(
            "code version {} differs from the manifest's {}",
            fresh.version, original.version
        ));
    }
    fresh
        .violations
        .extend(diffs.into_iter().map(|d| format!("rerun mismatch: {d}")));
    Ok((original, fresh))
}
