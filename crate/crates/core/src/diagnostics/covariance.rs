use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial_se, calibrate, trial_family, z_score};
use crate::graph::{GraphInstance, VertexId};
use crate::rounding::{replay, Backend, ConstantC, MatchState, RoundingError};

/// Which arrivals serve as probe times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// Every arrival with at least two earlier neighbors.
    All,
    /// Only the arrival with the most earlier neighbors.
    Worst,
}

/// Whether each (vertex, partner) match happens while the vertex has high
/// fractional degree: `sum_{z < partner} x_{vertex,z} > (1/2 - c)/(1/2 + c)`.
struct HighTable {
    high: HashMap<(u32, u32), bool>,
}

impl HighTable {
    fn new(inst: &GraphInstance, consts: &ConstantC) -> Self {
        let mut nbrs: Vec<Vec<(u32, f64)>> = vec![Vec::new(); inst.n];
        for e in inst.edges() {
            nbrs[e.edge.u.index()].push((e.edge.v.0, e.x));
            nbrs[e.edge.v.index()].push((e.edge.u.0, e.x));
        }
        let mut high = HashMap::new();
        for (u, list) in nbrs.iter_mut().enumerate() {
            list.sort_by_key(|&(w, _)| w);
            let mut before = 0.0;
            for &(w, x) in list.iter() {
                high.insert((u as u32, w), before > consts.low_degree_threshold);
                before += x;
            }
        }
        Self { high }
    }

    fn is_high(&self, u: u32, partner: u32) -> bool {
        self.high.get(&(u, partner)).copied().unwrap_or(false)
    }
}

/// Per-vertex matching times of one run and the low/high split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeStatusTrace {
    /// Arrival at which the vertex was matched (the later endpoint).
    pub matched_time: Vec<Option<u32>>,
    /// The match happened while the vertex had high fractional degree.
    pub high: Vec<bool>,
}

impl FreeStatusTrace {
    fn build(status: &MatchState, n: usize, table: &HighTable) -> Self {
        let mut matched_time = vec![None; n];
        let mut high = vec![false; n];
        for u in 0..n {
            if let Some(w) = status.partner(VertexId(u as u32)) {
                matched_time[u] = Some((u as u32).max(w.0));
                high[u] = table.is_high(u as u32, w.0);
            }
        }
        Self { matched_time, high }
    }

    /// `u` is free just before `v` arrives.
    pub fn free_before(&self, u: usize, v: u32) -> bool {
        self.matched_time[u].is_none_or(|t| t >= v)
    }

    /// `u` is matched before `v`, with low fractional degree at the time.
    pub fn low_before(&self, u: usize, v: u32) -> bool {
        !self.free_before(u, v) && !self.high[u]
    }

    pub fn high_before(&self, u: usize, v: u32) -> bool {
        !self.free_before(u, v) && self.high[u]
    }
}

/// The trace of one finished run.
pub fn free_status_trace(inst: &GraphInstance, status: &MatchState) -> FreeStatusTrace {
    FreeStatusTrace::build(
        status,
        inst.n,
        &HighTable::new(inst, &ConstantC::standard()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCovariance {
    pub probe: VertexId,
    pub u: VertexId,
    pub w: VertexId,
    pub same_side: bool,
    /// `Cov(F_{u,v}, F_{w,v})`.
    pub cov_free: f64,
    pub se: f64,
    /// `Cov(M_{u,v}, M_{w,v})`, counted separately as a self-check.
    pub cov_matched: f64,
    /// `Cov(M^L_{u,v}, M^L_{w,v})`.
    pub cov_low: f64,
    pub se_low: f64,
    pub bound: f64,
    /// `(cov_free - bound) / se`.
    pub z_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexHighMass {
    pub u: VertexId,
    pub p_matched: f64,
    pub p_low: f64,
    /// `Pr[M^H]` at the end of the stream (the largest over probe times).
    pub p_high: f64,
    pub se: f64,
    pub bound: f64,
    pub z_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub trials: u64,
    /// The instance is bipartite, so probed pairs are same-side pairs.
    pub bipartite: bool,
    pub pairs: Vec<PairCovariance>,
    pub vertices: Vec<VertexHighMass>,
    pub max_cov_z_excess: f64,
    pub max_high_z_excess: f64,
    /// Largest `|Cov(F, F') - Cov(M, M')|`; zero up to rounding.
    pub max_identity_gap: f64,
    /// Matched vertices counted in neither or both of the low/high classes.
    pub partition_violations: u64,
}

impl CovarianceReport {
    pub fn pairs_csv(&self) -> String {
        let mut s = String::from(
            "probe,u,w,same_side,cov_free,se,cov_matched,cov_low,se_low,bound,z_excess\n",
        );
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.probe,
                p.u,
                p.w,
                p.same_side,
                p.cov_free,
                p.se,
                p.cov_matched,
                p.cov_low,
                p.se_low,
                p.bound,
                p.z_excess
            );
        }
        s
    }

    pub fn vertices_csv(&self) -> String {
        let mut s = String::from("u,p_matched,p_low,p_high,se,bound,z_excess\n");
        for v in &self.vertices {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                v.u, v.p_matched, v.p_low, v.p_high, v.se, v.bound, v.z_excess
            );
        }
        s
    }
}

/// Covariance and its standard error from counts of `A`, `B` and `A and B`.
fn covariance(a: u64, b: u64, ab: u64, t: u64) -> (f64, f64) {
    let tf = t as f64;
    let (pa, pb, pab) = (a as f64 / tf, b as f64 / tf, ab as f64 / tf);
    let cov = pab - pa * pb;
    let cells = [
        (1.0, 1.0, pab),
        (1.0, 0.0, pa - pab),
        (0.0, 1.0, pb - pab),
        (0.0, 0.0, 1.0 - pa - pb + pab),
    ];
    let second: f64 = cells
        .iter()
        .map(|&(x, y, p)| p * (x - pa).powi(2) * (y - pb).powi(2))
        .sum();
    (cov, ((second - cov * cov).max(0.0) / tf).sqrt())
}

fn probes(inst: &GraphInstance, probe: Probe) -> Vec<(u32, u32, u32)> {
    let mut times: Vec<(u32, Vec<u32>)> = inst
        .arrivals
        .iter()
        .filter(|a| a.edges.len() >= 2)
        .map(|a| {
            let mut ns: Vec<u32> = a.edges.iter().map(|e| e.neighbor.0).collect();
            ns.sort_unstable();
            (a.vertex.0, ns)
        })
        .collect();
    if probe == Probe::Worst {
        if let Some(best) = times.iter().map(|t| t.1.len()).max() {
            let first = times.iter().position(|t| t.1.len() == best).unwrap();
            times = vec![times.swap_remove(first)];
        }
    }
    let mut out = Vec::new();
    for (v, ns) in times {
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                out.push((v, ns[i], ns[j]));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Default)]
struct PairCounts([u64; 9]);

/// Empirical `Cov(F_{u,v}, F_{w,v})` for pairs of earlier neighbors `u, w`
/// of each probe `v`, plus the low-degree covariances and per-vertex
/// `Pr[M^H]`.
pub fn estimate_covariances(
    inst: &GraphInstance,
    backend: Backend,
    probe: Probe,
    trials: u64,
    seed: u64,
) -> Result<CovarianceReport, RoundingError> {
    let schedule = calibrate(inst, backend, seed)?;
    let consts = schedule.consts;
    let table = HighTable::new(inst, &consts);
    let pairs = probes(inst, probe);
    let sides = inst.bipartition();
    let family = trial_family(seed);
    let n = inst.n;
    let end = n as u32;

    type Acc = (Vec<PairCounts>, Vec<[u64; 3]>, u64);
    let zero = || -> Acc { (vec![PairCounts::default(); pairs.len()], vec![[0; 3]; n], 0) };
    let (pc, vc, violations) = (0..trials)
        .into_par_iter()
        .fold(zero, |mut acc, t| {
            let (status, _) = replay(&schedule, n, &family, t);
            let tr = FreeStatusTrace::build(&status, n, &table);
            for (k, &(v, u, w)) in pairs.iter().enumerate() {
                let (u, w) = (u as usize, w as usize);
                let (fu, fw) = (tr.free_before(u, v), tr.free_before(w, v));
                let (lu, lw) = (tr.low_before(u, v), tr.low_before(w, v));
                let c = &mut acc.0[k].0;
                c[0] += fu as u64;
                c[1] += fw as u64;
                c[2] += (fu && fw) as u64;
                c[3] += !fu as u64;
                c[4] += !fw as u64;
                c[5] += (!fu && !fw) as u64;
                c[6] += lu as u64;
                c[7] += lw as u64;
                c[8] += (lu && lw) as u64;
            }
            for u in 0..n {
                let matched = !tr.free_before(u, end);
                let low = tr.low_before(u, end);
                let high = tr.high_before(u, end);
                acc.1[u][0] += matched as u64;
                acc.1[u][1] += low as u64;
                acc.1[u][2] += high as u64;
                if matched != (low ^ high) {
                    acc.2 += 1;
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                for i in 0..9 {
                    x.0[i] += y.0[i];
                }
            }
            for (x, y) in a.1.iter_mut().zip(b.1) {
                for i in 0..3 {
                    x[i] += y[i];
                }
            }
            a.2 += b.2;
            a
        });

    let bound = 6.0 * consts.c;
    let pair_reports: Vec<PairCovariance> = pairs
        .iter()
        .zip(&pc)
        .map(|(&(v, u, w), c)| {
            let c = c.0;
            let (cov_free, se) = covariance(c[0], c[1], c[2], trials);
            let (cov_matched, _) = covariance(c[3], c[4], c[5], trials);
            let (cov_low, se_low) = covariance(c[6], c[7], c[8], trials);
            let same_side = sides
                .as_ref()
                .is_some_and(|s| s[u as usize] == s[w as usize]);
            PairCovariance {
                probe: VertexId(v),
                u: VertexId(u),
                w: VertexId(w),
                same_side,
                cov_free,
                se,
                cov_matched,
                cov_low,
                se_low,
                bound,
                z_excess: z_score(cov_free, bound, se),
            }
        })
        .collect();
    let high_bound = 2.0 * consts.c;
    let vertices: Vec<VertexHighMass> = vc
        .iter()
        .enumerate()
        .map(|(u, c)| {
            let tf = trials as f64;
            let p_high = c[2] as f64 / tf;
            let se = binomial_se(p_high, trials);
            VertexHighMass {
                u: VertexId(u as u32),
                p_matched: c[0] as f64 / tf,
                p_low: c[1] as f64 / tf,
                p_high,
                se,
                bound: high_bound,
                z_excess: z_score(p_high, high_bound, se),
            }
        })
        .collect();
    let max_z = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    Ok(CovarianceReport {
        trials,
        bipartite: sides.is_some(),
        max_cov_z_excess: max_z(&mut pair_reports.iter().map(|p| p.z_excess)),
        max_high_z_excess: max_z(&mut vertices.iter().map(|v| v.z_excess)),
        max_identity_gap: pair_reports
            .iter()
            .map(|p| (p.cov_free - p.cov_matched).abs())
            .fold(0.0, f64::max),
        partition_violations: violations,
        pairs: pair_reports,
        vertices,
    })
}
