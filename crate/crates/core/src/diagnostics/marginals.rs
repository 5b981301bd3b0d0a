use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{binomial_se, calibrate, edge_index, trial_family, z_score};
use crate::graph::{GraphInstance, VertexId};
use crate::rounding::{replay, Backend, RoundingError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeMarginal {
    pub u: VertexId,
    pub v: VertexId,
    pub x: f64,
    /// `(1/2 + c) x`.
    pub target: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    /// Estimates are exact probabilities rather than sample frequencies.
    pub exact: bool,
    pub trials: u64,
    pub edges: Vec<EdgeMarginal>,
    pub worst_z: f64,
    pub max_abs_error: f64,
    pub total_deficiency: f64,
}

impl MarginalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,v,x,target,estimate,se,z\n");
        for e in &self.edges {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                e.u, e.v, e.x, e.target, e.estimate, e.se, e.z
            );
        }
        s
    }

    pub fn median_se(&self) -> f64 {
        let mut se: Vec<f64> = self.edges.iter().map(|e| e.se).collect();
        se.sort_by(f64::total_cmp);
        se.get(se.len() / 2).copied().unwrap_or(f64::NAN)
    }
}

/// Per-edge match probabilities. The exact backend reports exact values;
/// the ensemble backend calibrates once and counts over `trials` replays.
pub fn estimate_marginals(
    inst: &GraphInstance,
    backend: Backend,
    trials: u64,
    seed: u64,
) -> Result<MarginalReport, RoundingError> {
    let schedule = calibrate(inst, backend, seed)?;
    let h = schedule.consts.half_plus_c;
    let exact = matches!(backend, Backend::Exact { .. });
    let counts = if exact {
        Vec::new()
    } else {
        let index = edge_index(inst);
        let family = trial_family(seed);
        let m = inst.edge_count();
        (0..trials)
            .into_par_iter()
            .fold(
                || vec![0u64; m],
                |mut acc, t| {
                    let (_, transcripts) = replay(&schedule, inst.n, &family, t);
                    for e in transcripts.iter().filter_map(|tr| tr.matched) {
                        acc[index[&e]] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; m],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    let edges: Vec<EdgeMarginal> = schedule
        .edges()
        .enumerate()
        .map(|(i, e)| {
            let target = h * e.x;
            let (estimate, se) = if exact {
                (e.marginal, 0.0)
            } else {
                let p = counts[i] as f64 / trials as f64;
                (p, binomial_se(p, trials))
            };
            EdgeMarginal {
                u: e.edge.u,
                v: e.edge.v,
                x: e.x,
                target,
                estimate,
                se,
                z: z_score(estimate, target, se),
            }
        })
        .collect();
    let worst_z = edges.iter().map(|e| e.z.abs()).fold(0.0, f64::max);
    let max_abs_error = edges
        .iter()
        .map(|e| (e.estimate - e.target).abs())
        .fold(0.0, f64::max);
    Ok(MarginalReport {
        exact,
        trials: if exact { 0 } else { trials },
        edges,
        worst_z,
        max_abs_error,
        total_deficiency: schedule.total_deficiency(),
    })
}
