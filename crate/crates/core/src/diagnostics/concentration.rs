use rayon::prelude::*;
use serde::Serialize;

use super::{TAG_BIPARTITION, TAG_PHASES};
use crate::coloring::{color_via_matchings, draw_sides, ReductionConfig};
use crate::graph::GraphInstance;
use crate::rng::StreamFamily;
use crate::rounding::{Backend, RoundingError};

/// Crossing degrees of one random bipartition against the Chernoff target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartitionConcentration {
    pub delta_prime: usize,
    pub epsilon: f64,
    /// `(delta'/2)(1 + epsilon)`.
    pub threshold: f64,
    /// `exp(-(delta'/2) epsilon^2 / 3)`.
    pub chernoff_target: f64,
    pub trials: u64,
    /// (trial, vertex) samples over vertices of positive degree.
    pub samples: u64,
    /// Fraction of samples with `D_v > threshold`.
    pub exceedance_frequency: f64,
    /// The same for the complement degree `d(v) - D_v`.
    pub complement_exceedance_frequency: f64,
    /// Fraction of trials in which some vertex exceeds.
    pub trial_frequency: f64,
    /// Largest per-vertex exceedance frequency.
    pub max_vertex_frequency: f64,
    /// `sum D_v / sum (d(v)/2)`, averaged over trials; `None` without edges.
    pub mean_crossing_ratio: Option<f64>,
}

/// Per-phase progress of the reduction, pooled over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseConcentration {
    pub phase: usize,
    pub delta_i: f64,
    /// `L (1 - epsilon)^2`.
    pub target_loss: f64,
    pub trials: u64,
    pub near_max_vertices: u64,
    /// Fraction of near-maximal vertices that lost at most `target_loss`.
    pub low_progress_frequency: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub bipartition: BipartitionConcentration,
    pub phases: Vec<PhaseConcentration>,
}

/// Empirical tail frequencies for the level-one bipartition (over `trials`
/// draws) and for the per-phase degree decrease of the reduction (over
/// `phase_trials` colorings).
pub fn concentration_report(
    inst: &GraphInstance,
    cfg: &ReductionConfig,
    backend: Backend,
    trials: u64,
    phase_trials: u64,
    seed: u64,
) -> Result<ConcentrationReport, RoundingError> {
    let delta_prime = inst.delta;
    let epsilon = cfg.epsilon(delta_prime, inst.n);
    let half = delta_prime as f64 / 2.0;
    let threshold = half * (1.0 + epsilon);
    let adjacency = inst.adjacency();
    let root = StreamFamily::new(seed);

    type Acc = (u64, u64, u64, u64, u64, Vec<u64>);
    let zero = || -> Acc { (0, 0, 0, 0, 0, vec![0; inst.n]) };
    let (samples, over, comp_over, trials_over, crossing, per_vertex) = (0..trials)
        .into_par_iter()
        .fold(zero, |mut acc, t| {
            let family = root.child(TAG_BIPARTITION, t);
            let sides: Vec<_> = (0..inst.n)
                .map(|v| draw_sides(&family, v as u64, 1)[0])
                .collect();
            let mut any = false;
            for (v, ns) in adjacency.iter().enumerate() {
                if ns.is_empty() {
                    continue;
                }
                let d = ns
                    .iter()
                    .filter(|u| sides.get(u.index()).is_some_and(|&s| s != sides[v]))
                    .count() as u64;
                acc.0 += 1;
                acc.4 += d;
                if d as f64 > threshold {
                    acc.1 += 1;
                    acc.5[v] += 1;
                    any = true;
                }
                if (ns.len() as u64 - d) as f64 > threshold {
                    acc.2 += 1;
                }
            }
            acc.3 += any as u64;
            acc
        })
        .reduce(zero, |mut a, b| {
            a.0 += b.0;
            a.1 += b.1;
            a.2 += b.2;
            a.3 += b.3;
            a.4 += b.4;
            a.5.iter_mut().zip(b.5).for_each(|(x, y)| *x += y);
            a
        });
    let frac = |k: u64, of: u64| if of == 0 { 0.0 } else { k as f64 / of as f64 };
    let half_degree_sum: f64 = adjacency.iter().map(|ns| ns.len() as f64 / 2.0).sum();
    let bipartition = BipartitionConcentration {
        delta_prime,
        epsilon,
        threshold,
        chernoff_target: (-half * epsilon * epsilon / 3.0).exp(),
        trials,
        samples,
        exceedance_frequency: frac(over, samples),
        complement_exceedance_frequency: frac(comp_over, samples),
        trial_frequency: frac(trials_over, trials),
        max_vertex_frequency: per_vertex
            .iter()
            .map(|&k| frac(k, trials))
            .fold(0.0, f64::max),
        mean_crossing_ratio: (half_degree_sum > 0.0 && trials > 0)
            .then(|| crossing as f64 / (trials as f64 * half_degree_sum)),
    };

    let mut phases: Vec<PhaseConcentration> = Vec::new();
    let mut loss_sums: Vec<f64> = Vec::new();
    let mut low_counts: Vec<u64> = Vec::new();
    for t in 0..phase_trials {
        let s = root.child(TAG_PHASES, t).seed();
        let out = color_via_matchings(inst, cfg, backend, s)?;
        let target_loss = out.plans[0].target_loss();
        for p in &out.phases {
            if phases.len() <= p.phase {
                phases.push(PhaseConcentration {
                    phase: p.phase,
                    delta_i: p.delta_i,
                    target_loss,
                    trials: 0,
                    near_max_vertices: 0,
                    low_progress_frequency: 0.0,
                    mean_loss: 0.0,
                });
                loss_sums.push(0.0);
                low_counts.push(0);
            }
            let agg = &mut phases[p.phase];
            agg.trials += 1;
            agg.near_max_vertices += p.near_max_vertices as u64;
            loss_sums[p.phase] += p.mean_loss_near_max * p.near_max_vertices as f64;
            low_counts[p.phase] += p.low_progress_vertices as u64;
        }
    }
    for (i, p) in phases.iter_mut().enumerate() {
        p.low_progress_frequency = frac(low_counts[i], p.near_max_vertices);
        p.mean_loss = if p.near_max_vertices == 0 {
            0.0
        } else {
            loss_sums[i] / p.near_max_vertices as f64
        };
    }
    Ok(ConcentrationReport {
        bipartition,
        phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_regular_bipartite, ArrivalOrder};

    #[test]
    fn empty_graph_gives_empty_report() {
        let inst = GraphInstance::empty(10, 0);
        let r = concentration_report(
            &inst,
            &ReductionConfig::desk(),
            Backend::Exact { cap: 14 },
            10,
            1,
            0,
        )
        .unwrap();
        assert_eq!(r.bipartition.samples, 0);
        assert_eq!(r.bipartition.mean_crossing_ratio, None);
        assert!(r.phases.is_empty());
    }

    #[test]
    fn epsilon_one_never_exceeds() {
        let inst = gen_regular_bipartite(20, 2, 1, ArrivalOrder::Random).unwrap();
        let mut cfg = ReductionConfig::desk();
        cfg.epsilon_cap = None;
        cfg.scales.phase_length = 100.0;
        assert!(cfg.epsilon(2, 40) >= 1.0);
        let r = concentration_report(&inst, &cfg, Backend::Exact { cap: 14 }, 200, 0, 2).unwrap();
        assert_eq!(r.bipartition.exceedance_frequency, 0.0);
        assert_eq!(r.bipartition.complement_exceedance_frequency, 0.0);
    }
}
