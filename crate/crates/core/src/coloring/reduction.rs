//! Edge coloring from repeated online rounding.
//!
//! A phase runs `ceil(alpha L)` passes of the rounding algorithm on the
//! still-uncolored subgraph with `x = 1/delta_i`; every pass owns one fresh
//! color and paints the uncolored edges it matches. All passes advance in
//! lockstep with the arrival stream, so the whole procedure stays online.
//! Edges no pass colors are finished by first-fit greedy in a separate range.

use serde::{Deserialize, Serialize};

use super::greedy::ColorCounter;
use crate::graph::{ArrivalEvent, Coloring, GraphInstance, RevealedEdge, VertexId};
use crate::rng::StreamFamily;
use crate::rounding::{Backend, ConstantC, OnlineRounder, RoundingError};

pub const PHASE_LENGTH_CONSTANT: f64 = 12.0;
pub const BIPARTITION_CONSTANT: f64 = 18.0;
pub const GREEDY_CUTOFF_CONSTANT: f64 = 48.0;
pub const DESK_EPSILON_CAP: f64 = 0.3;

/// Stream tags for the child families of one coloring run.
pub(crate) const TAG_PASS: u64 = 1;
pub(crate) const TAG_LEVEL: u64 = 2;
pub(crate) const TAG_SIDES: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// The asymptotic constants as stated; every desk-sized instance falls
    /// through to greedy.
    Paper,
    /// Scaled-down multipliers and `epsilon <= 0.3`, so the phase machinery
    /// runs at `n <= 10^3`.
    Desk,
}

/// Multipliers applied to the constants 12 (phase length), 18 (bipartition
/// stopping degree) and 48 (greedy cutoff).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactors {
    pub phase_length: f64,
    pub bipartition: f64,
    pub greedy_cutoff: f64,
}

impl ScaleFactors {
    pub const UNIT: ScaleFactors = ScaleFactors {
        phase_length: 1.0,
        bipartition: 1.0,
        greedy_cutoff: 1.0,
    };
    /// At `delta = 16, n = 128` these give `L = 6` and a greedy cutoff near 6.
    pub const DESK: ScaleFactors = ScaleFactors {
        phase_length: 0.05,
        bipartition: 0.1,
        greedy_cutoff: 0.01,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub preset: Preset,
    /// Target ratio; one color per `1/alpha` expected matched degree.
    pub alpha: f64,
    pub scales: ScaleFactors,
    pub epsilon_cap: Option<f64>,
}

impl ReductionConfig {
    pub fn paper() -> Self {
        Self {
            preset: Preset::Paper,
            alpha: ConstantC::standard().alpha(),
            scales: ScaleFactors::UNIT,
            epsilon_cap: None,
        }
    }

    pub fn desk() -> Self {
        Self {
            preset: Preset::Desk,
            alpha: ConstantC::standard().alpha(),
            scales: ScaleFactors::DESK,
            epsilon_cap: Some(DESK_EPSILON_CAP),
        }
    }

    pub fn for_preset(preset: Preset) -> Self {
        match preset {
            Preset::Paper => Self::paper(),
            Preset::Desk => Self::desk(),
        }
    }

    fn log_n(n: usize) -> f64 {
        (n.max(2) as f64).ln()
    }

    /// `L = ceil(12 s sqrt(delta ln n))`, at least 1.
    pub fn phase_length(&self, delta: usize, n: usize) -> usize {
        let l = PHASE_LENGTH_CONSTANT
            * self.scales.phase_length
            * (delta as f64 * Self::log_n(n)).sqrt();
        (l.ceil() as usize).max(1)
    }

    /// `epsilon = (ln n / delta)^(1/4)`, capped by the preset.
    pub fn epsilon(&self, delta: usize, n: usize) -> f64 {
        let raw = if delta == 0 {
            f64::INFINITY
        } else {
            (Self::log_n(n) / delta as f64).powf(0.25)
        };
        match self.epsilon_cap {
            Some(cap) => raw.min(cap),
            None => raw,
        }
    }

    /// Residual degree below which greedy takes over: `48 s (delta^3 ln n)^(1/4)`.
    pub fn greedy_cutoff(&self, delta: usize, n: usize) -> f64 {
        GREEDY_CUTOFF_CONSTANT
            * self.scales.greedy_cutoff
            * ((delta as f64).powi(3) * Self::log_n(n)).powf(0.25)
    }

    /// Degree at which the random bipartition recursion stops: `18 s sqrt(delta ln n)`.
    pub fn bipartition_threshold(&self, delta: usize, n: usize) -> f64 {
        BIPARTITION_CONSTANT * self.scales.bipartition * (delta as f64 * Self::log_n(n)).sqrt()
    }
}

/// The phase schedule for one bipartite (sub)instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePlan {
    pub delta: usize,
    pub l: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub greedy_cutoff: f64,
    pub colors_per_phase: usize,
    /// `delta_i = delta - (i - 1) L (1 - epsilon)^2`, strictly decreasing.
    pub deltas: Vec<f64>,
    /// First color of each phase.
    pub color_offsets: Vec<u32>,
    /// Colors reserved for all phases: `phase_count * colors_per_phase`.
    pub reserved: u32,
    /// `2 b - 1` for the degree bound `b` left after the phases.
    pub greedy_reserve: u32,
}

impl PhasePlan {
    pub fn new(cfg: &ReductionConfig, delta: usize, n: usize, color_base: u32) -> Self {
        let l = cfg.phase_length(delta, n);
        let epsilon = cfg.epsilon(delta, n);
        let greedy_cutoff = cfg.greedy_cutoff(delta, n);
        let colors_per_phase = (cfg.alpha * l as f64).ceil() as usize;
        let step = l as f64 * (1.0 - epsilon).powi(2);
        let mut deltas: Vec<f64> = Vec::new();
        if delta > 0 {
            for i in 1..=delta / l {
                let d = delta as f64 - (i - 1) as f64 * step;
                if d < greedy_cutoff || deltas.last().is_some_and(|&prev| d >= prev) {
                    break;
                }
                deltas.push(d);
            }
        }
        let color_offsets = (0..deltas.len())
            .map(|i| color_base + (i * colors_per_phase) as u32)
            .collect();
        let reserved = (deltas.len() * colors_per_phase) as u32;
        let left = (delta as f64 - deltas.len() as f64 * step).clamp(0.0, delta as f64);
        let greedy_reserve = (2.0 * left.ceil() - 1.0).max(0.0) as u32;
        Self {
            delta,
            l,
            epsilon,
            alpha: cfg.alpha,
            greedy_cutoff,
            colors_per_phase,
            deltas,
            color_offsets,
            reserved,
            greedy_reserve,
        }
    }

    pub fn phase_count(&self) -> usize {
        self.deltas.len()
    }

    /// `L (1 - epsilon)^2`, the per-phase degree decrease the analysis needs.
    pub fn target_loss(&self) -> f64 {
        self.l as f64 * (1.0 - self.epsilon).powi(2)
    }
}

/// What one phase did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseStats {
    /// Recursion level (0 when coloring a bipartite instance directly).
    pub level: usize,
    pub phase: usize,
    pub delta_i: f64,
    pub passes: usize,
    /// Largest uncolored degree offered to the phase's first pass.
    pub input_max_degree: usize,
    /// The true residual degree was already below `delta_i`.
    pub below_target: bool,
    /// Offered edges whose value was cut below `1/delta_i` to keep the
    /// fractional matching feasible.
    pub clipped_edges: usize,
    /// Passes that colored at least one edge.
    pub colors_used: usize,
    pub edges_colored: usize,
    /// Vertices entering with degree at least `(1 - epsilon) delta_i`.
    pub near_max_vertices: usize,
    /// Of those, how many lost at most `L (1 - epsilon)^2` edges.
    pub low_progress_vertices: usize,
    /// Mean number of edges colored at the near-maximal vertices.
    pub mean_loss_near_max: f64,
}

struct Pass {
    rounder: OnlineRounder,
    phase: usize,
    color: u32,
    hits: usize,
}

/// Online driver for the passes of every phase of one plan.
pub struct MatchingColorer {
    plan: PhasePlan,
    passes: Vec<Pass>,
    entering: Vec<Vec<u32>>,
    colored: Vec<Vec<u32>>,
    clipped: Vec<usize>,
}

impl MatchingColorer {
    pub fn new(
        n: usize,
        plan: PhasePlan,
        backend: Backend,
        family: &StreamFamily,
    ) -> Result<Self, RoundingError> {
        let consts = ConstantC::standard();
        let mut passes = Vec::new();
        for (phase, &base) in plan.color_offsets.iter().enumerate() {
            for j in 0..plan.colors_per_phase {
                let index = (phase * plan.colors_per_phase + j) as u64;
                passes.push(Pass {
                    rounder: OnlineRounder::new(n, backend, family.child(TAG_PASS, index), consts)?,
                    phase,
                    color: base + j as u32,
                    hits: 0,
                });
            }
        }
        let phases = plan.phase_count();
        Ok(Self {
            plan,
            passes,
            entering: vec![vec![0; n]; phases],
            colored: vec![vec![0; n]; phases],
            clipped: vec![0; phases],
        })
    }

    pub fn plan(&self) -> &PhasePlan {
        &self.plan
    }

    fn bump(counts: &mut Vec<u32>, v: VertexId, by: u32) {
        if v.index() >= counts.len() {
            counts.resize(v.index() + 1, 0);
        }
        counts[v.index()] += by;
    }

    /// Offers the edges `(neighbor, global index)` revealed at `v` to every
    /// pass in order and writes the pass colors into `colors`. Returns the
    /// indices of the edges left uncolored.
    pub fn arrive(
        &mut self,
        v: VertexId,
        edges: &[(VertexId, usize)],
        colors: &mut [Option<u32>],
    ) -> Result<Vec<usize>, RoundingError> {
        let mut remaining: Vec<(VertexId, usize)> = edges.to_vec();
        let mut current_phase = usize::MAX;
        for pass in &mut self.passes {
            let phase = pass.phase;
            if phase != current_phase {
                current_phase = phase;
                for &(u, _) in &remaining {
                    Self::bump(&mut self.entering[phase], u, 1);
                }
                Self::bump(&mut self.entering[phase], v, remaining.len() as u32);
            }
            let target = 1.0 / self.plan.deltas[phase];
            let ledger = pass.rounder.ledger();
            let mut v_mass = 0.0;
            let mut offered = Vec::with_capacity(remaining.len());
            let mut lookup = Vec::with_capacity(remaining.len());
            for (slot, &(u, _)) in remaining.iter().enumerate() {
                let x = target
                    .min(1.0 - ledger.frac_degree(u))
                    .min(1.0 - ledger.frac_degree(v) - v_mass);
                if x < target {
                    self.clipped[phase] += 1;
                }
                if x <= 0.0 {
                    continue;
                }
                v_mass += x;
                offered.push(RevealedEdge { neighbor: u, x });
                lookup.push(slot);
            }
            let t = pass.rounder.arrive(&ArrivalEvent::with_edges(v, offered))?;
            if let Some(edge) = t.matched {
                let slot = remaining
                    .iter()
                    .position(|&(u, _)| u == edge.u)
                    .expect("matched edge was offered");
                let (u, idx) = remaining.remove(slot);
                colors[idx] = Some(pass.color);
                pass.hits += 1;
                Self::bump(&mut self.colored[phase], u, 1);
                Self::bump(&mut self.colored[phase], v, 1);
            }
        }
        Ok(remaining.into_iter().map(|(_, i)| i).collect())
    }

    /// Total shortfall recorded by the rounding passes.
    pub fn deficiency(&self) -> f64 {
        self.passes
            .iter()
            .map(|p| p.rounder.schedule().total_deficiency())
            .sum()
    }

    pub fn phase_stats(&self, level: usize) -> Vec<PhaseStats> {
        let per = self.plan.colors_per_phase;
        (0..self.plan.phase_count())
            .map(|phase| {
                let passes = &self.passes[phase * per..(phase + 1) * per];
                let delta_i = self.plan.deltas[phase];
                let entering = &self.entering[phase];
                let input_max_degree = entering.iter().copied().max().unwrap_or(0) as usize;
                let near: Vec<usize> = (0..entering.len())
                    .filter(|&v| {
                        entering[v] > 0 && entering[v] as f64 >= (1.0 - self.plan.epsilon) * delta_i
                    })
                    .collect();
                let losses: Vec<u32> = near
                    .iter()
                    .map(|&v| self.colored[phase].get(v).copied().unwrap_or(0))
                    .collect();
                let low = losses
                    .iter()
                    .filter(|&&x| x as f64 <= self.plan.target_loss())
                    .count();
                let mean = if losses.is_empty() {
                    0.0
                } else {
                    losses.iter().map(|&x| x as f64).sum::<f64>() / losses.len() as f64
                };
                PhaseStats {
                    level,
                    phase,
                    delta_i,
                    passes: passes.len(),
                    input_max_degree,
                    below_target: (input_max_degree as f64) < delta_i,
                    clipped_edges: self.clipped[phase],
                    colors_used: passes.iter().filter(|p| p.hits > 0).count(),
                    edges_colored: passes.iter().map(|p| p.hits).sum(),
                    near_max_vertices: near.len(),
                    low_progress_vertices: low,
                    mean_loss_near_max: mean,
                }
            })
            .collect()
    }
}

/// A coloring plus what produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoringOutcome {
    pub coloring: Coloring,
    pub plans: Vec<PhasePlan>,
    pub phases: Vec<PhaseStats>,
    /// Edges colored by the greedy fallback.
    pub greedy_edges: usize,
    /// First color of the greedy range.
    pub greedy_offset: u32,
    pub deficiency_total: f64,
}

/// The reduction as an online algorithm: feed arrivals, get colors.
pub struct ReductionColorer {
    colorer: MatchingColorer,
    counter: ColorCounter,
    greedy_offset: u32,
    greedy_edges: usize,
}

impl ReductionColorer {
    /// `n` and `delta` are the declared instance parameters, known upfront.
    pub fn new(
        n: usize,
        delta: usize,
        cfg: &ReductionConfig,
        backend: Backend,
        seed: u64,
    ) -> Result<Self, RoundingError> {
        let plan = PhasePlan::new(cfg, delta, n, 0);
        let greedy_offset = plan.reserved;
        Ok(Self {
            colorer: MatchingColorer::new(n, plan, backend, &StreamFamily::new(seed))?,
            counter: ColorCounter::new(n),
            greedy_offset,
            greedy_edges: 0,
        })
    }

    /// Colors of the edges revealed by `event`, in order.
    pub fn arrive(&mut self, event: &ArrivalEvent) -> Result<Vec<u32>, RoundingError> {
        let edges: Vec<(VertexId, usize)> = event
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.neighbor, i))
            .collect();
        let mut colors = vec![None; edges.len()];
        for i in self.colorer.arrive(event.vertex, &edges, &mut colors)? {
            colors[i] = Some(self.counter.assign_first_fit(
                edges[i].0,
                event.vertex,
                self.greedy_offset,
            ));
            self.greedy_edges += 1;
        }
        Ok(colors
            .into_iter()
            .map(|c| c.expect("every edge colored"))
            .collect())
    }

    pub fn finish(self, coloring: Coloring) -> ColoringOutcome {
        ColoringOutcome {
            coloring,
            phases: self.colorer.phase_stats(0),
            deficiency_total: self.colorer.deficiency(),
            plans: vec![self.colorer.plan().clone()],
            greedy_edges: self.greedy_edges,
            greedy_offset: self.greedy_offset,
        }
    }
}

/// Colors a (bipartite) instance with the phase reduction, finishing the
/// residual greedily.
pub fn color_via_matchings(
    inst: &GraphInstance,
    cfg: &ReductionConfig,
    backend: Backend,
    seed: u64,
) -> Result<ColoringOutcome, RoundingError> {
    let mut c = ReductionColorer::new(inst.n, inst.delta, cfg, backend, seed)?;
    let mut colors = Vec::with_capacity(inst.edge_count());
    for a in &inst.arrivals {
        colors.extend(c.arrive(a)?);
    }
    Ok(c.finish(Coloring::new(colors)))
}
