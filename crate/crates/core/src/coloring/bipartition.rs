//! Recursive random bipartition turning a general graph into bipartite
//! layers with (roughly) halving degrees.
//!
//! Each vertex draws one side bit per level when it arrives. An edge belongs
//! to the first level whose bits differ at its endpoints; edges that never
//! cross are left for greedy.

use rand::Rng;
use serde::Serialize;

use super::reduction::{ReductionConfig, TAG_SIDES};
use crate::graph::{GraphInstance, RevealedEdge, Side};
use crate::rng::{Stage, StreamFamily};

/// Side labels per level, fixed at arrival.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartitionAssignment {
    /// `sides[level][vertex]`.
    pub sides: Vec<Vec<Side>>,
    /// The instance's own side labels were used for the single level.
    pub from_labels: bool,
}

impl BipartitionAssignment {
    pub fn levels(&self) -> usize {
        self.sides.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartitionSplit {
    pub assignment: BipartitionAssignment,
    /// Degree bound `delta ((1 + epsilon)/2)^level` of each level's subgraph.
    pub level_bounds: Vec<f64>,
    /// Global edge indices per level.
    pub level_edges: Vec<Vec<usize>>,
    /// Edges that cross no level.
    pub residual: Vec<usize>,
    pub epsilon: f64,
    pub threshold: f64,
}

/// Number of levels and their degree bounds: levels are added until the
/// bound drops to the stopping threshold.
pub fn level_bounds(delta: usize, epsilon: f64, threshold: f64) -> Vec<f64> {
    let shrink = (1.0 + epsilon) / 2.0;
    let mut out = Vec::new();
    if !(shrink < 1.0) {
        return out;
    }
    let mut bound = delta as f64;
    while bound > threshold && bound >= 1.0 {
        bound *= shrink;
        out.push(bound);
    }
    out
}

/// Side bits of `vertex` for every level, drawn from its own stream.
pub fn draw_sides(family: &StreamFamily, vertex: u64, levels: usize) -> Vec<Side> {
    let mut rng = family.child(TAG_SIDES, 0).stream(0, vertex, Stage::Labels);
    (0..levels)
        .map(|_| {
            if rng.random::<bool>() {
                Side::Two
            } else {
                Side::One
            }
        })
        .collect()
}

/// The level structure of a run, fixed before the first arrival from the
/// declared `n`, `delta` and (optional) side labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLayout {
    /// Degree bound of each level's subgraph.
    pub bounds: Vec<f64>,
    /// Declared labels, used as the single level when every vertex has one.
    pub labels: Option<Vec<Side>>,
    pub epsilon: f64,
    pub threshold: f64,
    family: StreamFamily,
}

impl LevelLayout {
    pub fn new(
        n: usize,
        delta: usize,
        declared: Option<&[Side]>,
        cfg: &ReductionConfig,
        seed: u64,
    ) -> Self {
        let epsilon = cfg.epsilon(delta, n);
        let threshold = cfg.bipartition_threshold(delta, n);
        let labels = declared
            .filter(|s| s.len() == n && s.iter().all(|&x| x != Side::Unlabeled))
            .map(<[Side]>::to_vec);
        let bounds = match labels {
            Some(_) => vec![delta as f64],
            None => level_bounds(delta, epsilon, threshold),
        };
        Self {
            bounds,
            labels,
            epsilon,
            threshold,
            family: StreamFamily::new(seed),
        }
    }

    pub fn levels(&self) -> usize {
        self.bounds.len()
    }

    /// Side of `v` at every level, known as soon as `v` arrives.
    pub fn sides_of(&self, v: usize) -> Vec<Side> {
        match &self.labels {
            Some(l) => vec![l.get(v).copied().unwrap_or_default()],
            None => draw_sides(&self.family, v as u64, self.levels()),
        }
    }

    /// First level at which the endpoints' sides differ.
    pub fn level_of(&self, su: &[Side], sv: &[Side]) -> Option<usize> {
        su.iter().zip(sv).position(|(a, b)| a != b)
    }
}

/// Splits `inst` into per-level bipartite edge sets. Declared side labels
/// covering every vertex are used directly as a single level; edges they do
/// not separate go to the residual.
pub fn bipartition_split(
    inst: &GraphInstance,
    cfg: &ReductionConfig,
    seed: u64,
) -> BipartitionSplit {
    let layout = LevelLayout::new(inst.n, inst.delta, inst.sides.as_deref(), cfg, seed);
    let levels = layout.levels();
    let mut per_vertex: Vec<Vec<Side>> = vec![Vec::new(); inst.n];
    let mut level_edges = vec![Vec::new(); levels];
    let mut residual = Vec::new();
    let mut next = 0;
    for a in &inst.arrivals {
        let v = a.vertex.index();
        let own = layout.sides_of(v);
        for e in &a.edges {
            let su = per_vertex
                .get(e.neighbor.index())
                .map_or(&[][..], |s| &s[..]);
            match layout.level_of(su, &own) {
                Some(l) => level_edges[l].push(next),
                None => residual.push(next),
            }
            next += 1;
        }
        if v < inst.n {
            per_vertex[v] = own;
        }
    }
    let mut sides = vec![vec![Side::Unlabeled; inst.n]; levels];
    for (v, own) in per_vertex.iter().enumerate() {
        for (l, &s) in own.iter().enumerate() {
            sides[l][v] = s;
        }
    }
    BipartitionSplit {
        assignment: BipartitionAssignment {
            sides,
            from_labels: layout.labels.is_some(),
        },
        level_bounds: layout.bounds,
        level_edges,
        residual,
        epsilon: layout.epsilon,
        threshold: layout.threshold,
    }
}

impl BipartitionSplit {
    /// The level's subgraph as a stream of its own: same vertices, only the
    /// crossing edges, `x = 1/delta'` with `delta'` the larger of the bound
    /// and the realized maximum degree.
    pub fn level_instance(&self, inst: &GraphInstance, level: usize) -> GraphInstance {
        let keep: std::collections::HashSet<usize> =
            self.level_edges[level].iter().copied().collect();
        let mut out = GraphInstance::empty(inst.n, 0);
        let mut deg = vec![0usize; inst.n];
        for e in inst.edges().filter(|e| keep.contains(&e.index)) {
            deg[e.edge.u.index()] += 1;
            deg[e.edge.v.index()] += 1;
            out.arrivals[e.edge.v.index()].edges.push(RevealedEdge {
                neighbor: e.edge.u,
                x: 0.0,
            });
        }
        let delta =
            (self.level_bounds[level].ceil() as usize).max(deg.iter().copied().max().unwrap_or(0));
        out.delta = delta;
        let x = if delta == 0 { 0.0 } else { 1.0 / delta as f64 };
        for a in &mut out.arrivals {
            for e in &mut a.edges {
                e.x = x;
            }
        }
        out.with_sides(self.assignment.sides[level].clone())
    }
}
