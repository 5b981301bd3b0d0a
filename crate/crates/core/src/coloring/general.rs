use super::bipartition::LevelLayout;
use super::greedy::ColorCounter;
use super::reduction::{ColoringOutcome, MatchingColorer, PhasePlan, ReductionConfig, TAG_LEVEL};
use crate::graph::{ArrivalEvent, Coloring, GraphInstance, Side, VertexId};
use crate::rng::StreamFamily;
use crate::rounding::{Backend, RoundingError};

/// The general-graph pipeline as an online algorithm: random bipartition
/// levels, each colored by the phase reduction in its own contiguous
/// palette, and greedy on whatever no level covers.
pub struct GeneralColorer {
    layout: LevelLayout,
    sides: Vec<Vec<Side>>,
    colorers: Vec<MatchingColorer>,
    counter: ColorCounter,
    greedy_offset: u32,
    greedy_edges: usize,
}

impl GeneralColorer {
    /// `n`, `delta` and the side labels are the declared instance header.
    pub fn new(
        n: usize,
        delta: usize,
        declared: Option<&[Side]>,
        cfg: &ReductionConfig,
        backend: Backend,
        seed: u64,
    ) -> Result<Self, RoundingError> {
        let layout = LevelLayout::new(n, delta, declared, cfg, seed);
        let family = StreamFamily::new(seed);
        let mut base = 0u32;
        let mut colorers = Vec::with_capacity(layout.levels());
        for (level, &bound) in layout.bounds.iter().enumerate() {
            let plan = PhasePlan::new(cfg, bound.ceil() as usize, n, base);
            base += plan.reserved;
            colorers.push(MatchingColorer::new(
                n,
                plan,
                backend,
                &family.child(TAG_LEVEL, level as u64),
            )?);
        }
        Ok(Self {
            layout,
            sides: vec![Vec::new(); n],
            colorers,
            counter: ColorCounter::new(n),
            greedy_offset: base,
            greedy_edges: 0,
        })
    }

    /// Colors of the edges revealed by `event`, in order.
    pub fn arrive(&mut self, event: &ArrivalEvent) -> Result<Vec<u32>, RoundingError> {
        let v = event.vertex;
        let own = self.layout.sides_of(v.index());
        let mut per_level: Vec<Vec<(VertexId, usize)>> = vec![Vec::new(); self.colorers.len()];
        let mut leftover: Vec<usize> = Vec::new();
        for (i, e) in event.edges.iter().enumerate() {
            let su = self
                .sides
                .get(e.neighbor.index())
                .map_or(&[][..], |s| &s[..]);
            match self.layout.level_of(su, &own) {
                Some(l) => per_level[l].push((e.neighbor, i)),
                None => leftover.push(i),
            }
        }
        if v.index() >= self.sides.len() {
            self.sides.resize(v.index() + 1, Vec::new());
        }
        self.sides[v.index()] = own;

        let mut colors = vec![None; event.edges.len()];
        for (colorer, edges) in self.colorers.iter_mut().zip(&per_level) {
            leftover.extend(colorer.arrive(v, edges, &mut colors)?);
        }
        leftover.sort_unstable();
        for i in leftover {
            let u = event.edges[i].neighbor;
            colors[i] = Some(self.counter.assign_first_fit(u, v, self.greedy_offset));
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
            plans: self.colorers.iter().map(|c| c.plan().clone()).collect(),
            phases: self
                .colorers
                .iter()
                .enumerate()
                .flat_map(|(l, c)| c.phase_stats(l + 1))
                .collect(),
            greedy_edges: self.greedy_edges,
            greedy_offset: self.greedy_offset,
            deficiency_total: self.colorers.iter().map(|c| c.deficiency()).sum(),
        }
    }
}

/// Colors a general graph with the bipartition pipeline. Fully online.
pub fn color_general(
    inst: &GraphInstance,
    cfg: &ReductionConfig,
    backend: Backend,
    seed: u64,
) -> Result<ColoringOutcome, RoundingError> {
    let mut c = GeneralColorer::new(
        inst.n,
        inst.delta,
        inst.sides.as_deref(),
        cfg,
        backend,
        seed,
    )?;
    let mut colors = Vec::with_capacity(inst.edge_count());
    for a in &inst.arrivals {
        colors.extend(c.arrive(a)?);
    }
    Ok(c.finish(Coloring::new(colors)))
}
