use serde::{Deserialize, Serialize};

use super::general::GeneralColorer;
use super::greedy::ColorCounter;
use super::reduction::{ColoringOutcome, ReductionColorer, ReductionConfig};
use crate::graph::{ArrivalEvent, Coloring, GraphInstance, Side};
use crate::rounding::{Backend, RoundingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Greedy,
    /// Phase reduction; the input is treated as bipartite.
    #[serde(rename = "bipartite_reduction", alias = "reduction")]
    Reduction,
    /// Random bipartition levels, each colored by the reduction.
    General,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Greedy, Algorithm::Reduction, Algorithm::General];
}

enum Inner {
    Greedy(ColorCounter),
    Reduction(ReductionColorer),
    General(GeneralColorer),
}

/// Any of the colorers behind one arrival-driven interface.
pub struct OnlineColorer {
    inner: Inner,
    colors: Vec<u32>,
}

impl OnlineColorer {
    pub fn new(
        algo: Algorithm,
        n: usize,
        delta: usize,
        sides: Option<&[Side]>,
        cfg: &ReductionConfig,
        backend: Backend,
        seed: u64,
    ) -> Result<Self, RoundingError> {
        let inner = match algo {
            Algorithm::Greedy => Inner::Greedy(ColorCounter::new(n)),
            Algorithm::Reduction => {
                Inner::Reduction(ReductionColorer::new(n, delta, cfg, backend, seed)?)
            }
            Algorithm::General => {
                Inner::General(GeneralColorer::new(n, delta, sides, cfg, backend, seed)?)
            }
        };
        Ok(Self {
            inner,
            colors: Vec::new(),
        })
    }

    /// Colors of the edges revealed by `event`; they are final.
    pub fn arrive(&mut self, event: &ArrivalEvent) -> Result<&[u32], RoundingError> {
        let fresh = match &mut self.inner {
            Inner::Greedy(c) => event
                .edges
                .iter()
                .map(|e| c.assign_first_fit(e.neighbor, event.vertex, 0))
                .collect(),
            Inner::Reduction(c) => c.arrive(event)?,
            Inner::General(c) => c.arrive(event)?,
        };
        let start = self.colors.len();
        self.colors.extend(fresh);
        Ok(&self.colors[start..])
    }

    /// Every color handed out so far, in edge order.
    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn finish(self) -> ColoringOutcome {
        let coloring = Coloring::new(self.colors);
        match self.inner {
            Inner::Greedy(_) => ColoringOutcome {
                greedy_edges: coloring.colors.len(),
                coloring,
                plans: Vec::new(),
                phases: Vec::new(),
                greedy_offset: 0,
                deficiency_total: 0.0,
            },
            Inner::Reduction(c) => c.finish(coloring),
            Inner::General(c) => c.finish(coloring),
        }
    }
}

/// Runs `algo` over the whole arrival stream.
pub fn color_instance(
    inst: &GraphInstance,
    algo: Algorithm,
    cfg: &ReductionConfig,
    backend: Backend,
    seed: u64,
) -> Result<ColoringOutcome, RoundingError> {
    let mut c = OnlineColorer::new(
        algo,
        inst.n,
        inst.delta,
        inst.sides.as_deref(),
        cfg,
        backend,
        seed,
    )?;
    for a in &inst.arrivals {
        c.arrive(a)?;
    }
    Ok(c.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{greedy_color, verify_coloring};
    use crate::generate::{gen_general, GeneralModel};

    #[test]
    fn greedy_matches_the_batch_version() {
        let inst = gen_general(50, 6, GeneralModel::UnionOfMatchings, 1);
        let out = color_instance(
            &inst,
            Algorithm::Greedy,
            &ReductionConfig::desk(),
            Backend::Ensemble { replicas: 10 },
            0,
        )
        .unwrap();
        assert_eq!(out.coloring, greedy_color(&inst));
        assert_eq!(out.greedy_edges, inst.edge_count());
    }

    #[test]
    fn every_algorithm_is_proper() {
        let inst = gen_general(60, 8, GeneralModel::UnionOfMatchings, 5);
        for algo in Algorithm::ALL {
            let out = color_instance(
                &inst,
                algo,
                &ReductionConfig::desk(),
                Backend::Ensemble { replicas: 50 },
                3,
            )
            .unwrap();
            assert!(verify_coloring(&inst, &out.coloring).proper, "{algo:?}");
        }
    }
}
