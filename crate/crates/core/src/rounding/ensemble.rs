//! Replica ensemble estimating `p_{u,v}` by Monte Carlo.
//!
//! `K` replicas process the same arrival stream with independent streams.
//! Each arrival is barrier-synchronized: every replica makes its first pick,
//! `J` is estimated as the fraction of replicas in which `u` is free and `v`
//! was rejected, the shared `p` is published, and every replica makes its
//! second pick with it. Replica 0 is the output run and is included in the
//! estimate.

use rayon::prelude::*;

use super::state::{
    first_stage, second_stage, transcript, ArrivalSchedule, ArrivalTranscript, Branch, MatchState,
    PickOutcome,
};
use super::{ConstantC, RoundingError};
use crate::rng::StreamFamily;

/// Replica count used when none is configured.
pub const DEFAULT_REPLICAS: usize = 100_000;

const MIN_PARALLEL_CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct Ensemble {
    family: StreamFamily,
    replicas: Vec<MatchState>,
    arrivals: u64,
}

impl Ensemble {
    pub fn new(n: usize, replicas: usize, family: StreamFamily) -> Result<Self, RoundingError> {
        if replicas == 0 {
            return Err(RoundingError::NoReplicas);
        }
        Ok(Self {
            family,
            replicas: vec![MatchState::new(n); replicas],
            arrivals: 0,
        })
    }

    pub fn replica_count(&self) -> usize {
        self.replicas.len()
    }

    pub fn primary(&self) -> &MatchState {
        &self.replicas[0]
    }

    pub fn replicas(&self) -> &[MatchState] {
        &self.replicas
    }

    /// Floor on the estimated `J` below which `p` is forced to 1 (and the
    /// shortfall recorded) rather than divided by a near-zero estimate.
    pub fn j_floor(&self) -> f64 {
        (10.0 / self.replicas.len() as f64).max(1e-6)
    }

    /// Processes one arrival in every replica and fills in `q1`, `j`, `p`,
    /// `deficiency`, `excess` and the empirical `marginal` of each edge.
    /// Returns the primary replica's transcript.
    pub fn step(&mut self, plan: &mut ArrivalSchedule, consts: &ConstantC) -> ArrivalTranscript {
        let arrival = self.arrivals;
        self.arrivals += 1;
        let k = self.replicas.len() as f64;
        let family = self.family;
        let frozen: &ArrivalSchedule = plan;

        let first: Vec<PickOutcome> = self
            .replicas
            .par_iter_mut()
            .with_min_len(MIN_PARALLEL_CHUNK)
            .enumerate()
            .map(|(r, st)| first_stage(frozen, st, &family, r as u64, arrival))
            .collect();

        let m = plan.edges.len();
        let mut first_hits = vec![0u64; m];
        for o in &first {
            if let (true, Some(i)) = (o.matched, o.pick) {
                first_hits[i] += 1;
            }
        }

        if plan.branch == Branch::LowDegree || m == 0 {
            for (e, &h) in plan.edges.iter_mut().zip(&first_hits) {
                e.q1 = consts.half_plus_c * e.x;
                e.marginal = h as f64 / k;
            }
            return transcript(plan, first[0], None);
        }

        // J_hat: replicas where v is still free and u is free.
        let mut joint = vec![0u64; m];
        for (st, o) in self.replicas.iter().zip(&first) {
            if o.matched {
                continue;
            }
            for (i, e) in plan.edges.iter().enumerate() {
                if st.is_free(e.edge.u) {
                    joint[i] += 1;
                }
            }
        }
        let floor = self.j_floor();
        for (i, e) in plan.edges.iter_mut().enumerate() {
            e.q1 = e.x * e.g.min(consts.half_plus_c);
            e.j = joint[i] as f64 / k;
            let numerator = consts.half_plus_c * e.x - e.q1;
            if numerator <= 0.0 {
                e.p = 0.0;
                e.excess = (-numerator).max(0.0);
            } else if e.j < floor {
                e.p = 1.0;
                e.deficiency = numerator - e.x * e.j;
            } else {
                let raw = numerator / (e.x * e.j);
                e.p = raw.min(1.0);
                if raw > 1.0 {
                    e.deficiency = numerator - e.x * e.j;
                }
            }
        }

        let p: Vec<f64> = plan.edges.iter().map(|e| e.p).collect();
        let frozen: &ArrivalSchedule = plan;
        let second: Vec<Option<PickOutcome>> = self
            .replicas
            .par_iter_mut()
            .with_min_len(MIN_PARALLEL_CHUNK)
            .zip(first.par_iter())
            .enumerate()
            .map(|(r, (st, f))| {
                (!f.matched).then(|| second_stage(frozen, &p, st, &family, r as u64, arrival))
            })
            .collect();

        let mut hits = first_hits;
        for o in second.iter().flatten() {
            if let (true, Some(i)) = (o.matched, o.pick) {
                hits[i] += 1;
            }
        }
        for (e, &h) in plan.edges.iter_mut().zip(&hits) {
            e.marginal = h as f64 / k;
        }
        transcript(plan, first[0], second[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ArrivalEvent, RevealedEdge, VertexId};
    use crate::rounding::state::DegreeLedger;

    fn event(v: u32, edges: &[(u32, f64)]) -> ArrivalEvent {
        ArrivalEvent::with_edges(
            VertexId(v),
            edges
                .iter()
                .map(|&(u, x)| RevealedEdge {
                    neighbor: VertexId(u),
                    x,
                })
                .collect(),
        )
    }

    #[test]
    fn zero_numerator_gives_zero_p() {
        let k = ConstantC::standard();
        let ledger = DegreeLedger::new(2, k);
        let mut plan = ledger.plan(&event(1, &[(0, 1.0)])).unwrap();
        let mut ens = Ensemble::new(2, 1000, StreamFamily::new(3)).unwrap();
        ens.step(&mut plan, &k);
        assert_eq!(plan.edges[0].p, 0.0);
        assert_eq!(plan.edges[0].deficiency, 0.0);
    }

    #[test]
    fn starved_estimate_forces_p_to_one() {
        // u is matched in every replica before v arrives, so J_hat = 0 while
        // the closed-form g still promises mass: p = 1 and a deficiency.
        let k = ConstantC::standard();
        let mut ledger = DegreeLedger::new(4, k);
        let mut ens = Ensemble::new(4, 64, StreamFamily::new(8)).unwrap();
        for r in ens.replicas.iter_mut() {
            r.set_match(VertexId(0), VertexId(1));
        }
        ledger.commit(&event(1, &[(0, 0.9)]));
        ledger.commit(&event(2, &[]));
        ens.arrivals = 3;
        let mut plan = ledger.plan(&event(3, &[(0, 0.1), (2, 0.9)])).unwrap();
        assert_eq!(plan.branch, Branch::HighDegree);
        ens.step(&mut plan, &k);
        let e = &plan.edges[0];
        assert_eq!(e.j, 0.0);
        assert_eq!(e.p, 1.0);
        assert!(e.deficiency > 0.0);
    }

    #[test]
    fn rejects_empty_ensemble() {
        assert!(matches!(
            Ensemble::new(3, 0, StreamFamily::new(0)),
            Err(RoundingError::NoReplicas)
        ));
    }
}
