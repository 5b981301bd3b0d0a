//! Per-run state and the two pick stages of a single arrival.

use serde::Serialize;

use super::{ConstantC, RoundingError};
use crate::graph::{ArrivalEvent, Edge, Matching, VertexId, FRACTIONAL_TOLERANCE};
use crate::rng::{pick_categorical, unit, Stage, StreamFamily};

/// Which half of the algorithm an arrival runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Arriving fractional degree at most `(1/2 - c)/(1/2 + c)`: one scaled
    /// pick, accepted with probability `(1/2 - c)/g`.
    LowDegree,
    /// Two picks with probabilities `x`; the second is accepted with `p`.
    HighDegree,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::LowDegree => "low",
            Branch::HighDegree => "high",
        }
    }
}

/// Everything known about one revealed edge: the deterministic pick
/// parameters and, once a backend has run, the calibrated `p` and the
/// resulting marginal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeSchedule {
    pub index: usize,
    pub edge: Edge,
    pub x: f64,
    /// `g(u, v)`, the closed-form probability that `u` is free when `v` arrives.
    pub g: f64,
    /// Probability that this neighbor is the (first) pick.
    pub pick_weight: f64,
    /// Acceptance of the first or only pick: `low_accept` or `q`.
    pub accept: f64,
    /// Probability mass of matching this edge in the first (or only) pick.
    pub q1: f64,
    /// `Pr[u free and v rejected after its first pick]` (exact or estimated).
    pub j: f64,
    /// Second-pick acceptance. Zero on the low branch.
    pub p: f64,
    /// Shortfall `target - achieved` when `p` had to be clamped at 1.
    pub deficiency: f64,
    /// Overshoot when the first pick alone exceeds the target (p clamped at 0).
    pub excess: f64,
    /// Exact or empirical probability that the edge ends up matched.
    pub marginal: f64,
}

impl EdgeSchedule {
    /// `(1/2 + c) x`.
    pub fn target(&self, consts: &ConstantC) -> f64 {
        consts.half_plus_c * self.x
    }
}

/// The pick parameters of one arrival.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalSchedule {
    pub vertex: VertexId,
    pub branch: Branch,
    /// `sum_{u < v} x_{u,v}`.
    pub mass: f64,
    pub edges: Vec<EdgeSchedule>,
}

impl ArrivalSchedule {
    /// Probability that the first (or only) pick is nil.
    pub fn nil_weight(&self) -> f64 {
        (1.0 - self.edges.iter().map(|e| e.pick_weight).sum::<f64>()).max(0.0)
    }
}

/// Running sums that make `g(u, v)` a pure read.
///
/// `consumed[u]` is `sum (1/2 + c) x_{u,w}` over all edges of `u` revealed so
/// far, so `g = 1 - consumed[u]` at the next arrival.
#[derive(Debug, Clone)]
pub struct DegreeLedger {
    consts: ConstantC,
    consumed: Vec<f64>,
    frac_degree: Vec<f64>,
    edges_seen: usize,
}

impl DegreeLedger {
    pub fn new(n: usize, consts: ConstantC) -> Self {
        Self {
            consts,
            consumed: vec![0.0; n],
            frac_degree: vec![0.0; n],
            edges_seen: 0,
        }
    }

    pub fn consts(&self) -> &ConstantC {
        &self.consts
    }

    fn ensure(&mut self, v: VertexId) {
        if v.index() >= self.consumed.len() {
            self.consumed.resize(v.index() + 1, 0.0);
            self.frac_degree.resize(v.index() + 1, 0.0);
        }
    }

    /// `g(u, v) = 1 - sum_{w < v} (1/2 + c) x_{u,w}` for the next arrival `v`.
    pub fn g(&self, u: VertexId) -> f64 {
        1.0 - self.consumed.get(u.index()).copied().unwrap_or(0.0)
    }

    pub fn consumed(&self, u: VertexId) -> f64 {
        self.consumed.get(u.index()).copied().unwrap_or(0.0)
    }

    /// Fractional degree of `u` over edges revealed so far.
    pub fn frac_degree(&self, u: VertexId) -> f64 {
        self.frac_degree.get(u.index()).copied().unwrap_or(0.0)
    }

    /// Global index the next revealed edge will receive.
    pub fn edges_seen(&self) -> usize {
        self.edges_seen
    }

    /// Deterministic pick parameters for `event`. Fails when the pick mass of
    /// either branch exceeds one.
    pub fn plan(&self, event: &ArrivalEvent) -> Result<ArrivalSchedule, RoundingError> {
        let k = &self.consts;
        let mut mass = 0.0;
        for e in &event.edges {
            if !e.x.is_finite() || e.x < 0.0 {
                return Err(RoundingError::InvalidValue {
                    edge: Edge::new(e.neighbor, event.vertex),
                    x: e.x,
                });
            }
            mass += e.x;
        }
        let branch = if mass <= k.low_degree_threshold {
            Branch::LowDegree
        } else {
            Branch::HighDegree
        };
        if mass > 1.0 + FRACTIONAL_TOLERANCE {
            return Err(RoundingError::PickMass {
                vertex: event.vertex,
                mass,
            });
        }
        let scale = match branch {
            Branch::LowDegree => k.half_plus_c / k.half_minus_c,
            Branch::HighDegree => 1.0,
        };
        let edges = event
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let g = self.g(e.neighbor);
                let accept = match branch {
                    Branch::LowDegree => k.half_minus_c / g,
                    Branch::HighDegree => k.half_plus_c / g,
                };
                EdgeSchedule {
                    index: self.edges_seen + i,
                    edge: Edge::new(e.neighbor, event.vertex),
                    x: e.x,
                    g,
                    pick_weight: e.x * scale,
                    accept: accept.clamp(0.0, 1.0),
                    q1: 0.0,
                    j: 0.0,
                    p: 0.0,
                    deficiency: 0.0,
                    excess: 0.0,
                    marginal: 0.0,
                }
            })
            .collect();
        Ok(ArrivalSchedule {
            vertex: event.vertex,
            branch,
            mass,
            edges,
        })
    }

    /// Records the arrival: adds `(1/2 + c) x_{u,v}` to both endpoints of
    /// every revealed edge, whatever the match outcome.
    pub fn commit(&mut self, event: &ArrivalEvent) {
        let h = self.consts.half_plus_c;
        self.ensure(event.vertex);
        for e in &event.edges {
            self.ensure(e.neighbor);
            self.consumed[e.neighbor.index()] += h * e.x;
            self.frac_degree[e.neighbor.index()] += e.x;
            self.consumed[event.vertex.index()] += h * e.x;
            self.frac_degree[event.vertex.index()] += e.x;
        }
        self.edges_seen += event.edges.len();
    }
}

const FREE: u32 = u32::MAX;

/// Matched partner of every vertex in one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchState {
    partner: Vec<u32>,
}

impl MatchState {
    pub fn new(n: usize) -> Self {
        Self {
            partner: vec![FREE; n],
        }
    }

    pub fn is_free(&self, u: VertexId) -> bool {
        self.partner.get(u.index()).is_none_or(|&p| p == FREE)
    }

    pub fn partner(&self, u: VertexId) -> Option<VertexId> {
        match self.partner.get(u.index()) {
            Some(&p) if p != FREE => Some(VertexId(p)),
            _ => None,
        }
    }

    pub(crate) fn set_match(&mut self, u: VertexId, v: VertexId) {
        let hi = u.index().max(v.index());
        if hi >= self.partner.len() {
            self.partner.resize(hi + 1, FREE);
        }
        debug_assert!(self.is_free(u) && self.is_free(v));
        self.partner[u.index()] = v.0;
        self.partner[v.index()] = u.0;
    }

    /// The matched edges, ordered by the arrival of their later endpoint.
    pub fn matching(&self) -> Matching {
        let edges = self
            .partner
            .iter()
            .enumerate()
            .filter(|&(v, &p)| p != FREE && (p as usize) < v)
            .map(|(v, &p)| Edge::new(VertexId(p), VertexId(v as u32)))
            .collect();
        Matching::from_edges(edges)
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }
}

/// Result of one pick stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PickOutcome {
    /// Index into the arrival's edge list, `None` for nil.
    pub pick: Option<usize>,
    pub matched: bool,
}

/// The first pick (or the single pick of the low branch): choose at most one
/// neighbor by `pick_weight`; if it is free, match with probability `accept`.
pub fn first_stage(
    plan: &ArrivalSchedule,
    status: &mut MatchState,
    family: &StreamFamily,
    replica: u64,
    arrival: u64,
) -> PickOutcome {
    let mut rng = family.stream(replica, arrival, Stage::FirstPick);
    let pick = pick_categorical(plan.edges.iter().map(|e| e.pick_weight), unit(&mut rng));
    let coin = unit(&mut rng);
    let mut matched = false;
    if let Some(i) = pick {
        let e = &plan.edges[i];
        if status.is_free(e.edge.u) && coin < e.accept {
            status.set_match(e.edge.u, plan.vertex);
            matched = true;
        }
    }
    PickOutcome { pick, matched }
}

/// The second pick of the high branch, run only when `v` is still free:
/// choose at most one neighbor by `x`; if it is free, match with `p[i]`.
pub fn second_stage(
    plan: &ArrivalSchedule,
    p: &[f64],
    status: &mut MatchState,
    family: &StreamFamily,
    replica: u64,
    arrival: u64,
) -> PickOutcome {
    let mut rng = family.stream(replica, arrival, Stage::SecondPick);
    let pick = pick_categorical(plan.edges.iter().map(|e| e.x), unit(&mut rng));
    let coin = unit(&mut rng);
    let mut matched = false;
    if let Some(i) = pick {
        let u = plan.edges[i].edge.u;
        if status.is_free(u) && coin < p[i] {
            status.set_match(u, plan.vertex);
            matched = true;
        }
    }
    PickOutcome { pick, matched }
}

/// What happened during one arrival of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalTranscript {
    pub vertex: VertexId,
    pub branch: Branch,
    pub first_pick: Option<VertexId>,
    /// `x_nil = 1 - sum_{w < v} x_{w,v}`.
    pub nil_mass: f64,
    /// `v` unmatched after its first (or only) pick.
    pub rejected: bool,
    pub second_pick: Option<VertexId>,
    pub matched: Option<Edge>,
}

/// Runs both stages of one arrival on `status` with second-pick
/// probabilities `p` (aligned with `plan.edges`).
pub fn run_arrival(
    plan: &ArrivalSchedule,
    p: &[f64],
    status: &mut MatchState,
    family: &StreamFamily,
    replica: u64,
    arrival: u64,
) -> ArrivalTranscript {
    let first = first_stage(plan, status, family, replica, arrival);
    let second = if plan.branch == Branch::HighDegree && !first.matched {
        Some(second_stage(plan, p, status, family, replica, arrival))
    } else {
        None
    };
    transcript(plan, first, second)
}

pub(crate) fn transcript(
    plan: &ArrivalSchedule,
    first: PickOutcome,
    second: Option<PickOutcome>,
) -> ArrivalTranscript {
    let at = |i: Option<usize>| i.map(|i| plan.edges[i].edge.u);
    let matched = if first.matched {
        first.pick
    } else {
        second.filter(|s| s.matched).and_then(|s| s.pick)
    };
    ArrivalTranscript {
        vertex: plan.vertex,
        branch: plan.branch,
        first_pick: at(first.pick),
        nil_mass: (1.0 - plan.mass).max(0.0),
        rejected: !first.matched,
        second_pick: second.and_then(|s| at(s.pick)),
        matched: matched.map(|i| plan.edges[i].edge),
    }
}

/// A single run of the rounding algorithm: the deterministic ledger plus
/// one replica's matched flags.
#[derive(Debug, Clone)]
pub struct RoundingState {
    pub ledger: DegreeLedger,
    pub status: MatchState,
    arrivals: u64,
}

impl RoundingState {
    pub fn new(n: usize, consts: ConstantC) -> Self {
        Self {
            ledger: DegreeLedger::new(n, consts),
            status: MatchState::new(n),
            arrivals: 0,
        }
    }

    /// `g(u, v)` for the next arrival `v`.
    pub fn g_value(&self, u: VertexId) -> f64 {
        self.ledger.g(u)
    }

    /// Processes one arrival with the given second-pick probabilities
    /// (aligned with `event.edges`; ignored on the low branch).
    pub fn process_arrival(
        &mut self,
        event: &ArrivalEvent,
        p: &[f64],
        family: &StreamFamily,
        replica: u64,
    ) -> Result<ArrivalTranscript, RoundingError> {
        let plan = self.ledger.plan(event)?;
        let zeros;
        let p = if p.len() == plan.edges.len() {
            p
        } else {
            zeros = vec![0.0; plan.edges.len()];
            &zeros
        };
        let t = run_arrival(&plan, p, &mut self.status, family, replica, self.arrivals);
        self.ledger.commit(event);
        self.arrivals += 1;
        Ok(t)
    }

    pub fn matching(&self) -> Matching {
        self.status.matching()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RevealedEdge;

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
    fn g_of_untouched_vertex_is_one() {
        let st = RoundingState::new(3, ConstantC::standard());
        assert_eq!(st.g_value(VertexId(0)), 1.0);
    }

    #[test]
    fn g_after_full_degree_is_half_minus_c() {
        let k = ConstantC::standard();
        let mut ledger = DegreeLedger::new(5, k);
        ledger.commit(&event(1, &[(0, 0.25)]));
        ledger.commit(&event(2, &[(0, 0.25)]));
        ledger.commit(&event(3, &[(0, 0.5)]));
        assert!((ledger.g(VertexId(0)) - k.half_minus_c).abs() < 1e-15);
    }

    #[test]
    fn g_after_partial_degree() {
        let k = ConstantC::standard();
        let mut ledger = DegreeLedger::new(3, k);
        ledger.commit(&event(1, &[(0, 0.4)]));
        // 1 - 0.527125... * 0.4, frozen from direct evaluation.
        assert!((ledger.g(VertexId(0)) - 0.78914965).abs() < 1e-6);
        assert!((ledger.g(VertexId(1)) - ledger.g(VertexId(0))).abs() < 1e-15);
    }

    #[test]
    fn branch_selection() {
        let k = ConstantC::standard();
        let ledger = DegreeLedger::new(3, k);
        let hi = ledger.plan(&event(1, &[(0, 1.0)])).unwrap();
        assert_eq!(hi.branch, Branch::HighDegree);
        assert!((hi.edges[0].accept - k.half_plus_c).abs() < 1e-15);
        let lo = ledger.plan(&event(1, &[(0, 0.5)])).unwrap();
        assert_eq!(lo.branch, Branch::LowDegree);
        assert!((lo.edges[0].pick_weight - 0.5 * k.half_plus_c / k.half_minus_c).abs() < 1e-15);
        assert!((lo.edges[0].accept - k.half_minus_c).abs() < 1e-15);
        assert!(matches!(
            ledger.plan(&event(2, &[(0, 0.6), (1, 0.6)])),
            Err(RoundingError::PickMass { .. })
        ));
    }

    #[test]
    fn empty_arrival_changes_nothing() {
        let mut st = RoundingState::new(2, ConstantC::standard());
        let t = st
            .process_arrival(&event(0, &[]), &[], &StreamFamily::new(1), 0)
            .unwrap();
        assert_eq!(t.first_pick, None);
        assert_eq!(t.second_pick, None);
        assert_eq!(t.matched, None);
        assert!(st.matching().is_empty());
        assert_eq!(st.g_value(VertexId(0)), 1.0);
    }

    #[test]
    fn single_edge_frequency_matches_hand_computation() {
        // x = 1: high branch, first pick is always u, accepted with 1/2 + c;
        // the second pick re-picks u with probability p = 0.
        let k = ConstantC::standard();
        let fam = StreamFamily::new(99);
        let trials = 20_000;
        let mut hits = 0;
        for r in 0..trials {
            let mut st = RoundingState::new(2, k);
            st.process_arrival(&event(0, &[]), &[], &fam, r).unwrap();
            let t = st
                .process_arrival(&event(1, &[(0, 1.0)]), &[0.0], &fam, r)
                .unwrap();
            assert_eq!(t.first_pick, Some(VertexId(0)));
            assert_eq!(t.branch, Branch::HighDegree);
            if t.matched.is_some() {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let se = (k.half_plus_c * k.half_minus_c / trials as f64).sqrt();
        assert!((freq - k.half_plus_c).abs() < 4.0 * se, "freq {freq}");
    }

    #[test]
    fn transcript_invariants() {
        let k = ConstantC::standard();
        let fam = StreamFamily::new(5);
        for r in 0..200 {
            let mut st = RoundingState::new(3, k);
            st.process_arrival(&event(0, &[]), &[], &fam, r).unwrap();
            st.process_arrival(&event(1, &[]), &[], &fam, r).unwrap();
            let t = st
                .process_arrival(&event(2, &[(0, 0.5), (1, 0.5)]), &[1.0, 1.0], &fam, r)
                .unwrap();
            assert_eq!(t.branch, Branch::HighDegree);
            if !t.rejected {
                assert_eq!(t.second_pick, None);
                assert!(t.matched.is_some());
            }
            assert!(st.matching().is_valid());
        }
    }
}
