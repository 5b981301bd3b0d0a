//! The online driver: one arrival at a time, with a pluggable `p` backend.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ensemble::Ensemble;
use super::exact::ExactDistribution;
use super::state::{run_arrival, ArrivalSchedule, ArrivalTranscript, DegreeLedger, MatchState};
use super::{ConstantC, RoundingError};
use crate::graph::{validate_instance, ArrivalEvent, GraphInstance, Matching};
use crate::rng::StreamFamily;

/// How the second-pick probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Backend {
    /// Exact joint distribution; `cap` bounds the vertices that carry edges.
    Exact { cap: usize },
    /// Monte Carlo over `replicas` synchronized runs.
    Ensemble { replicas: usize },
}

/// The calibrated pick parameters of a whole run. Replaying it with any
/// stream family reproduces the algorithm with these `p` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PickSchedule {
    pub consts: ConstantC,
    pub arrivals: Vec<ArrivalSchedule>,
}

impl PickSchedule {
    pub fn new(consts: ConstantC) -> Self {
        Self {
            consts,
            arrivals: Vec::new(),
        }
    }

    pub fn total_deficiency(&self) -> f64 {
        self.edges().map(|e| e.deficiency).sum()
    }

    pub fn total_excess(&self) -> f64 {
        self.edges().map(|e| e.excess).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = &super::EdgeSchedule> + '_ {
        self.arrivals.iter().flat_map(|a| a.edges.iter())
    }
}

enum Engine {
    Exact {
        dist: ExactDistribution,
        trajectory: MatchState,
        family: StreamFamily,
    },
    Ensemble(Ensemble),
}

/// Streams arrivals through the algorithm, calibrating `p` as it goes.
pub struct OnlineRounder {
    ledger: DegreeLedger,
    engine: Engine,
    schedule: PickSchedule,
    transcripts: Vec<ArrivalTranscript>,
}

impl OnlineRounder {
    pub fn new(
        n: usize,
        backend: Backend,
        family: StreamFamily,
        consts: ConstantC,
    ) -> Result<Self, RoundingError> {
        let engine = match backend {
            Backend::Exact { cap } => Engine::Exact {
                dist: ExactDistribution::new(cap),
                trajectory: MatchState::new(n),
                family,
            },
            Backend::Ensemble { replicas } => Engine::Ensemble(Ensemble::new(n, replicas, family)?),
        };
        Ok(Self {
            ledger: DegreeLedger::new(n, consts),
            engine,
            schedule: PickSchedule::new(consts),
            transcripts: Vec::new(),
        })
    }

    pub fn ledger(&self) -> &DegreeLedger {
        &self.ledger
    }

    /// Whether `u` is free in the output run.
    pub fn is_free(&self, u: crate::graph::VertexId) -> bool {
        self.status().is_free(u)
    }

    fn status(&self) -> &MatchState {
        match &self.engine {
            Engine::Exact { trajectory, .. } => trajectory,
            Engine::Ensemble(e) => e.primary(),
        }
    }

    /// Processes one arrival and returns the output run's transcript.
    pub fn arrive(&mut self, event: &ArrivalEvent) -> Result<ArrivalTranscript, RoundingError> {
        let consts = *self.ledger.consts();
        let mut plan = self.ledger.plan(event)?;
        let arrival = self.transcripts.len() as u64;
        let t = match &mut self.engine {
            Engine::Exact {
                dist,
                trajectory,
                family,
            } => {
                dist.step(&mut plan, &consts, None)?;
                let p: Vec<f64> = plan.edges.iter().map(|e| e.p).collect();
                run_arrival(&plan, &p, trajectory, family, 0, arrival)
            }
            Engine::Ensemble(ens) => ens.step(&mut plan, &consts),
        };
        self.ledger.commit(event);
        self.schedule.arrivals.push(plan);
        self.transcripts.push(t.clone());
        Ok(t)
    }

    pub fn matching(&self) -> Matching {
        self.status().matching()
    }

    pub fn schedule(&self) -> &PickSchedule {
        &self.schedule
    }

    pub fn transcripts(&self) -> &[ArrivalTranscript] {
        &self.transcripts
    }

    pub fn finish(self) -> RoundingOutcome {
        RoundingOutcome {
            matching: self.status().matching(),
            schedule: self.schedule,
            transcripts: self.transcripts,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundingOutcome {
    pub matching: Matching,
    pub schedule: PickSchedule,
    pub transcripts: Vec<ArrivalTranscript>,
}

/// Rounds the fractional matching carried by `inst`.
pub fn round_online(
    inst: &GraphInstance,
    backend: Backend,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(RoundingError::InvalidInstance(violations));
    }
    let mut r = OnlineRounder::new(
        inst.n,
        backend,
        StreamFamily::new(seed),
        ConstantC::standard(),
    )?;
    for event in &inst.arrivals {
        r.arrive(event)?;
    }
    Ok(r.finish())
}

/// Re-runs the algorithm with a frozen schedule on one replica stream.
pub fn replay(
    schedule: &PickSchedule,
    n: usize,
    family: &StreamFamily,
    replica: u64,
) -> (MatchState, Vec<ArrivalTranscript>) {
    let mut status = MatchState::new(n);
    let mut out = Vec::with_capacity(schedule.arrivals.len());
    for (i, plan) in schedule.arrivals.iter().enumerate() {
        let p: Vec<f64> = plan.edges.iter().map(|e| e.p).collect();
        out.push(run_arrival(
            plan,
            &p,
            &mut status,
            family,
            replica,
            i as u64,
        ));
    }
    (status, out)
}

/// Per-edge table: endpoints, value, branch, first-pick mass, `J`, `p`,
/// deficiency and marginal.
pub fn schedule_csv(schedule: &PickSchedule) -> String {
    let mut s = String::from("u,v,x,branch,q1,j,p,deficiency,marginal\n");
    for a in &schedule.arrivals {
        for e in &a.edges {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                e.edge.u,
                e.edge.v,
                e.x,
                a.branch.as_str(),
                e.q1,
                e.j,
                e.p,
                e.deficiency,
                e.marginal
            );
        }
    }
    s
}
