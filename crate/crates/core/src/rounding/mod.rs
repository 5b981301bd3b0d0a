//! Online rounding of a fractional matching under vertex arrivals.
//!
//! Every edge `e` ends up matched with probability `(1/2 + c) x_e` on
//! bipartite inputs. The second-pick probabilities are calibrated either
//! exactly (small instances) or by a replica ensemble.

mod constant;
mod ensemble;
mod exact;
mod online;
mod state;

use thiserror::Error;

use crate::graph::{Edge, VertexId, Violation};

pub use constant::{defining_residual, side_condition, solve_c, ConstantC, C_LOWER, C_UPPER};
pub use ensemble::{Ensemble, DEFAULT_REPLICAS};
pub use exact::{ExactDistribution, DEFAULT_EXACT_CAP};
pub use online::{
    replay, round_online, schedule_csv, Backend, OnlineRounder, PickSchedule, RoundingOutcome,
};
pub use state::{
    first_stage, run_arrival, second_stage, ArrivalSchedule, ArrivalTranscript, Branch,
    DegreeLedger, EdgeSchedule, MatchState, PickOutcome, RoundingState,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoundingError {
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("defining inequality fails at c = 0.027 (residual {residual}); the solver is broken")]
    ConstantInfeasible { residual: f64 },
    #[error("side condition fails at c = {c} (margin {margin})")]
    SideConditionViolated { c: f64, margin: f64 },
    #[error("pick mass {mass} at vertex {vertex} exceeds 1")]
    PickMass { vertex: VertexId, mass: f64 },
    #[error("edge {edge} has invalid value {x}")]
    InvalidValue { edge: Edge, x: f64 },
    #[error("exact backend is limited to {cap} vertices with edges")]
    ExactCapExceeded { cap: usize },
    #[error("an ensemble needs at least one replica")]
    NoReplicas,
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
}
