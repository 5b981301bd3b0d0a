//! Statistical checks of the rounding guarantees and of the concentration
//! events the reductions rely on.
//!
//! Trials replay one calibrated pick schedule with independent streams; the
//! calibration itself uses a stream family disjoint from every trial.

mod concentration;
mod covariance;
mod marginals;

use std::collections::HashMap;

use crate::graph::{Edge, GraphInstance};
use crate::rng::StreamFamily;
use crate::rounding::{round_online, Backend, PickSchedule, RoundingError};

pub use concentration::{
    concentration_report, BipartitionConcentration, ConcentrationReport, PhaseConcentration,
};
pub use covariance::{
    estimate_covariances, free_status_trace, CovarianceReport, FreeStatusTrace, PairCovariance,
    Probe, VertexHighMass,
};
pub use marginals::{estimate_marginals, EdgeMarginal, MarginalReport};

const TAG_CALIBRATION: u64 = 11;
const TAG_TRIALS: u64 = 12;
const TAG_BIPARTITION: u64 = 13;
const TAG_PHASES: u64 = 14;

/// The schedule every trial replays, calibrated on its own streams.
pub fn calibrate(
    inst: &GraphInstance,
    backend: Backend,
    seed: u64,
) -> Result<PickSchedule, RoundingError> {
    let s = StreamFamily::new(seed).child(TAG_CALIBRATION, 0).seed();
    Ok(round_online(inst, backend, s)?.schedule)
}

pub(crate) fn trial_family(seed: u64) -> StreamFamily {
    StreamFamily::new(seed).child(TAG_TRIALS, 0)
}

pub(crate) fn edge_index(inst: &GraphInstance) -> HashMap<Edge, usize> {
    inst.edges().map(|e| (e.edge, e.index)).collect()
}

/// `sqrt(p (1 - p) / t)`.
pub fn binomial_se(p: f64, t: u64) -> f64 {
    if t == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / t as f64).sqrt()
}

/// `(estimate - target) / se`, with `0/0 = 0`.
pub(crate) fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let d = estimate - target;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}
