//! Online edge-coloring algorithms.

mod algo;
mod bipartition;
mod general;
mod greedy;
mod reduction;
mod verify;

pub use algo::{color_instance, Algorithm, OnlineColorer};
pub use bipartition::{
    bipartition_split, draw_sides, level_bounds, BipartitionAssignment, BipartitionSplit,
    LevelLayout,
};
pub use general::{color_general, GeneralColorer};
pub use greedy::{greedy_color, ColorCounter};
pub use reduction::{
    color_via_matchings, ColoringOutcome, MatchingColorer, PhasePlan, PhaseStats, Preset,
    ReductionColorer, ReductionConfig, ScaleFactors, BIPARTITION_CONSTANT, DESK_EPSILON_CAP,
    GREEDY_CUTOFF_CONSTANT, PHASE_LENGTH_CONSTANT,
};
pub use verify::{verify_coloring, ColoringReport};
