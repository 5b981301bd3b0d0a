//! Online edge coloring under vertex arrivals, driven by online rounding of
//! fractional matchings.
//!
//! - [`graph`], [`io`], [`generate`]: instances, file formats, generators.
//! - [`rounding`]: the rounding algorithm with exact and ensemble backends.
//! - [`coloring`]: greedy, the matching-driven reduction, random bipartition.
//! - [`diagnostics`]: statistical checks of the rounding guarantees.

pub mod coloring;
pub mod diagnostics;
pub mod generate;
pub mod graph;
pub mod io;
pub mod rng;
pub mod rounding;

pub use graph::{
    validate_instance, ArrivalEvent, Coloring, Edge, GraphInstance, Matching, RevealedEdge, Side,
    VertexId, Violation,
};
