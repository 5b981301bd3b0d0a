use serde::Serialize;

use crate::graph::{Coloring, Edge, GraphInstance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoringReport {
    pub proper: bool,
    pub palette: usize,
    /// `palette / delta` (0 for `delta = 0`).
    pub ratio: f64,
    /// The coloring does not assign exactly one color per edge.
    pub size_mismatch: bool,
    /// First pair of adjacent edges found sharing a color.
    pub offending: Option<(Edge, Edge, u32)>,
}

/// Checks that adjacent edges get distinct colors.
pub fn verify_coloring(inst: &GraphInstance, coloring: &Coloring) -> ColoringReport {
    let palette = coloring.palette_size();
    let ratio = if inst.delta == 0 {
        0.0
    } else {
        palette as f64 / inst.delta as f64
    };
    let size_mismatch = coloring.colors.len() != inst.edge_count();
    // (vertex, color) -> first edge seen with that color at that vertex.
    let mut seen: std::collections::HashMap<(u32, u32), Edge> = Default::default();
    let mut offending = None;
    'outer: for e in inst.edges() {
        let Some(&c) = coloring.colors.get(e.index) else {
            break;
        };
        for w in [e.edge.u, e.edge.v] {
            if let Some(&prev) = seen.get(&(w.0, c)) {
                offending = Some((prev, e.edge, c));
                break 'outer;
            }
        }
        seen.insert((e.edge.u.0, c), e.edge);
        seen.insert((e.edge.v.0, c), e.edge);
    }
    ColoringReport {
        proper: offending.is_none() && !size_mismatch,
        palette,
        ratio,
        size_mismatch,
        offending,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;

    fn cycle(n: u32) -> GraphInstance {
        let mut edges: Vec<(u32, u32, f64)> = (0..n - 1).map(|i| (i, i + 1, 0.5)).collect();
        edges.push((0, n - 1, 0.5));
        GraphInstance::from_edges(n as usize, 2, &edges)
    }

    #[test]
    fn even_cycle_two_colors() {
        let inst = cycle(6);
        // Edge order: (0,1) (1,2) (2,3) (3,4) (0,5) (4,5).
        let c = Coloring::new(vec![0, 1, 0, 1, 1, 0]);
        let r = verify_coloring(&inst, &c);
        assert!(r.proper, "{r:?}");
        assert_eq!(r.palette, 2);
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn names_the_offending_pair() {
        let inst = GraphInstance::from_edges(3, 2, &[(0, 1, 0.5), (1, 2, 0.5)]);
        let r = verify_coloring(&inst, &Coloring::new(vec![4, 4]));
        assert!(!r.proper);
        let (a, b, c) = r.offending.unwrap();
        assert_eq!(c, 4);
        assert_eq!(a, Edge::new(VertexId(0), VertexId(1)));
        assert_eq!(b, Edge::new(VertexId(1), VertexId(2)));
    }

    #[test]
    fn wrong_length_is_improper() {
        let inst = cycle(4);
        assert!(!verify_coloring(&inst, &Coloring::new(vec![0, 1])).proper);
    }
}
