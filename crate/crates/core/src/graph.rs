//! Graph instances revealed one vertex at a time.
//!
//! Vertices are numbered by arrival rank, so `u < v` means `u` arrived first.
//! When `v` arrives, every edge `(u, v)` with `u < v` is revealed together
//! with its fractional value `x_{u,v}`. Edges are indexed globally in the
//! order they are revealed, and every per-edge table in this crate
//! (schedules, colorings, diagnostics) uses that index.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Slack allowed on the fractional matching constraint `sum_{e ∋ v} x_e <= 1`.
pub const FRACTIONAL_TOLERANCE: f64 = 1e-9;

/// Arrival rank of a vertex.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge to an earlier neighbor, revealed at the arrival of a later vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevealedEdge {
    pub neighbor: VertexId,
    pub x: f64,
}

/// One step of the online input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArrivalEvent {
    pub vertex: VertexId,
    pub edges: Vec<RevealedEdge>,
}

impl ArrivalEvent {
    pub fn new(vertex: VertexId) -> Self {
        Self {
            vertex,
            edges: Vec::new(),
        }
    }

    pub fn with_edges(vertex: VertexId, edges: Vec<RevealedEdge>) -> Self {
        Self { vertex, edges }
    }

    /// Fractional degree of the arriving vertex: `sum_{u < v} x_{u,v}`.
    pub fn mass(&self) -> f64 {
        self.edges.iter().map(|e| e.x).sum()
    }
}

/// Bipartition label. `Unlabeled` is only legal for isolated vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Side {
    #[default]
    Unlabeled,
    One,
    Two,
}

/// Serialized as its numeric code, as in instance files.
impl Serialize for Side {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl Side {
    pub fn code(self) -> u8 {
        match self {
            Side::Unlabeled => 0,
            Side::One => 1,
            Side::Two => 2,
        }
    }

    pub fn from_code(code: u64) -> Option<Side> {
        match code {
            0 => Some(Side::Unlabeled),
            1 => Some(Side::One),
            2 => Some(Side::Two),
            _ => None,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
            Side::Unlabeled => Side::Unlabeled,
        }
    }
}

/// An edge `(u, v)` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    /// Builds the edge with endpoints in arrival order.
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn touches(&self, w: VertexId) -> bool {
        self.u == w || self.v == w
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// A revealed edge together with its global index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedEdge {
    pub index: usize,
    pub edge: Edge,
    pub x: f64,
}

/// An online instance: `n` vertices arriving in index order with declared
/// maximum degree `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    pub n: usize,
    pub delta: usize,
    pub arrivals: Vec<ArrivalEvent>,
    pub sides: Option<Vec<Side>>,
}

impl GraphInstance {
    /// An edgeless instance with one (empty) arrival per vertex.
    pub fn empty(n: usize, delta: usize) -> Self {
        Self {
            n,
            delta,
            arrivals: (0..n)
                .map(|v| ArrivalEvent::new(VertexId(v as u32)))
                .collect(),
            sides: None,
        }
    }

    /// Builds an instance from an undirected edge list, revealing each edge at
    /// the arrival of its later endpoint. Neighbors within an arrival are sorted.
    pub fn from_edges(n: usize, delta: usize, edges: &[(u32, u32, f64)]) -> Self {
        let mut inst = Self::empty(n, delta);
        let mut sorted: Vec<(u32, u32, f64)> = edges
            .iter()
            .map(|&(a, b, x)| if a <= b { (a, b, x) } else { (b, a, x) })
            .collect();
        sorted.sort_by(|l, r| (l.1, l.0).cmp(&(r.1, r.0)));
        for (u, v, x) in sorted {
            inst.arrivals[v as usize].edges.push(RevealedEdge {
                neighbor: VertexId(u),
                x,
            });
        }
        inst
    }

    pub fn with_sides(mut self, sides: Vec<Side>) -> Self {
        self.sides = Some(sides);
        self
    }

    pub fn edge_count(&self) -> usize {
        self.arrivals.iter().map(|a| a.edges.len()).sum()
    }

    /// Global index of the first edge revealed by each arrival, plus a final
    /// entry equal to the edge count.
    pub fn edge_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.arrivals.len() + 1);
        let mut acc = 0;
        for a in &self.arrivals {
            offsets.push(acc);
            acc += a.edges.len();
        }
        offsets.push(acc);
        offsets
    }

    pub fn edges(&self) -> impl Iterator<Item = IndexedEdge> + '_ {
        self.arrivals
            .iter()
            .flat_map(|a| a.edges.iter().map(move |e| (a.vertex, e)))
            .enumerate()
            .map(|(index, (v, e))| IndexedEdge {
                index,
                edge: Edge::new(e.neighbor, v),
                x: e.x,
            })
    }

    /// Degree of every vertex, ignoring endpoints outside `0..n`.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for a in &self.arrivals {
            for e in &a.edges {
                if let Some(d) = deg.get_mut(a.vertex.index()) {
                    *d += 1;
                }
                if let Some(d) = deg.get_mut(e.neighbor.index()) {
                    *d += 1;
                }
            }
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Adjacency lists (neighbors of every vertex, in either direction).
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in self.edges() {
            if e.edge.v.index() < self.n {
                adj[e.edge.u.index()].push(e.edge.v);
                adj[e.edge.v.index()].push(e.edge.u);
            }
        }
        adj
    }

    /// A proper two-coloring of the vertices if the graph is bipartite.
    /// Uses the declared labels when they are consistent, otherwise BFS.
    pub fn bipartition(&self) -> Option<Vec<Side>> {
        if let Some(sides) = &self.sides {
            let consistent = sides.len() == self.n
                && self.edges().all(|e| {
                    match (sides.get(e.edge.u.index()), sides.get(e.edge.v.index())) {
                        (Some(&a), Some(&b)) => {
                            a != Side::Unlabeled && b != Side::Unlabeled && a != b
                        }
                        _ => false,
                    }
                });
            if consistent {
                return Some(sides.clone());
            }
        }
        let adj = self.adjacency();
        let mut side = vec![Side::Unlabeled; self.n];
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if side[start] != Side::Unlabeled {
                continue;
            }
            side[start] = Side::One;
            queue.push_back(start);
            while let Some(w) = queue.pop_front() {
                for &z in &adj[w] {
                    let z = z.index();
                    if side[z] == Side::Unlabeled {
                        side[z] = side[w].opposite();
                        queue.push_back(z);
                    } else if side[z] == side[w] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// The instance restricted to the first `len` arrivals.
    pub fn prefix(&self, len: usize) -> GraphInstance {
        let len = len.min(self.arrivals.len());
        GraphInstance {
            n: len,
            delta: self.delta,
            arrivals: self.arrivals[..len].to_vec(),
            sides: self.sides.as_ref().map(|s| s[..len.min(s.len())].to_vec()),
        }
    }
}

/// A broken instance invariant, naming the offending vertex or edge.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ArrivalCount {
        declared: usize,
        found: usize,
    },
    VertexOrder {
        position: usize,
        vertex: VertexId,
    },
    ArrivalOrder {
        vertex: VertexId,
        neighbor: VertexId,
    },
    DuplicateNeighbor {
        vertex: VertexId,
        neighbor: VertexId,
    },
    InvalidValue {
        vertex: VertexId,
        neighbor: VertexId,
        x: f64,
    },
    FractionalConstraint {
        vertex: VertexId,
        sum: f64,
    },
    DegreeExceeded {
        vertex: VertexId,
        degree: usize,
        delta: usize,
    },
    SideCount {
        declared: usize,
        found: usize,
    },
    SideMismatch {
        edge: Edge,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ArrivalCount { declared, found } => {
                write!(f, "declared {declared} vertices but found {found} arrivals")
            }
            Violation::VertexOrder { position, vertex } => {
                write!(f, "arrival #{position} is for vertex {vertex}, expected {position}")
            }
            Violation::ArrivalOrder { vertex, neighbor } => write!(
                f,
                "edge ({neighbor}, {vertex}) revealed at vertex {vertex} but {neighbor} has not arrived"
            ),
            Violation::DuplicateNeighbor { vertex, neighbor } => {
                write!(f, "vertex {vertex} lists neighbor {neighbor} more than once")
            }
            Violation::InvalidValue { vertex, neighbor, x } => {
                write!(f, "edge ({neighbor}, {vertex}) has invalid value x = {x}")
            }
            Violation::FractionalConstraint { vertex, sum } => {
                write!(f, "vertex {vertex} has fractional degree {sum} > 1")
            }
            Violation::DegreeExceeded {
                vertex,
                degree,
                delta,
            } => write!(f, "vertex {vertex} has degree {degree} > delta = {delta}"),
            Violation::SideCount { declared, found } => {
                write!(f, "{found} side labels for {declared} vertices")
            }
            Violation::SideMismatch { edge } => {
                write!(f, "edge {edge} does not join side 1 to side 2")
            }
        }
    }
}

/// Checks every structural invariant of an instance. An empty result means
/// the instance is valid.
pub fn validate_instance(inst: &GraphInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.arrivals.len() != inst.n {
        out.push(Violation::ArrivalCount {
            declared: inst.n,
            found: inst.arrivals.len(),
        });
    }
    let mut sums = vec![0.0f64; inst.n];
    for (pos, a) in inst.arrivals.iter().enumerate() {
        if a.vertex.index() != pos {
            out.push(Violation::VertexOrder {
                position: pos,
                vertex: a.vertex,
            });
        }
        let mut seen = HashSet::with_capacity(a.edges.len());
        for e in &a.edges {
            if e.neighbor >= a.vertex || e.neighbor.index() >= inst.n {
                out.push(Violation::ArrivalOrder {
                    vertex: a.vertex,
                    neighbor: e.neighbor,
                });
            }
            if !seen.insert(e.neighbor) {
                out.push(Violation::DuplicateNeighbor {
                    vertex: a.vertex,
                    neighbor: e.neighbor,
                });
            }
            if !e.x.is_finite() || e.x < 0.0 {
                out.push(Violation::InvalidValue {
                    vertex: a.vertex,
                    neighbor: e.neighbor,
                    x: e.x,
                });
                continue;
            }
            for w in [a.vertex, e.neighbor] {
                if let Some(s) = sums.get_mut(w.index()) {
                    *s += e.x;
                }
            }
        }
    }
    for (v, &s) in sums.iter().enumerate() {
        if s > 1.0 + FRACTIONAL_TOLERANCE {
            out.push(Violation::FractionalConstraint {
                vertex: VertexId(v as u32),
                sum: s,
            });
        }
    }
    for (v, d) in inst.degrees().into_iter().enumerate() {
        if d > inst.delta {
            out.push(Violation::DegreeExceeded {
                vertex: VertexId(v as u32),
                degree: d,
                delta: inst.delta,
            });
        }
    }
    if let Some(sides) = &inst.sides {
        if sides.len() != inst.n {
            out.push(Violation::SideCount {
                declared: inst.n,
                found: sides.len(),
            });
        } else {
            for e in inst.edges() {
                let (Some(&a), Some(&b)) =
                    (sides.get(e.edge.u.index()), sides.get(e.edge.v.index()))
                else {
                    continue;
                };
                if a == Side::Unlabeled || b == Side::Unlabeled || a == b {
                    out.push(Violation::SideMismatch { edge: e.edge });
                }
            }
        }
    }
    out
}

/// A set of vertex-disjoint edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: Vec<Edge>) -> Self {
        Self { edges }
    }

    pub fn push(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    /// Pairs of edges sharing an endpoint. Empty iff this is a matching.
    pub fn conflicts(&self) -> Vec<(Edge, Edge)> {
        let mut owner = std::collections::HashMap::new();
        let mut out = Vec::new();
        for e in &self.edges {
            for w in [e.u, e.v] {
                if let Some(prev) = owner.insert(w, *e) {
                    out.push((prev, *e));
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.conflicts().is_empty()
    }
}

/// Edge colors indexed by global edge index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<u32>,
}

impl Coloring {
    pub fn new(colors: Vec<u32>) -> Self {
        Self { colors }
    }

    /// Number of distinct colors in use.
    pub fn palette_size(&self) -> usize {
        self.colors.iter().collect::<BTreeSet<_>>().len()
    }

    /// Largest color index plus one.
    pub fn span(&self) -> usize {
        self.colors.iter().max().map_or(0, |&c| c as usize + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_is_valid() {
        let inst = GraphInstance::from_edges(2, 1, &[(0, 1, 1.0)]);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn overfull_vertex_is_one_violation() {
        let inst = GraphInstance::from_edges(3, 2, &[(0, 2, 0.75), (1, 2, 0.75)]);
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert!(matches!(
            v[0],
            Violation::FractionalConstraint {
                vertex: VertexId(2),
                ..
            }
        ));
    }

    #[test]
    fn later_neighbor_is_arrival_order_violation() {
        let mut inst = GraphInstance::empty(3, 1);
        inst.arrivals[1].edges.push(RevealedEdge {
            neighbor: VertexId(2),
            x: 0.5,
        });
        let v = validate_instance(&inst);
        assert_eq!(
            v,
            vec![Violation::ArrivalOrder {
                vertex: VertexId(1),
                neighbor: VertexId(2)
            }]
        );
    }

    #[test]
    fn degree_and_side_violations() {
        let inst = GraphInstance::from_edges(3, 1, &[(0, 1, 0.5), (1, 2, 0.5)]).with_sides(vec![
            Side::One,
            Side::Two,
            Side::Two,
        ]);
        let v = validate_instance(&inst);
        assert!(v.iter().any(|x| matches!(
            x,
            Violation::DegreeExceeded {
                vertex: VertexId(1),
                ..
            }
        )));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::SideMismatch { .. })));
    }

    #[test]
    fn odd_cycle_is_not_bipartite() {
        let tri = GraphInstance::from_edges(3, 2, &[(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)]);
        assert!(!tri.is_bipartite());
        let path = GraphInstance::from_edges(3, 2, &[(0, 1, 0.5), (1, 2, 0.5)]);
        let sides = path.bipartition().unwrap();
        assert_ne!(sides[0], sides[1]);
        assert_ne!(sides[1], sides[2]);
    }

    #[test]
    fn matching_conflicts() {
        let m = Matching::from_edges(vec![
            Edge::new(VertexId(0), VertexId(1)),
            Edge::new(VertexId(2), VertexId(1)),
        ]);
        assert_eq!(m.conflicts().len(), 1);
        assert!(!m.is_valid());
    }

    #[test]
    fn edge_indexing_follows_arrivals() {
        let inst = GraphInstance::from_edges(3, 2, &[(1, 2, 0.5), (0, 1, 0.5), (0, 2, 0.5)]);
        let edges: Vec<_> = inst.edges().map(|e| (e.edge.u.0, e.edge.v.0)).collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(inst.edge_offsets(), vec![0, 0, 1, 3]);
    }
}
