use crate::graph::{Coloring, GraphInstance, VertexId};

/// Per-vertex used-color bitsets plus the palette high-water mark.
#[derive(Debug, Clone, Default)]
pub struct ColorCounter {
    used: Vec<Vec<u64>>,
    high_water: u32,
}

impl ColorCounter {
    pub fn new(n: usize) -> Self {
        Self {
            used: vec![Vec::new(); n],
            high_water: 0,
        }
    }

    fn slot(&mut self, v: VertexId) -> &mut Vec<u64> {
        if v.index() >= self.used.len() {
            self.used.resize(v.index() + 1, Vec::new());
        }
        &mut self.used[v.index()]
    }

    pub fn is_used(&self, v: VertexId, color: u32) -> bool {
        let (w, b) = (color as usize / 64, color % 64);
        self.used
            .get(v.index())
            .and_then(|s| s.get(w))
            .is_some_and(|word| word >> b & 1 == 1)
    }

    /// Marks `color` as used at both endpoints.
    pub fn mark(&mut self, u: VertexId, v: VertexId, color: u32) {
        let (w, b) = (color as usize / 64, color % 64);
        for x in [u, v] {
            let s = self.slot(x);
            if s.len() <= w {
                s.resize(w + 1, 0);
            }
            s[w] |= 1 << b;
        }
        self.high_water = self.high_water.max(color + 1);
    }

    /// Smallest color `>= floor` free at both endpoints; marks it.
    pub fn assign_first_fit(&mut self, u: VertexId, v: VertexId, floor: u32) -> u32 {
        let mut c = floor;
        while self.is_used(u, c) || self.is_used(v, c) {
            c += 1;
        }
        self.mark(u, v, c);
        c
    }

    /// One past the largest color handed out.
    pub fn high_water(&self) -> u32 {
        self.high_water
    }
}

/// First-fit greedy: every revealed edge gets the smallest color unused at
/// both endpoints. Uses at most `2 delta - 1` colors.
pub fn greedy_color(inst: &GraphInstance) -> Coloring {
    let mut counter = ColorCounter::new(inst.n);
    let colors = inst
        .edges()
        .map(|e| counter.assign_first_fit(e.edge.u, e.edge.v, 0))
        .collect();
    Coloring::new(colors)
}
