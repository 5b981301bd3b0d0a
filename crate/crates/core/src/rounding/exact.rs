//! Exact joint distribution of matched flags for small instances.
//!
//! The state space is the set of matched-status bit vectors over the vertices
//! that have touched at least one edge (isolated vertices are always free and
//! take no bit). Every arrival pushes the whole distribution through both
//! picks, which yields the exact free probabilities, the exact
//! `J = Pr[F_{u,v} and R_v]` needed for `p_{u,v}`, and the exact marginal of
//! every edge.

use std::collections::BTreeMap;

use super::state::{ArrivalSchedule, Branch};
use super::{ConstantC, RoundingError};
use crate::graph::VertexId;

/// Default limit on tracked vertices (the support can reach `2^cap`).
pub const DEFAULT_EXACT_CAP: usize = 14;

/// Slack below which clamping `p` into `[0, 1]` is treated as rounding noise.
const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ExactDistribution {
    cap: usize,
    bit_of: Vec<Option<u8>>,
    tracked: usize,
    support: BTreeMap<u64, f64>,
}

impl ExactDistribution {
    pub fn new(cap: usize) -> Self {
        let mut support = BTreeMap::new();
        support.insert(0u64, 1.0);
        Self {
            cap: cap.min(63),
            bit_of: Vec::new(),
            tracked: 0,
            support,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of vertices with a bit in the state vector.
    pub fn tracked(&self) -> usize {
        self.tracked
    }

    /// Probability of every matched-status vector in the support.
    pub fn support(&self) -> &BTreeMap<u64, f64> {
        &self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.support.values().sum()
    }

    fn bit(&self, u: VertexId) -> Option<u64> {
        self.bit_of
            .get(u.index())
            .copied()
            .flatten()
            .map(|b| 1u64 << b)
    }

    fn register(&mut self, u: VertexId) -> Result<u64, RoundingError> {
        if let Some(b) = self.bit(u) {
            return Ok(b);
        }
        if self.tracked >= self.cap {
            return Err(RoundingError::ExactCapExceeded { cap: self.cap });
        }
        if u.index() >= self.bit_of.len() {
            self.bit_of.resize(u.index() + 1, None);
        }
        self.bit_of[u.index()] = Some(self.tracked as u8);
        self.tracked += 1;
        Ok(1u64 << (self.tracked - 1))
    }

    /// `Pr[u is free]` under the current distribution.
    pub fn free_probability(&self, u: VertexId) -> f64 {
        match self.bit(u) {
            None => 1.0,
            Some(b) => self
                .support
                .iter()
                .filter(|(m, _)| *m & b == 0)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    /// `Pr[u free and w free]`.
    pub fn pair_free_probability(&self, u: VertexId, w: VertexId) -> f64 {
        let mask = self.bit(u).unwrap_or(0) | self.bit(w).unwrap_or(0);
        self.support
            .iter()
            .filter(|(m, _)| *m & mask == 0)
            .map(|(_, p)| p)
            .sum()
    }

    /// Advances the distribution through one arrival and fills in `q1`, `j`,
    /// `p`, `deficiency`, `excess` and the exact `marginal` of every edge in
    /// `plan`. With `p_override`, the given second-pick probabilities are
    /// used as-is instead of being calibrated.
    pub fn step(
        &mut self,
        plan: &mut ArrivalSchedule,
        consts: &ConstantC,
        p_override: Option<&[f64]>,
    ) -> Result<(), RoundingError> {
        if plan.edges.is_empty() {
            return Ok(());
        }
        let v_bit = self.register(plan.vertex)?;
        let mut bits = Vec::with_capacity(plan.edges.len());
        for e in &plan.edges {
            bits.push(self.register(e.edge.u)?);
        }
        let nil = plan.nil_weight();

        // First (or only) pick. `rejected` holds the mass where v is still free.
        let mut matched: BTreeMap<u64, f64> = BTreeMap::new();
        let mut rejected: BTreeMap<u64, f64> = BTreeMap::new();
        let mut first_mass = vec![0.0; plan.edges.len()];
        for (&mask, &pi) in &self.support {
            let mut stay = pi * nil;
            for (i, e) in plan.edges.iter().enumerate() {
                let w = pi * e.pick_weight;
                if w == 0.0 {
                    continue;
                }
                if mask & bits[i] == 0 {
                    let hit = w * e.accept;
                    if hit > 0.0 {
                        *matched.entry(mask | bits[i] | v_bit).or_default() += hit;
                        first_mass[i] += hit;
                    }
                    stay += w - hit;
                } else {
                    stay += w;
                }
            }
            if stay > 0.0 {
                *rejected.entry(mask).or_default() += stay;
            }
        }
        for (e, &m) in plan.edges.iter_mut().zip(&first_mass) {
            e.q1 = m;
        }

        if plan.branch == Branch::LowDegree {
            for e in plan.edges.iter_mut() {
                e.marginal = e.q1;
            }
            for (mask, pi) in rejected {
                *matched.entry(mask).or_default() += pi;
            }
            self.support = matched;
            self.renormalize();
            return Ok(());
        }

        // Calibrate p from J = Pr[u free, v rejected after the first pick].
        for (i, e) in plan.edges.iter_mut().enumerate() {
            e.j = rejected
                .iter()
                .filter(|(m, _)| *m & bits[i] == 0)
                .map(|(_, p)| p)
                .sum();
            let target = consts.half_plus_c * e.x;
            match p_override {
                Some(p) => e.p = p[i].clamp(0.0, 1.0),
                None => {
                    let numerator = target - e.q1;
                    let denominator = e.x * e.j;
                    let raw = if denominator > 0.0 {
                        numerator / denominator
                    } else if numerator > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    e.p = raw.clamp(0.0, 1.0);
                    if raw > 1.0 + CLAMP_SLACK {
                        e.deficiency = numerator - denominator * e.p;
                    } else if raw < -CLAMP_SLACK {
                        e.excess = -numerator;
                    }
                }
            }
        }

        // Second pick from the rejected mass.
        let mut second_mass = vec![0.0; plan.edges.len()];
        let mut next = matched;
        for (&mask, &pi) in &rejected {
            let mut stay = pi * nil;
            for (i, e) in plan.edges.iter().enumerate() {
                let w = pi * e.x;
                if w == 0.0 {
                    continue;
                }
                if mask & bits[i] == 0 {
                    let hit = w * e.p;
                    if hit > 0.0 {
                        *next.entry(mask | bits[i] | v_bit).or_default() += hit;
                        second_mass[i] += hit;
                    }
                    stay += w - hit;
                } else {
                    stay += w;
                }
            }
            if stay > 0.0 {
                *next.entry(mask).or_default() += stay;
            }
        }
        for (e, &m) in plan.edges.iter_mut().zip(&second_mass) {
            e.marginal = e.q1 + m;
        }
        self.support = next;
        self.renormalize();
        Ok(())
    }

    fn renormalize(&mut self) {
        let total = self.total_mass();
        if total > 0.0 && total != 1.0 {
            for p in self.support.values_mut() {
                *p /= total;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ArrivalEvent, RevealedEdge};
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

    fn run(events: &[ArrivalEvent]) -> (ExactDistribution, Vec<ArrivalSchedule>) {
        let k = ConstantC::standard();
        let mut ledger = DegreeLedger::new(0, k);
        let mut dist = ExactDistribution::new(DEFAULT_EXACT_CAP);
        let mut out = Vec::new();
        for ev in events {
            let mut plan = ledger.plan(ev).unwrap();
            dist.step(&mut plan, &k, None).unwrap();
            ledger.commit(ev);
            out.push(plan);
        }
        (dist, out)
    }

    #[test]
    fn single_full_edge() {
        let k = ConstantC::standard();
        let (_, plans) = run(&[event(0, &[]), event(1, &[(0, 1.0)])]);
        let e = &plans[1].edges[0];
        assert_eq!(plans[1].branch, Branch::HighDegree);
        // g = 1 >= 1/2 + c, so the first pick already meets the target.
        assert!((e.q1 - k.half_plus_c).abs() < 1e-15);
        assert_eq!(e.p, 0.0);
        assert!((e.marginal - k.half_plus_c).abs() < 1e-12);
    }

    #[test]
    fn single_half_edge_low_branch() {
        let k = ConstantC::standard();
        let (_, plans) = run(&[event(0, &[]), event(1, &[(0, 0.5)])]);
        assert_eq!(plans[1].branch, Branch::LowDegree);
        assert!((plans[1].edges[0].marginal - 0.5 * k.half_plus_c).abs() < 1e-12);
    }

    #[test]
    fn free_probabilities_follow_closed_form() {
        let k = ConstantC::standard();
        let events = [
            event(0, &[]),
            event(1, &[(0, 0.5)]),
            event(2, &[(1, 0.5)]),
            event(3, &[(0, 0.5), (2, 0.5)]),
        ];
        let (dist, _) = run(&events);
        let mut ledger = DegreeLedger::new(0, k);
        for ev in &events {
            ledger.commit(ev);
        }
        for u in 0..4 {
            let u = VertexId(u);
            assert!((dist.free_probability(u) - ledger.g(u)).abs() < 1e-12);
        }
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let k = ConstantC::standard();
        let mut ledger = DegreeLedger::new(0, k);
        let mut dist = ExactDistribution::new(2);
        let ev = event(1, &[(0, 0.5)]);
        let mut plan = ledger.plan(&ev).unwrap();
        dist.step(&mut plan, &k, None).unwrap();
        ledger.commit(&ev);
        let ev = event(2, &[(1, 0.5)]);
        let mut plan = ledger.plan(&ev).unwrap();
        assert!(matches!(
            dist.step(&mut plan, &k, None),
            Err(RoundingError::ExactCapExceeded { cap: 2 })
        ));
    }
}
