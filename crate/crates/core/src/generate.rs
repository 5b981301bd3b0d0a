//! Seeded instance generators.
//!
//! All generators are pure functions of their arguments: the same seed gives
//! the same instance, down to the serialized bytes.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphInstance, Side};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("delta = {delta} exceeds the {n_per_side} vertices available per side")]
    DeltaTooLarge { delta: usize, n_per_side: usize },
}

/// Arrival order for bipartite instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalOrder {
    /// Sides alternate: left 0, right 0, left 1, right 1, ...
    Interleaved,
    /// The whole left side arrives before the right side.
    OneSided,
    /// A uniformly random permutation of all vertices.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralModel {
    /// Degree-capped G(n, p) with `p = delta / (n - 1)`.
    ErdosRenyi,
    /// Union of `delta` edge-disjoint random perfect matchings.
    UnionOfMatchings,
}

/// A random `delta`-regular bipartite graph with `n_per_side` vertices per
/// side, carrying the uniform fractional matching `x = 1/delta`.
///
/// Starts from a circulant graph under random relabeling and mixes it with
/// degree-preserving edge switches.
pub fn gen_regular_bipartite(
    n_per_side: usize,
    delta: usize,
    seed: u64,
    order: ArrivalOrder,
) -> Result<GraphInstance, GenError> {
    if delta > n_per_side {
        return Err(GenError::DeltaTooLarge { delta, n_per_side });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_per_side;
    let mut left: Vec<usize> = (0..n).collect();
    let mut right: Vec<usize> = (0..n).collect();
    left.shuffle(&mut rng);
    right.shuffle(&mut rng);

    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..delta).map(move |k| (i, k)))
        .map(|(i, k)| (left[i], right[(i + k) % n]))
        .collect();
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    if edges.len() >= 2 {
        for _ in 0..10 * edges.len() {
            let i = rng.random_range(0..edges.len());
            let j = rng.random_range(0..edges.len());
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            if a == c || b == d || present.contains(&(a, d)) || present.contains(&(c, b)) {
                continue;
            }
            present.remove(&(a, b));
            present.remove(&(c, d));
            present.insert((a, d));
            present.insert((c, b));
            edges[i] = (a, d);
            edges[j] = (c, b);
        }
    }

    // Arrival rank of left vertex i and right vertex j.
    let (left_rank, right_rank): (Vec<u32>, Vec<u32>) = match order {
        ArrivalOrder::Interleaved => (
            (0..n).map(|i| 2 * i as u32).collect(),
            (0..n).map(|j| 2 * j as u32 + 1).collect(),
        ),
        ArrivalOrder::OneSided => (
            (0..n).map(|i| i as u32).collect(),
            (0..n).map(|j| (n + j) as u32).collect(),
        ),
        ArrivalOrder::Random => {
            let mut perm: Vec<u32> = (0..2 * n as u32).collect();
            perm.shuffle(&mut rng);
            (perm[..n].to_vec(), perm[n..].to_vec())
        }
    };
    let mut sides = vec![Side::Unlabeled; 2 * n];
    for i in 0..n {
        sides[left_rank[i] as usize] = Side::One;
        sides[right_rank[i] as usize] = Side::Two;
    }
    let x = if delta == 0 { 0.0 } else { 1.0 / delta as f64 };
    let list: Vec<(u32, u32, f64)> = edges
        .into_iter()
        .map(|(a, b)| (left_rank[a], right_rank[b], x))
        .collect();
    Ok(GraphInstance::from_edges(2 * n, delta, &list).with_sides(sides))
}

/// A general (not necessarily bipartite) graph with maximum degree at most
/// `delta`, arriving in a uniformly random order, with `x = 1/delta`.
pub fn gen_general(n: usize, delta: usize, model: GeneralModel, seed: u64) -> GraphInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = match model {
        GeneralModel::ErdosRenyi => erdos_renyi_capped(n, delta, &mut rng),
        GeneralModel::UnionOfMatchings => union_of_matchings(n, delta, &mut rng),
    };
    let x = if delta == 0 { 0.0 } else { 1.0 / delta as f64 };
    let list: Vec<(u32, u32, f64)> = edges
        .into_iter()
        .map(|(a, b)| (a as u32, b as u32, x))
        .collect();
    GraphInstance::from_edges(n, delta, &list)
}

fn erdos_renyi_capped(n: usize, delta: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n < 2 || delta == 0 {
        return Vec::new();
    }
    let p = (delta as f64 / (n - 1) as f64).min(1.0);
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(rng);
    let mut deg = vec![0usize; n];
    let mut out = Vec::new();
    for (a, b) in pairs {
        if rng.random::<f64>() < p && deg[a] < delta && deg[b] < delta {
            deg[a] += 1;
            deg[b] += 1;
            out.push((a, b));
        }
    }
    out
}

fn union_of_matchings(n: usize, delta: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let mut out = Vec::new();
    let rounds = delta.min(n.saturating_sub(1));
    for _ in 0..rounds {
        let mut best: Vec<(usize, usize)> = Vec::new();
        for _attempt in 0..50 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut pairs: Vec<(usize, usize)> =
                order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            // Repair pairs that duplicate earlier edges by swapping partners
            // with another pair of this matching.
            for _ in 0..50 * pairs.len().max(1) {
                let bad: Vec<usize> = (0..pairs.len())
                    .filter(|&i| present.contains(&key(pairs[i].0, pairs[i].1)))
                    .collect();
                let Some(&i) = bad.first() else { break };
                let j = rng.random_range(0..pairs.len());
                if i == j {
                    continue;
                }
                let (a, b) = pairs[i];
                let (c, d) = pairs[j];
                let (p, q) = if rng.random::<bool>() {
                    ((a, c), (b, d))
                } else {
                    ((a, d), (b, c))
                };
                let before = [key(a, b), key(c, d)]
                    .iter()
                    .filter(|e| present.contains(e))
                    .count();
                let after = [key(p.0, p.1), key(q.0, q.1)]
                    .iter()
                    .filter(|e| present.contains(e))
                    .count();
                if after < before {
                    pairs[i] = p;
                    pairs[j] = q;
                }
            }
            let clean: Vec<(usize, usize)> = pairs
                .iter()
                .copied()
                .filter(|&(a, b)| !present.contains(&key(a, b)))
                .collect();
            let complete = clean.len() == pairs.len();
            if clean.len() > best.len() {
                best = clean;
            }
            if complete {
                break;
            }
        }
        for (a, b) in best {
            present.insert(key(a, b));
            out.push(key(a, b));
        }
    }
    out
}

/// The same graph with every edge carrying `x = 1/delta`.
pub fn uniform_fractional(inst: &GraphInstance) -> GraphInstance {
    let mut out = inst.clone();
    let x = if inst.delta == 0 {
        0.0
    } else {
        1.0 / inst.delta as f64
    };
    for a in &mut out.arrivals {
        for e in &mut a.edges {
            e.x = x;
        }
    }
    out
}
