#![allow(dead_code)]

use edgecolor_core::{GraphInstance, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random bipartite instance on `n` vertices with labeled sides and a
/// feasible fractional matching `x_e = w_e / max(S_u, S_v, 1)`, where `S` is
/// the weight sum at a vertex.
pub fn random_bipartite(n: usize, density: f64, seed: u64) -> GraphInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sides: Vec<Side> = (0..n)
        .map(|_| {
            if rng.random::<bool>() {
                Side::One
            } else {
                Side::Two
            }
        })
        .collect();
    let mut raw = Vec::new();
    for v in 0..n {
        for u in 0..v {
            if sides[u] != sides[v] && rng.random::<f64>() < density {
                raw.push((u as u32, v as u32, rng.random_range(0.05..1.0)));
            }
        }
    }
    let mut sum = vec![0.0f64; n];
    for &(u, v, w) in &raw {
        sum[u as usize] += w;
        sum[v as usize] += w;
    }
    let edges: Vec<(u32, u32, f64)> = raw
        .into_iter()
        .map(|(u, v, w)| (u, v, w / sum[u as usize].max(sum[v as usize]).max(1.0)))
        .collect();
    let mut deg = vec![0usize; n];
    for &(u, v, _) in &edges {
        deg[u as usize] += 1;
        deg[v as usize] += 1;
    }
    let delta = deg.iter().copied().max().unwrap_or(0);
    GraphInstance::from_edges(n, delta, &edges).with_sides(sides)
}

/// Uniform `x = 1/delta` on a random bipartite graph with max degree `delta`.
pub fn random_uniform_bipartite(n: usize, delta: usize, seed: u64) -> GraphInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sides: Vec<Side> = (0..n)
        .map(|v| if v % 2 == 0 { Side::One } else { Side::Two })
        .collect();
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for v in 0..n {
        for u in 0..v {
            if sides[u] != sides[v] && deg[u] < delta && deg[v] < delta && rng.random::<f64>() < 0.5
            {
                deg[u] += 1;
                deg[v] += 1;
                edges.push((u as u32, v as u32, 1.0 / delta as f64));
            }
        }
    }
    GraphInstance::from_edges(n, delta, &edges).with_sides(sides)
}
