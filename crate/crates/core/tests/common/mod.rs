//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use fls_outlier::coplanarity::Hypergraph4;
use fls_outlier::in_range::CompatibilityGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest cliques by level-wise extension, lexicographically smallest
/// first. Needs `n <= 64`.
pub fn brute_max_clique(g: &CompatibilityGraph) -> Vec<usize> {
    let n = g.n();
    assert!(n <= 64);
    if n == 0 {
        return Vec::new();
    }
    let adj: Vec<u64> = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u && g.has_edge(u, v))
                .fold(0u64, |m, v| m | 1 << v)
        })
        .collect();
    let mut level: Vec<(u64, usize)> = (0..n).map(|v| (1u64 << v, v)).collect();
    loop {
        let mut next = Vec::new();
        for &(set, top) in &level {
            for v in top + 1..n {
                if adj[v] & set == set {
                    next.push((set | 1 << v, v));
                }
            }
        }
        if next.is_empty() {
            return level.iter().map(|&(s, _)| bits(s)).min().unwrap();
        }
        level = next;
    }
}

/// Largest hypercliques (size >= 4) by level-wise extension; empty when
/// there is no hyperedge.
pub fn brute_max_hyperclique(h: &Hypergraph4) -> Vec<usize> {
    let mut level: Vec<Vec<usize>> = h
        .edges()
        .iter()
        .map(|e| e.iter().map(|&v| v as usize).collect())
        .collect();
    if level.is_empty() {
        return Vec::new();
    }
    loop {
        let mut next = Vec::new();
        for c in &level {
            let top = *c.last().unwrap();
            'v: for v in top + 1..h.n() {
                for a in 0..c.len() {
                    for b in a + 1..c.len() {
                        for d in b + 1..c.len() {
                            if !h.contains([c[a], c[b], c[d], v]) {
                                continue 'v;
                            }
                        }
                    }
                }
                let mut e = c.clone();
                e.push(v);
                next.push(e);
            }
        }
        if next.is_empty() {
            return level.into_iter().min().unwrap();
        }
        level = next;
    }
}

fn bits(mut s: u64) -> Vec<usize> {
    let mut out = Vec::new();
    while s != 0 {
        out.push(s.trailing_zeros() as usize);
        s &= s - 1;
    }
    out
}

pub fn random_graph(n: usize, p: f64, seed: u64) -> CompatibilityGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CompatibilityGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                g.add_edge(u, v);
            }
        }
    }
    g
}

pub fn four_subsets(vs: &[usize]) -> Vec<[usize; 4]> {
    let k = vs.len();
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    out.push([vs[a], vs[b], vs[c], vs[d]]);
                }
            }
        }
    }
    out
}

/// A hyperclique on `planted` random vertices plus independent hyperedges of
/// probability `density` elsewhere.
pub fn planted_hypergraph(
    n: usize,
    planted: usize,
    density: f64,
    seed: u64,
) -> (Hypergraph4, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clique: Vec<usize> = rand::seq::index::sample(&mut rng, n, planted.min(n)).into_vec();
    clique.sort_unstable();
    let mut edges = four_subsets(&clique);
    let all: Vec<usize> = (0..n).collect();
    for e in four_subsets(&all) {
        if rng.random::<f64>() < density {
            edges.push(e);
        }
    }
    (Hypergraph4::new(n, edges), clique)
}
