//! Maximum-clique solvers for the compatibility graphs.
//!
//! - [`max_clique_simple`]: exact branch and bound on a simple graph.
//! - [`max_clique_hyper4_exact`]: exact search on small 4-uniform
//!   hypergraphs.
//! - [`max_clique_hyper4_heuristic`]: degree peeling with greedy re-insertion
//!   for 4-uniform hypergraphs of any size.
//!
//! Ties between maximum cliques are broken towards the lexicographically
//! smallest sorted vertex list.

mod hyper;
mod simple;

pub use hyper::{max_clique_hyper4_exact, max_clique_hyper4_heuristic, MAX_EXACT_HYPER_VERTICES};
pub use simple::max_clique_simple;

use crate::coplanarity::Hypergraph4;
use crate::in_range::CompatibilityGraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueResult {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub is_certified_maximum: bool,
}

/// Every pair of `vertices` is adjacent and no vertex repeats.
pub fn is_clique(g: &CompatibilityGraph, vertices: &[usize]) -> bool {
    vertices.iter().enumerate().all(|(a, &u)| {
        u < g.n()
            && vertices[a + 1..]
                .iter()
                .all(|&v| u != v && g.has_edge(u, v))
    })
}

/// Empty, or at least four distinct vertices whose every 4-subset is a
/// hyperedge.
pub fn is_hyperclique(h: &Hypergraph4, vertices: &[usize]) -> bool {
    if vertices.is_empty() {
        return true;
    }
    let k = vertices.len();
    if k < 4 {
        return false;
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    if !h.contains([sorted[a], sorted[b], sorted[c], sorted[d]]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
