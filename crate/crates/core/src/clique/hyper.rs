use std::collections::HashSet;

use crate::coplanarity::Hypergraph4;
use crate::{Error, Result};

use super::CliqueResult;

pub const MAX_EXACT_HYPER_VERTICES: usize = 40;

fn empty(certified: bool) -> CliqueResult {
    CliqueResult {
        vertices: Vec::new(),
        is_certified_maximum: certified,
    }
}

struct ExactSearch<'a> {
    h: &'a Hypergraph4,
    /// Pairs and triples that appear in at least one hyperedge.
    pairs: Vec<bool>,
    triples: HashSet<[u32; 3]>,
    n: usize,
    best: Vec<usize>,
}

impl ExactSearch<'_> {
    fn pair(&self, a: usize, b: usize) -> bool {
        self.pairs[a * self.n + b]
    }

    fn triple(&self, a: usize, b: usize, c: usize) -> bool {
        let mut t = [a as u32, b as u32, c as u32];
        t.sort_unstable();
        self.triples.contains(&t)
    }

    /// `set` is a valid partial hyperclique; every vertex in `cand` extends
    /// it and is larger than its members.
    fn grow(&mut self, set: &mut Vec<usize>, cand: &[usize]) {
        if set.len() >= 4 && set.len() > self.best.len() {
            self.best = set.clone();
        }
        for (idx, &v) in cand.iter().enumerate() {
            // Need strictly more than the incumbent, and at least four.
            let reach = set.len() + cand.len() - idx;
            if reach <= self.best.len() || reach < 4 {
                return;
            }
            let next: Vec<usize> = cand[idx + 1..]
                .iter()
                .copied()
                .filter(|&w| self.admits(set, v, w))
                .collect();
            set.push(v);
            self.grow(set, &next);
            set.pop();
        }
    }

    /// Whether `w` stays compatible once `v` joins `set`.
    fn admits(&self, set: &[usize], v: usize, w: usize) -> bool {
        match set.len() {
            0 => self.pair(v, w),
            1 => self.triple(set[0], v, w),
            _ => {
                for a in 0..set.len() {
                    for b in a + 1..set.len() {
                        if !self.h.contains([set[a], set[b], v, w]) {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

/// Exact maximum hyperclique (size >= 4) by enumeration in lexicographic
/// order with a cardinality bound. Returns the empty set when there are no
/// hyperedges.
pub fn max_clique_hyper4_exact(h: &Hypergraph4) -> Result<CliqueResult> {
    let n = h.n();
    if n > MAX_EXACT_HYPER_VERTICES {
        return Err(Error::TooLargeForExact {
            n,
            max: MAX_EXACT_HYPER_VERTICES,
        });
    }
    let mut pairs = vec![false; n * n];
    let mut triples = HashSet::new();
    for e in h.edges() {
        let e = e.map(|v| v as usize);
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    pairs[e[a] * n + e[b]] = true;
                }
            }
            let mut t = [0u32; 3];
            let mut k = 0;
            for (b, &v) in e.iter().enumerate() {
                if b != a {
                    t[k] = v as u32;
                    k += 1;
                }
            }
            triples.insert(t);
        }
    }
    let mut search = ExactSearch {
        h,
        pairs,
        triples,
        n,
        best: Vec::new(),
    };
    let cand: Vec<usize> = (0..n)
        .filter(|&v| (0..n).any(|u| search.pair(v, u)))
        .collect();
    search.grow(&mut Vec::new(), &cand);
    Ok(CliqueResult {
        vertices: search.best,
        is_certified_maximum: true,
    })
}

fn choose4(k: usize) -> u64 {
    if k < 4 {
        return 0;
    }
    let k = k as u64;
    k * (k - 1) * (k - 2) * (k - 3) / 24
}

/// Peels the vertex of minimum live hyperedge degree (lowest index on ties)
/// until the survivors form a hyperclique, then re-inserts peeled vertices in
/// reverse peel order whenever the result stays a hyperclique.
pub fn max_clique_hyper4_heuristic(h: &Hypergraph4) -> CliqueResult {
    if h.is_empty() {
        return empty(false);
    }
    let n = h.n();
    let edges = h.edges();
    let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (id, e) in edges.iter().enumerate() {
        for &v in e {
            incidence[v as usize].push(id as u32);
        }
    }
    let mut degree: Vec<usize> = incidence.iter().map(Vec::len).collect();
    let mut vertex_alive = vec![true; n];
    let mut edge_alive = vec![true; edges.len()];
    let mut live_vertices = n;
    let mut live_edges = edges.len() as u64;
    let mut peeled = Vec::new();

    while live_vertices >= 4 && live_edges != choose4(live_vertices) {
        let v = (0..n)
            .filter(|&v| vertex_alive[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("live vertex");
        vertex_alive[v] = false;
        live_vertices -= 1;
        peeled.push(v);
        for &id in &incidence[v] {
            let id = id as usize;
            if edge_alive[id] {
                edge_alive[id] = false;
                live_edges -= 1;
                for &u in &edges[id] {
                    degree[u as usize] -= 1;
                }
            }
        }
    }
    if live_vertices < 4 {
        return empty(false);
    }

    let mut kept: Vec<usize> = (0..n).filter(|&v| vertex_alive[v]).collect();
    for &v in peeled.iter().rev() {
        let k = kept.len();
        let mut fits = true;
        'triples: for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    if !h.contains([kept[a], kept[b], kept[c], v]) {
                        fits = false;
                        break 'triples;
                    }
                }
            }
        }
        if fits {
            kept.push(v);
        }
    }
    kept.sort_unstable();
    CliqueResult {
        vertices: kept,
        is_certified_maximum: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clique::is_hyperclique;

    fn all_quads(vs: &[usize]) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        let k = vs.len();
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

    #[test]
    fn full_hypergraph() {
        let h = Hypergraph4::new(6, all_quads(&[0, 1, 2, 3, 4, 5]));
        assert_eq!(
            max_clique_hyper4_exact(&h).unwrap().vertices,
            vec![0, 1, 2, 3, 4, 5]
        );
        let r = max_clique_hyper4_heuristic(&h);
        assert_eq!(r.vertices, vec![0, 1, 2, 3, 4, 5]);
        assert!(!r.is_certified_maximum);
    }

    #[test]
    fn single_edge() {
        let h = Hypergraph4::new(10, [[0, 1, 2, 3]]);
        assert_eq!(
            max_clique_hyper4_exact(&h).unwrap().vertices,
            vec![0, 1, 2, 3]
        );
        assert_eq!(max_clique_hyper4_heuristic(&h).vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn no_edges_gives_empty_set() {
        let h = Hypergraph4::new(8, []);
        assert!(max_clique_hyper4_exact(&h).unwrap().vertices.is_empty());
        assert!(max_clique_hyper4_heuristic(&h).vertices.is_empty());
    }

    #[test]
    fn exact_refuses_large_input() {
        let h = Hypergraph4::new(41, [[0, 1, 2, 3]]);
        assert!(matches!(
            max_clique_hyper4_exact(&h),
            Err(Error::TooLargeForExact { .. })
        ));
    }

    #[test]
    fn exact_tie_break_is_lexicographic() {
        let mut e = all_quads(&[5, 6, 7, 8, 9]);
        e.extend(all_quads(&[1, 2, 3, 4, 9]));
        let h = Hypergraph4::new(10, e);
        assert_eq!(
            max_clique_hyper4_exact(&h).unwrap().vertices,
            vec![1, 2, 3, 4, 9]
        );
    }

    #[test]
    fn heuristic_result_is_valid_with_noise_edges() {
        let mut e = all_quads(&[2, 4, 6, 8, 10, 12]);
        e.extend([[0, 1, 2, 3], [1, 3, 5, 7], [0, 4, 8, 13], [2, 4, 6, 13]]);
        let h = Hypergraph4::new(14, e);
        let r = max_clique_hyper4_heuristic(&h);
        assert!(is_hyperclique(&h, &r.vertices));
        assert_eq!(r.vertices, vec![2, 4, 6, 8, 10, 12]);
    }
}
