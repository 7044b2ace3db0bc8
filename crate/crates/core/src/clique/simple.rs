use crate::in_range::CompatibilityGraph;

use super::CliqueResult;

/// Dense bit set over `0..n`.
#[derive(Clone, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(words: usize) -> Self {
        Bits(vec![0; words])
    }

    fn set(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    fn clear(&mut self, v: usize) {
        self.0[v / 64] &= !(1 << (v % 64));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, row: &[u64]) -> Bits {
        Bits(self.0.iter().zip(row).map(|(a, b)| a & b).collect())
    }

    fn and_not_in_place(&mut self, row: &[u64]) {
        for (a, b) in self.0.iter_mut().zip(row) {
            *a &= !b;
        }
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

/// Adjacency rows in a (possibly relabelled) vertex space.
struct Adjacency {
    words: usize,
    rows: Vec<u64>,
}

impl Adjacency {
    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }
}

/// Greedy sequential colouring of `p` in index order. Returns the vertices
/// grouped by colour and the colour (1-based) of each.
fn colour_sort(adj: &Adjacency, p: &Bits) -> (Vec<usize>, Vec<usize>) {
    let mut uncoloured = p.clone();
    let mut order = Vec::with_capacity(p.count());
    let mut colours = Vec::with_capacity(order.capacity());
    let mut colour = 0;
    while !uncoloured.is_empty() {
        colour += 1;
        let mut q = uncoloured.clone();
        while let Some(v) = q.first() {
            q.clear(v);
            q.and_not_in_place(adj.row(v));
            uncoloured.clear(v);
            order.push(v);
            colours.push(colour);
        }
    }
    (order, colours)
}

fn colour_bound(adj: &Adjacency, p: &Bits) -> usize {
    let mut uncoloured = p.clone();
    let mut colours = 0;
    while !uncoloured.is_empty() {
        colours += 1;
        let mut q = uncoloured.clone();
        while let Some(v) = q.first() {
            q.clear(v);
            q.and_not_in_place(adj.row(v));
            uncoloured.clear(v);
        }
    }
    colours
}

/// Core numbers and the min-degree removal order.
fn degeneracy(g: &CompatibilityGraph) -> (Vec<usize>, Vec<usize>) {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut core = vec![0; n];
    let mut k = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (deg[v], v))
            .expect("vertex left");
        k = k.max(deg[v]);
        core[v] = k;
        removed[v] = true;
        order.push(v);
        for u in 0..n {
            if !removed[u] && g.has_edge(u, v) {
                deg[u] -= 1;
            }
        }
    }
    (core, order)
}

struct BranchAndBound<'a> {
    adj: &'a Adjacency,
    best: Vec<usize>,
}

impl BranchAndBound<'_> {
    fn expand(&mut self, clique: &mut Vec<usize>, mut p: Bits) {
        let (order, colours) = colour_sort(self.adj, &p);
        for idx in (0..order.len()).rev() {
            if clique.len() + colours[idx] <= self.best.len() {
                return;
            }
            let v = order[idx];
            clique.push(v);
            let next = p.and(self.adj.row(v));
            if next.is_empty() {
                if clique.len() > self.best.len() {
                    self.best = clique.clone();
                }
            } else {
                self.expand(clique, next);
            }
            clique.pop();
            p.clear(v);
        }
    }
}

/// First clique of size `target` in lexicographic order, if any.
fn lex_first(adj: &Adjacency, clique: &mut Vec<usize>, mut p: Bits, target: usize) -> bool {
    if clique.len() == target {
        return true;
    }
    if clique.len() + p.count() < target || clique.len() + colour_bound(adj, &p) < target {
        return false;
    }
    while let Some(v) = p.first() {
        p.clear(v);
        clique.push(v);
        if lex_first(adj, clique, p.and(adj.row(v)), target) {
            return true;
        }
        clique.pop();
        if clique.len() + p.count() < target {
            return false;
        }
    }
    false
}

/// Exact maximum clique by colouring-bounded branch and bound over a
/// degeneracy ordering, followed by a lexicographic search for the smallest
/// maximum clique.
pub fn max_clique_simple(g: &CompatibilityGraph) -> CliqueResult {
    let n = g.n();
    if n == 0 {
        return CliqueResult {
            vertices: Vec::new(),
            is_certified_maximum: true,
        };
    }
    let words = g.words();
    let (core, removal) = degeneracy(g);

    // Relabel so the densest core comes first in bit order.
    let order: Vec<usize> = removal.iter().rev().copied().collect();
    let mut position = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    let mut rows = vec![0u64; n * words];
    for (new, &old) in order.iter().enumerate() {
        for u in Bits(g.row(old).to_vec()).iter() {
            let pu = position[u];
            rows[new * words + pu / 64] |= 1 << (pu % 64);
        }
    }
    let relabelled = Adjacency { words, rows };
    let mut all = Bits::empty(words);
    (0..n).for_each(|v| all.set(v));
    let mut bnb = BranchAndBound {
        adj: &relabelled,
        best: vec![0],
    };
    bnb.expand(&mut Vec::new(), all);
    let omega = bnb.best.len();

    // Only vertices with core number >= omega - 1 can sit in an omega-clique.
    let original = Adjacency {
        words,
        rows: (0..n).flat_map(|v| g.row(v).iter().copied()).collect(),
    };
    let mut candidates = Bits::empty(words);
    (0..n)
        .filter(|&v| core[v] + 1 >= omega)
        .for_each(|v| candidates.set(v));
    let mut clique = Vec::with_capacity(omega);
    let found = lex_first(&original, &mut clique, candidates, omega);
    debug_assert!(found);
    CliqueResult {
        vertices: clique,
        is_certified_maximum: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clique::is_clique;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complete_and_empty() {
        let k5 =
            CompatibilityGraph::from_edges(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))));
        assert_eq!(max_clique_simple(&k5).vertices, vec![0, 1, 2, 3, 4]);
        let e5 = CompatibilityGraph::new(5);
        assert_eq!(max_clique_simple(&e5).vertices, vec![0]);
        let e0 = CompatibilityGraph::new(0);
        assert!(max_clique_simple(&e0).vertices.is_empty());
    }

    #[test]
    fn lexicographic_tie_break() {
        // Two triangles {1,2,3} and {4,5,6}, plus isolated 0.
        let g = CompatibilityGraph::from_edges(7, [(4, 5), (5, 6), (4, 6), (1, 2), (2, 3), (1, 3)]);
        let r = max_clique_simple(&g);
        assert_eq!(r.vertices, vec![1, 2, 3]);
        assert!(r.is_certified_maximum);
    }

    #[test]
    fn crosses_word_boundary() {
        let members = [3, 63, 64, 65, 127, 128, 150];
        let mut edges = Vec::new();
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                edges.push((u, v));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..800 {
            let (u, v) = (rng.random_range(0..160), rng.random_range(0..160));
            edges.push((u, v));
        }
        let g = CompatibilityGraph::from_edges(160, edges);
        let r = max_clique_simple(&g);
        assert!(is_clique(&g, &r.vertices));
        assert!(r.vertices.len() >= members.len());
    }
}
