//! Pairwise length in-range test.
//!
//! Two measurements `(r_i, theta_i)` and `(r_j, theta_j)` whose elevations are
//! confined to `[-phi_max, phi_max]` admit 3D separations
//!
//! ```text
//! |p_ij|^2 = r_i^2 + r_j^2 - 2 r_i r_j A,
//! A = cos(dtheta) cos(phi_i) cos(phi_j) + sin(phi_i) sin(phi_j)
//! ```
//!
//! `A` is maximal (shortest edge) for `phi_i = phi_j = +-phi_max` and minimal
//! (longest edge) for `phi_i = -phi_j = +-phi_max`. Under bounded noise the
//! interval is widened by searching the bearing-noise window for the extreme
//! cosine and then taking the min/max distance between the two segments of
//! admissible range endpoints in the resulting virtual triangle.
//!
//! Cosine-like terms are carried as `sin^2(alpha / 2)` of the virtual angle to
//! avoid cancellation when the measurements nearly coincide.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::geometry::{Correspondence, Measurement, SonarConfig};
use crate::{Error, Result};

/// Floor for `r - beta_r` when the noise bound exceeds the range.
const MIN_RANGE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FeasibleInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment2D {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment2D {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        Self { a, b }
    }
}

/// `sin^2(alpha/2)` of the virtual angle whose cosine is
/// `(cos d - 1) cos^2 phi + 1`.
fn half_angle_sq_shortest(d: f64, phi_max: f64) -> f64 {
    let s = (0.5 * d).sin();
    let c = phi_max.cos();
    s * s * c * c
}

/// `sin^2(alpha/2)` of the virtual angle whose cosine is
/// `cos d - (1 + cos d) sin^2 phi`.
fn half_angle_sq_longest(d: f64, phi_max: f64) -> f64 {
    let (s, c) = (0.5 * d).sin_cos();
    let sp = phi_max.sin();
    (s * s + c * c * sp * sp).clamp(0.0, 1.0)
}

/// Third side of a triangle with sides `a`, `b` enclosing an angle whose
/// half-angle sine squared is `h`: `sqrt((a-b)^2 + 4ab h)`.
fn opposite_side(a: f64, b: f64, h: f64) -> f64 {
    let d = a - b;
    (d * d + 4.0 * a * b * h).max(0.0).sqrt()
}

fn check_ranges(mi: &Measurement, mj: &Measurement) -> Result<()> {
    for r in [mi.r, mj.r] {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRange(r));
        }
    }
    Ok(())
}

/// Noiseless feasible interval of the 3D edge length between two
/// measurements.
pub fn length_bounds_noiseless(
    mi: &Measurement,
    mj: &Measurement,
    phi_max: f64,
) -> Result<FeasibleInterval> {
    check_ranges(mi, mj)?;
    let d = mi.theta - mj.theta;
    Ok(FeasibleInterval {
        lo: opposite_side(mi.r, mj.r, half_angle_sq_shortest(d, phi_max)),
        hi: opposite_side(mi.r, mj.r, half_angle_sq_longest(d, phi_max)),
    })
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn point_segment_distance(p: [f64; 2], s: &Segment2D) -> f64 {
    let ab = sub(s.b, s.a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, s.a);
    }
    let t = (dot(sub(p, s.a), ab) / len2).clamp(0.0, 1.0);
    dist(p, [s.a[0] + t * ab[0], s.a[1] + t * ab[1]])
}

fn on_segment(p: [f64; 2], s: &Segment2D) -> bool {
    p[0] >= s.a[0].min(s.b[0])
        && p[0] <= s.a[0].max(s.b[0])
        && p[1] >= s.a[1].min(s.b[1])
        && p[1] <= s.a[1].max(s.b[1])
}

fn segments_intersect(s1: &Segment2D, s2: &Segment2D) -> bool {
    let d1 = cross(sub(s2.b, s2.a), sub(s1.a, s2.a));
    let d2 = cross(sub(s2.b, s2.a), sub(s1.b, s2.a));
    let d3 = cross(sub(s1.b, s1.a), sub(s2.a, s1.a));
    let d4 = cross(sub(s1.b, s1.a), sub(s2.b, s1.a));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(s1.a, s2))
        || (d2 == 0.0 && on_segment(s1.b, s2))
        || (d3 == 0.0 && on_segment(s2.a, s1))
        || (d4 == 0.0 && on_segment(s2.b, s1))
}

/// Exact minimum Euclidean distance between two closed segments.
pub fn segment_min_distance(s1: &Segment2D, s2: &Segment2D) -> f64 {
    if segments_intersect(s1, s2) {
        return 0.0;
    }
    point_segment_distance(s1.a, s2)
        .min(point_segment_distance(s1.b, s2))
        .min(point_segment_distance(s2.a, s1))
        .min(point_segment_distance(s2.b, s1))
}

/// Maximum distance between two closed segments, attained at endpoints.
pub fn segment_max_distance(s1: &Segment2D, s2: &Segment2D) -> f64 {
    [s1.a, s1.b]
        .into_iter()
        .flat_map(|p| [s2.a, s2.b].map(|q| dist(p, q)))
        .fold(0.0, f64::max)
}

/// Segments of admissible far endpoints along two rays separated by the
/// virtual angle `2 asin(sqrt(h))`.
fn virtual_triangle_segments(ri: f64, rj: f64, beta_r: f64, h: f64) -> (Segment2D, Segment2D) {
    let alpha = 2.0 * h.sqrt().min(1.0).asin();
    let (s, c) = alpha.sin_cos();
    let span = |r: f64| ((r - beta_r).max(MIN_RANGE), r + beta_r);
    let (i0, i1) = span(ri);
    let (j0, j1) = span(rj);
    (
        Segment2D::new([i0, 0.0], [i1, 0.0]),
        Segment2D::new([j0 * c, j0 * s], [j1 * c, j1 * s]),
    )
}

/// Feasible interval widened for bounded range/bearing noise
/// (`|eta| <= beta_r`, `|eps| <= beta_theta`).
pub fn length_bounds_noisy(
    mi: &Measurement,
    mj: &Measurement,
    cfg: &SonarConfig,
) -> Result<FeasibleInterval> {
    check_ranges(mi, mj)?;
    let delta = mi.theta - mj.theta;
    let slack = 2.0 * cfg.beta_theta;
    let reach = delta.abs() + slack;
    if !(reach < PI) {
        return Err(Error::BearingSeparation(reach));
    }
    let (d_lo, d_hi) = (delta - slack, delta + slack);
    // Largest cosine: the window value closest to zero.
    let nearest = if d_lo <= 0.0 && d_hi >= 0.0 {
        0.0
    } else if d_lo.abs() < d_hi.abs() {
        d_lo
    } else {
        d_hi
    };
    // Smallest cosine: the window endpoint farthest from zero.
    let farthest = if d_lo.abs() > d_hi.abs() { d_lo } else { d_hi };

    let h_lo = half_angle_sq_shortest(nearest, cfg.phi_max);
    let h_hi = half_angle_sq_longest(farthest, cfg.phi_max);

    let (a, b) = virtual_triangle_segments(mi.r, mj.r, cfg.beta_r, h_lo);
    let lo = segment_min_distance(&a, &b);
    let (a, b) = virtual_triangle_segments(mi.r, mj.r, cfg.beta_r, h_hi);
    let hi = segment_max_distance(&a, &b);
    Ok(FeasibleInterval { lo, hi })
}

/// True when the world-point distance lies inside the noisy feasible
/// interval. Pairs outside the validity domain of the noisy bounds are
/// accepted.
pub fn in_range_test(ci: &Correspondence, cj: &Correspondence, cfg: &SonarConfig) -> bool {
    match length_bounds_noisy(&ci.meas, &cj.meas, cfg) {
        Ok(f) => f.contains(ci.world.distance(&cj.world)),
        Err(_) => true,
    }
}

/// Undirected simple graph stored as adjacency bit rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityGraph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl CompatibilityGraph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            adj: vec![0; n * words],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (i, j) in edges {
            g.add_edge(i, j);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `{i, j}`; self-loops are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i < self.n && j < self.n, "vertex out of range");
        if i == j {
            return;
        }
        self.adj[i * self.words + j / 64] |= 1 << (j % 64);
        self.adj[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Neighborhood of `v` as a bit row of `words()` 64-bit words.
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| {
                ((i + 1)..self.n)
                    .filter(move |&j| self.has_edge(i, j))
                    .map(move |j| (i, j))
            })
            .collect()
    }
}

/// Builds the pairwise compatibility graph. Rows are evaluated in parallel
/// on the current rayon pool; the edge set does not depend on scheduling.
pub fn build_pairwise_graph(corrs: &[Correspondence], cfg: &SonarConfig) -> CompatibilityGraph {
    let n = corrs.len();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| in_range_test(&corrs[i], &corrs[j], cfg))
                .collect()
        })
        .collect();
    let mut g = CompatibilityGraph::new(n);
    for (i, row) in rows.into_iter().enumerate() {
        for j in row {
            g.add_edge(i, j);
        }
    }
    g
}
