//! Four-point coplanarity test.
//!
//! Under the orthographic approximation (`cos(phi) ~ 1`) a sonar images a
//! world plane through a 2D affine map. For four correct correspondences on a
//! common plane, the affine map fitted on any three must therefore predict
//! the fourth. With `b = P^-1 [p4; 1]` the affine coefficients of `p4` with
//! respect to `p1..p3` and `b4 = -1`, the residual is
//!
//! ```text
//! res = sum_i b_i [r_i sin(theta_i), r_i cos(theta_i)]
//! ```
//!
//! whose first-order covariance diagonal is
//! `sum_i b_i^2 (r_i^2 cos^2 sigma_theta^2 + sin^2 sigma_r^2)` (and the same
//! with sine and cosine swapped for the second row). The four leave-one-out
//! normalized squared residuals are summed and gated against the
//! chi-squared(8) quantile.
//!
//! The unknown elevation smears the orthographic range `r cos(phi)`; this is
//! folded into an effective range deviation by [`r_approx`].

use std::collections::HashSet;

use nalgebra::{Matrix2x3, Matrix2x4, Matrix3, Vector3};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::geometry::{Correspondence, Measurement, Point3, SonarConfig, WorldPoint};
use crate::in_range::{build_pairwise_graph, CompatibilityGraph};
use crate::{Error, Result};

/// A triple is collinear when its smallest height is below this fraction of
/// its longest side.
pub const COLLINEAR_RATIO: f64 = 1e-6;
/// Maximum distance (m) of a point from the plane through the other three.
pub const COPLANAR_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_P_VALUE: f64 = 0.01;

/// Gaussian surrogate for the range observed under an unknown elevation
/// uniform in `[-phi_max, phi_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RApprox {
    pub mu_est: f64,
    pub sigma_est: f64,
}

/// `Var(cos(phi))` for `phi ~ U(-a, a)`, i.e.
/// `1/2 + sin(2a)/(4a) - (sin(a)/a)^2`. The closed form cancels badly for
/// small apertures, so a series is used there.
fn cos_variance(a: f64) -> f64 {
    if a < 0.1 {
        let a2 = a * a;
        let a4 = a2 * a2;
        a4 * (1.0 / 45.0 - a2 / 315.0 + a4 / 4725.0 - 4.0 * a4 * a2 / 467_775.0)
    } else {
        let sinc = a.sin() / a;
        0.5 + (2.0 * a).sin() / (4.0 * a) - sinc * sinc
    }
}

/// Moments of the elevation-marginalized range, evaluated at the observed
/// range `r_star` with the range deviation from `cfg.sigma_r`.
pub fn r_approx(r_star: f64, cfg: &SonarConfig) -> Result<RApprox> {
    if !(r_star > 0.0) {
        return Err(Error::NonPositiveRange(r_star));
    }
    let a = cfg.phi_max;
    if !(a > 0.0) {
        return Err(Error::config("phi_max", "must be positive"));
    }
    if a < 1e-6 {
        return Ok(RApprox {
            mu_est: r_star,
            sigma_est: cfg.sigma_r,
        });
    }
    let mu_est = r_star * a.sin() / a;
    let var = cfg.sigma_r * cfg.sigma_r + mu_est * mu_est * cos_variance(a);
    Ok(RApprox {
        mu_est,
        sigma_est: var.sqrt(),
    })
}

/// Orthonormal 2D chart on the plane through three points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneChart {
    pub origin: Point3,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
}

impl PlaneChart {
    pub fn through(p1: &Point3, p2: &Point3, p3: &Point3) -> Result<Self> {
        check_noncollinear(p1, p2, p3)?;
        let e1 = (p2 - p1).normalize();
        let normal = (p2 - p1).cross(&(p3 - p1)).normalize();
        Ok(Self {
            origin: *p1,
            e1,
            e2: normal.cross(&e1),
        })
    }

    pub fn coords(&self, p: &Point3) -> [f64; 2] {
        let d = p - self.origin;
        [d.dot(&self.e1), d.dot(&self.e2)]
    }
}

/// Affine map from plane-chart coordinates `[c; 1]` to measurement
/// coordinates `[u, v]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap2D {
    pub chart: PlaneChart,
    pub matrix: Matrix2x3<f64>,
}

impl AffineMap2D {
    pub fn apply(&self, p: &WorldPoint) -> [f64; 2] {
        let [a, b] = self.chart.coords(&p.coords());
        let out = self.matrix * Vector3::new(a, b, 1.0);
        [out[0], out[1]]
    }

    /// The same map expressed on homogeneous world coordinates `[p; 1]`.
    pub fn world_matrix(&self) -> Matrix2x4<f64> {
        let lin = self.matrix.fixed_view::<2, 2>(0, 0);
        let basis = nalgebra::Matrix3x2::from_columns(&[self.chart.e1, self.chart.e2]);
        let rot = lin * basis.transpose();
        let offset = self.matrix.column(2) - rot * self.chart.origin;
        let mut out = Matrix2x4::zeros();
        out.fixed_view_mut::<2, 3>(0, 0).copy_from(&rot);
        out.set_column(3, &offset);
        out
    }
}

fn check_noncollinear(p1: &Point3, p2: &Point3, p3: &Point3) -> Result<Vector3<f64>> {
    let n = (p2 - p1).cross(&(p3 - p1));
    let longest2 = (p2 - p1)
        .norm_squared()
        .max((p3 - p1).norm_squared())
        .max((p3 - p2).norm_squared());
    // smallest height = |n| / longest side
    if !(n.norm() >= COLLINEAR_RATIO * longest2) || longest2 == 0.0 {
        return Err(Error::CollinearTriple);
    }
    Ok(n)
}

/// Fits the affine map sending the three world points to the three
/// measurement positions `[u, v]`.
pub fn fit_affine(world: [&WorldPoint; 3], meas: [[f64; 2]; 3]) -> Result<AffineMap2D> {
    let [p1, p2, p3] = world.map(|p| p.coords());
    let chart = PlaneChart::through(&p1, &p2, &p3)?;
    let c = [chart.coords(&p1), chart.coords(&p2), chart.coords(&p3)];
    let p = Matrix3::new(
        c[0][0], c[1][0], c[2][0], c[0][1], c[1][1], c[2][1], 1.0, 1.0, 1.0,
    );
    let pinv = p.try_inverse().ok_or(Error::CollinearTriple)?;
    let m = Matrix2x3::new(
        meas[0][0], meas[1][0], meas[2][0], meas[0][1], meas[1][1], meas[2][1],
    );
    Ok(AffineMap2D {
        chart,
        matrix: m * pinv,
    })
}

/// Affine coefficients of `p4` with respect to `p1..p3`; `b4 = -1` is
/// implicit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaryCoeffs {
    pub b: [f64; 3],
}

impl BaryCoeffs {
    /// `[b1, b2, b3, -1]`.
    pub fn extended(&self) -> [f64; 4] {
        [self.b[0], self.b[1], self.b[2], -1.0]
    }
}

/// Affine coefficients of the in-plane projection of `p4`.
pub fn bary_coeffs(
    p1: &WorldPoint,
    p2: &WorldPoint,
    p3: &WorldPoint,
    p4: &WorldPoint,
) -> Result<BaryCoeffs> {
    let [a, b, c, q] = [p1, p2, p3, p4].map(|p| p.coords());
    let n = check_noncollinear(&a, &b, &c)?;
    Ok(BaryCoeffs {
        b: barycentric(&a, &b, &c, &q, &n),
    })
}

/// Signed-area ratios. Components of `q` along `n` drop out of each
/// triple product, so an off-plane `q` yields the coefficients of its
/// projection.
#[inline]
fn barycentric(a: &Point3, b: &Point3, c: &Point3, q: &Point3, n: &Vector3<f64>) -> [f64; 3] {
    let inv = 1.0 / n.norm_squared();
    let (qa, qb, qc) = (a - q, b - q, c - q);
    [
        qb.cross(&qc).dot(n) * inv,
        qc.cross(&qa).dot(n) * inv,
        qa.cross(&qb).dot(n) * inv,
    ]
}

/// Per-correspondence terms reused by every tuple the point takes part in.
#[derive(Clone, Copy, Debug)]
struct PointTerms {
    p: Point3,
    uv: [f64; 2],
    /// Variance contributions of this point to the u and v residual rows
    /// before scaling by `b_i^2`.
    var: [f64; 2],
}

impl PointTerms {
    fn new(
        world: &WorldPoint,
        m: &Measurement,
        cfg: &SonarConfig,
        use_r_approx: bool,
    ) -> Result<Self> {
        let sigma_r = if use_r_approx {
            r_approx(m.r, cfg)?.sigma_est
        } else {
            cfg.sigma_r
        };
        let (s, c) = m.theta.sin_cos();
        let bearing = m.r * m.r * cfg.sigma_theta * cfg.sigma_theta;
        let range = sigma_r * sigma_r;
        Ok(Self {
            p: world.coords(),
            uv: [m.r * s, m.r * c],
            var: [
                bearing * c * c + range * s * s,
                bearing * s * s + range * c * c,
            ],
        })
    }
}

/// Residual of the fitted affine map at the fourth correspondence and the
/// diagonal of its first-order covariance.
pub fn residual_and_variance(
    b: &BaryCoeffs,
    meas: &[Measurement; 4],
    cfg: &SonarConfig,
    use_r_approx: bool,
) -> Result<([f64; 2], [f64; 2])> {
    let origin = WorldPoint::new(0.0, 0.0, 0.0);
    let coeffs = b.extended();
    let mut res = [0.0; 2];
    let mut var = [0.0; 2];
    for (m, c) in meas.iter().zip(coeffs) {
        let t = PointTerms::new(&origin, m, cfg, use_r_approx)?;
        for k in 0..2 {
            res[k] += c * t.uv[k];
            var[k] += c * c * t.var[k];
        }
    }
    for k in 0..2 {
        if var[k] == 0.0 && res[k] != 0.0 {
            return Err(Error::DegenerateVariance { residual: res[k] });
        }
    }
    Ok((res, var))
}

fn normalized_sq(res: [f64; 2], var: [f64; 2]) -> Option<f64> {
    let mut s = 0.0;
    for k in 0..2 {
        if var[k] > 0.0 {
            s += res[k] * res[k] / var[k];
        } else if res[k] != 0.0 {
            return None;
        }
    }
    Some(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degeneracy {
    Collinear,
    NonCoplanar,
    ZeroVariance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Pass { statistic: f64 },
    Fail { statistic: f64 },
    Degenerate(Degeneracy),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

/// Summed leave-one-out statistic. Returns as soon as the running sum
/// exceeds `limit` (the partial sum is then a lower bound).
#[inline]
fn tuple_statistic(t: [&PointTerms; 4], limit: f64) -> std::result::Result<f64, Degeneracy> {
    const OTHERS: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    let mut sum = 0.0;
    for (k, [a, b, c]) in OTHERS.iter().copied().enumerate() {
        let (pa, pb, pc, pk) = (&t[a].p, &t[b].p, &t[c].p, &t[k].p);
        let (ab, ac, bc) = (pb - pa, pc - pa, pc - pb);
        let n = ab.cross(&ac);
        let nn = n.norm();
        let longest2 = ab
            .norm_squared()
            .max(ac.norm_squared())
            .max(bc.norm_squared());
        if !(nn >= COLLINEAR_RATIO * longest2) || longest2 == 0.0 {
            return Err(Degeneracy::Collinear);
        }
        if (pk - pa).dot(&n).abs() > COPLANAR_TOLERANCE * nn {
            return Err(Degeneracy::NonCoplanar);
        }
        let w = barycentric(pa, pb, pc, pk, &n);
        let mut res = [-t[k].uv[0], -t[k].uv[1]];
        let mut var = t[k].var;
        for (wi, ti) in w.iter().zip([t[a], t[b], t[c]]) {
            for d in 0..2 {
                res[d] += wi * ti.uv[d];
                var[d] += wi * wi * ti.var[d];
            }
        }
        sum += normalized_sq(res, var).ok_or(Degeneracy::ZeroVariance)?;
        if sum > limit {
            return Ok(sum);
        }
    }
    Ok(sum)
}

/// Upper `p_value` tail quantile of the chi-squared distribution.
pub fn chi2_threshold(dof: u32, p_value: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - p_value)
}

/// Threshold on the summed statistic of a 4-tuple.
pub fn tuple_threshold(p_value: f64) -> f64 {
    chi2_threshold(8, p_value)
}

fn tuple_terms(
    tuple: [&Correspondence; 4],
    cfg: &SonarConfig,
    use_r_approx: bool,
) -> Result<[PointTerms; 4]> {
    let mut out = [PointTerms {
        p: Point3::zeros(),
        uv: [0.0; 2],
        var: [0.0; 2],
    }; 4];
    for (o, c) in out.iter_mut().zip(tuple) {
        *o = PointTerms::new(&c.world, &c.meas, cfg, use_r_approx)?;
    }
    Ok(out)
}

/// Summed chi-squared statistic over the four leave-one-out fits.
pub fn coplanarity_statistic(
    tuple: [&Correspondence; 4],
    cfg: &SonarConfig,
    use_r_approx: bool,
) -> std::result::Result<f64, Degeneracy> {
    let t = tuple_terms(tuple, cfg, use_r_approx).map_err(|_| Degeneracy::ZeroVariance)?;
    tuple_statistic([&t[0], &t[1], &t[2], &t[3]], f64::INFINITY)
}

pub fn coplanarity_test(
    tuple: [&Correspondence; 4],
    cfg: &SonarConfig,
    use_r_approx: bool,
    p_value: f64,
) -> Verdict {
    match coplanarity_statistic(tuple, cfg, use_r_approx) {
        Ok(s) if s <= tuple_threshold(p_value) => Verdict::Pass { statistic: s },
        Ok(s) => Verdict::Fail { statistic: s },
        Err(d) => Verdict::Degenerate(d),
    }
}

/// 4-uniform hypergraph over correspondence indices.
#[derive(Clone, Debug, Default)]
pub struct Hypergraph4 {
    n: usize,
    edges: Vec<[u32; 4]>,
    index: HashSet<[u32; 4]>,
}

impl Hypergraph4 {
    /// Builds a hypergraph; each tuple is sorted and duplicates dropped.
    /// Panics on out-of-range or repeated vertices.
    pub fn new(n: usize, edges: impl IntoIterator<Item = [usize; 4]>) -> Self {
        let mut sorted: Vec<[u32; 4]> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                assert!(e[3] < n, "vertex out of range");
                assert!(
                    e[0] < e[1] && e[1] < e[2] && e[2] < e[3],
                    "repeated vertex in hyperedge"
                );
                e.map(|v| v as u32)
            })
            .collect();
        sorted.sort_unstable();
        sorted.dedup();
        Self::from_sorted(n, sorted)
    }

    fn from_sorted(n: usize, edges: Vec<[u32; 4]>) -> Self {
        let index = edges.iter().copied().collect();
        Self { n, edges, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Hyperedges in lexicographic order.
    pub fn edges(&self) -> &[[u32; 4]] {
        &self.edges
    }

    /// Membership test for an arbitrary ordering of four vertices.
    pub fn contains(&self, mut e: [usize; 4]) -> bool {
        e.sort_unstable();
        if e[3] >= self.n {
            return false;
        }
        self.index.contains(&e.map(|v| v as u32))
    }

    pub fn with_added(&self, e: [usize; 4]) -> Self {
        Self::new(
            self.n,
            self.edges
                .iter()
                .map(|x| x.map(|v| v as usize))
                .chain(std::iter::once(e)),
        )
    }
}

/// Runs the coplanarity test over every 4-tuple. With the prefilter, a
/// tuple is kept only if all six of its pairs also pass the in-range test.
/// Work is split by leading index on the current rayon pool; the result is
/// independent of the split.
pub fn build_hypergraph(
    corrs: &[Correspondence],
    cfg: &SonarConfig,
    use_r_approx: bool,
    p_value: f64,
    with_in_range_prefilter: bool,
) -> Result<Hypergraph4> {
    let n = corrs.len();
    let terms = corrs
        .iter()
        .map(|c| PointTerms::new(&c.world, &c.meas, cfg, use_r_approx))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Option<CompatibilityGraph> =
        with_in_range_prefilter.then(|| build_pairwise_graph(corrs, cfg));
    let threshold = tuple_threshold(p_value);
    let pair_ok = |i: usize, j: usize| pairs.as_ref().is_none_or(|g| g.has_edge(i, j));

    let rows: Vec<Vec<[u32; 4]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in (i + 1)..n {
                if !pair_ok(i, j) {
                    continue;
                }
                for k in (j + 1)..n {
                    if !(pair_ok(i, k) && pair_ok(j, k)) {
                        continue;
                    }
                    for l in (k + 1)..n {
                        if !(pair_ok(i, l) && pair_ok(j, l) && pair_ok(k, l)) {
                            continue;
                        }
                        let quad = [&terms[i], &terms[j], &terms[k], &terms[l]];
                        if matches!(tuple_statistic(quad, threshold), Ok(s) if s <= threshold) {
                            out.push([i as u32, j as u32, k as u32, l as u32]);
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(Hypergraph4::from_sorted(n, rows.concat()))
}
