use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{uniform, Aabb, ScenarioConfig};
use crate::geometry::{
    add_noise, in_fov, project, Correspondence, Measurement, Point3, Pose, SonarConfig, WorldPoint,
};
use crate::pipeline::Case;
use crate::{Error, Result};

/// Consecutive rejected draws after which sampling gives up.
pub const MAX_REJECTIONS: usize = 100_000;

/// A plane in sonar coordinates with an orthonormal in-plane basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub anchor: Point3,
    pub normal: Point3,
    pub e1: Point3,
    pub e2: Point3,
    /// Angle to the sonar xy-plane.
    pub tilt: f64,
    pub azimuth: f64,
}

impl Plane {
    pub fn from_angles(anchor: Point3, tilt: f64, azimuth: f64) -> Self {
        let (st, ct) = tilt.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        let normal = Point3::new(st * ca, st * sa, ct);
        let e1 = Point3::new(-sa, ca, 0.0);
        let e2 = normal.cross(&e1);
        Self {
            anchor,
            normal,
            e1,
            e2,
            tilt,
            azimuth,
        }
    }

    pub fn point(&self, a: f64, b: f64) -> Point3 {
        self.anchor + a * self.e1 + b * self.e2
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        (p - self.anchor).dot(&self.normal)
    }
}

/// A generated scene. `sonar_points` are the noiseless sonar-frame points
/// behind each generated correspondence.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub corrs: Vec<Correspondence>,
    pub sonar_from_world: Pose,
    pub inlier_mask: Vec<bool>,
    pub sonar_points: Vec<Point3>,
    pub plane: Option<Plane>,
}

/// Where replacement world points are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutlierRegion {
    Box(Aabb),
    /// The part of the plane inside the box.
    PlaneInBox(Plane, Aabb),
}

fn rejection_sample<R, F>(rng: &mut R, mut draw: F) -> Result<Point3>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Option<Point3>,
{
    for _ in 0..MAX_REJECTIONS {
        if let Some(p) = draw(rng) {
            return Ok(p);
        }
    }
    Err(Error::BoxOutsideFov(MAX_REJECTIONS))
}

/// Half side of a square around `anchor` (in any plane through it) that
/// covers the whole box.
fn covering_half_side(anchor: &Point3, bbox: &Aabb) -> f64 {
    bbox.corners()
        .iter()
        .map(|c| (c - anchor).norm())
        .fold(0.0, f64::max)
}

fn sample_on_plane<R: Rng + ?Sized>(
    rng: &mut R,
    plane: &Plane,
    bbox: &Aabb,
    sonar: Option<&SonarConfig>,
) -> Result<Point3> {
    let l = covering_half_side(&plane.anchor, bbox);
    rejection_sample(rng, |rng| {
        let p = plane.point(uniform(rng, -l, l), uniform(rng, -l, l));
        (bbox.contains(&p) && sonar.is_none_or(|s| in_fov(&p, s))).then_some(p)
    })
}

pub fn sample_plane<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Plane {
    let [[x0, x1], [y0, y1]] = cfg.plane_anchor_box;
    let anchor = Point3::new(uniform(rng, x0, x1), uniform(rng, y0, y1), 0.0);
    let [t0, t1] = cfg.plane_tilt_range;
    let tilt = uniform(rng, t0, t1);
    let azimuth = uniform(rng, 0.0, std::f64::consts::TAU);
    Plane::from_angles(anchor, tilt, azimuth)
}

fn assemble<R: Rng + ?Sized>(
    points: Vec<Point3>,
    plane: Option<Plane>,
    cfg: &ScenarioConfig,
    generation: &SonarConfig,
    rng: &mut R,
) -> Result<Scene> {
    let mut meas: Vec<Measurement> = Vec::with_capacity(points.len());
    for p in &points {
        meas.push(add_noise(&project(p)?, generation, rng));
    }
    let world_from_sonar = Pose::random(rng, cfg.translation_half_extent);
    let corrs = points
        .iter()
        .zip(meas)
        .enumerate()
        .map(|(id, (p, m))| Correspondence {
            id,
            world: WorldPoint::from(world_from_sonar.transform(p)),
            meas: m,
        })
        .collect();
    Ok(Scene {
        corrs,
        sonar_from_world: world_from_sonar.inverse(),
        inlier_mask: vec![true; points.len()],
        sonar_points: points,
        plane,
    })
}

/// Points uniform in box ∩ FoV, noisy measurements, random rigid pose.
pub fn generate_scene_general<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scene> {
    let eff = cfg.effective()?;
    let mut points = Vec::with_capacity(cfg.n_points);
    for _ in 0..cfg.n_points {
        let p = rejection_sample(rng, |rng| {
            let p = eff.bbox.sample(rng);
            in_fov(&p, &eff.generation).then_some(p)
        })?;
        points.push(p);
    }
    assemble(points, None, cfg, &eff.generation, rng)
}

/// As [`generate_scene_general`] with all points on one random plane.
pub fn generate_scene_coplanar<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Scene> {
    let eff = cfg.effective()?;
    let plane = sample_plane(cfg, rng);
    let mut points = Vec::with_capacity(cfg.n_points);
    for _ in 0..cfg.n_points {
        points.push(sample_on_plane(
            rng,
            &plane,
            &eff.bbox,
            Some(&eff.generation),
        )?);
    }
    assemble(points, Some(plane), cfg, &eff.generation, rng)
}

pub fn generate_scene<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scene> {
    match cfg.case {
        Case::General => generate_scene_general(cfg, rng),
        Case::Coplanar => generate_scene_coplanar(cfg, rng),
    }
}

/// How the measurement of a replaced correspondence is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierModel {
    /// Noisy projection of an independent point uniform in box ∩ FoV.
    #[default]
    ProjectedBox,
    /// Uniform over `[near box range, far box corner] x [-theta_max, theta_max]`.
    UniformRangeBearing,
}

/// Replaces `floor(ratio * N)` correspondences, chosen without replacement,
/// by random pairs: a world point drawn from `region` and an unrelated
/// measurement drawn per `model`.
pub fn inject_outliers<R: Rng + ?Sized>(
    corrs: &[Correspondence],
    ratio: f64,
    region: &OutlierRegion,
    model: OutlierModel,
    world_from_sonar: &Pose,
    cfg: &SonarConfig,
    rng: &mut R,
) -> Result<(Vec<Correspondence>, Vec<bool>)> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::config(
            "outlier_ratio",
            format!("must lie in [0, 1), got {ratio}"),
        ));
    }
    let n = corrs.len();
    let k = ((ratio * n as f64) + 1e-9).floor() as usize;
    let mut out = corrs.to_vec();
    let mut mask = vec![true; n];
    let bbox = match region {
        OutlierRegion::Box(b) | OutlierRegion::PlaneInBox(_, b) => *b,
    };
    let (r_lo, r_hi) = (bbox.min_range(), bbox.max_range());
    for i in index::sample(rng, n, k).into_vec() {
        let p = match region {
            OutlierRegion::Box(b) => b.sample(rng),
            OutlierRegion::PlaneInBox(plane, b) => sample_on_plane(rng, plane, b, None)?,
        };
        let m = match model {
            OutlierModel::ProjectedBox => {
                let q = rejection_sample(rng, |rng| {
                    let q = bbox.sample(rng);
                    in_fov(&q, cfg).then_some(q)
                })?;
                add_noise(&project(&q)?, cfg, rng)
            }
            OutlierModel::UniformRangeBearing => Measurement::new(
                uniform(rng, r_lo, r_hi),
                uniform(rng, -cfg.theta_max, cfg.theta_max),
            )?,
        };
        out[i].world = WorldPoint::from(world_from_sonar.transform(&p));
        out[i].meas = m;
        mask[i] = false;
    }
    Ok((out, mask))
}
