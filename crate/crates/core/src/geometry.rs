//! Imaging model of a 2D forward-looking sonar.
//!
//! A sonar-frame point is described by range `r`, bearing `theta` and
//! elevation `phi` with
//!
//! ```text
//! x = r cos(phi) sin(theta)
//! y = r cos(phi) cos(theta)
//! z = r sin(phi)
//! ```
//!
//! Bearing is measured from the +y (boresight) axis towards +x. A measurement
//! keeps `(r, theta)` and loses `phi`.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3, Vector4};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRange(r));
        }
        Ok(Self { r, theta, phi })
    }

    pub fn from_cartesian(p: &Point3) -> Result<Self> {
        let r = p.norm();
        if !(r > 0.0) {
            return Err(Error::DegeneratePoint(r));
        }
        Ok(Self {
            r,
            theta: p.x.atan2(p.y),
            phi: (p.z / r).clamp(-1.0, 1.0).asin(),
        })
    }
}

/// A sonar return: range in meters and bearing in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub r: f64,
    pub theta: f64,
}

impl Measurement {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRange(r));
        }
        Ok(Self { r, theta })
    }

    /// Cartesian alias `[u, v] = [r sin(theta), r cos(theta)]`.
    pub fn to_cartesian(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.r * s, self.r * c]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn coords(&self) -> Point3 {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        (self.coords() - other.coords()).norm()
    }
}

impl From<Point3> for WorldPoint {
    fn from(p: Point3) -> Self {
        Self::new(p.x, p.y, p.z)
    }
}

/// Rigid transform `p' = R p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    rotation: Rotation3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose from a raw rotation matrix, checking orthonormality and
    /// handedness to 1e-10.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if !(ortho <= 1e-10) {
            return Err(Error::InvalidPose(format!(
                "R^T R deviates from I by {ortho:e}"
            )));
        }
        let det = rotation.determinant();
        if !((det - 1.0).abs() <= 1e-10) {
            return Err(Error::InvalidPose(format!("det(R) = {det}")));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPose("non-finite translation".into()));
        }
        Ok(Self {
            rotation: Rotation3::from_matrix_unchecked(rotation),
            translation,
        })
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: t,
        }
    }

    /// Uniformly random rotation (normalized Gaussian quaternion) and a
    /// translation uniform in `[-half_extent, half_extent]^3`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, half_extent: f64) -> Self {
        let q = loop {
            let v = Vector4::from_fn(|_, _| StandardNormal.sample(rng));
            let n: f64 = v.norm();
            if n > 1e-12 {
                break v / n;
            }
        };
        let quat =
            UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
        let translation = if half_extent > 0.0 {
            Vector3::from_fn(|_, _| rng.random_range(-half_extent..=half_extent))
        } else {
            Vector3::zeros()
        };
        Self {
            rotation: quat.to_rotation_matrix(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        self.rotation.matrix()
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform(&self, p: &Point3) -> Point3 {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rinv = self.rotation.inverse();
        Self {
            rotation: rinv,
            translation: -(rinv * self.translation),
        }
    }
}

/// Sensor description. Angles are radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SonarConfig {
    /// Symmetric bearing half field of view.
    pub theta_max: f64,
    /// Symmetric elevation half field of view.
    pub phi_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub sigma_r: f64,
    pub sigma_theta: f64,
    /// Range noise bound used by the noisy in-range interval.
    pub beta_r: f64,
    /// Bearing noise bound used by the noisy in-range interval.
    pub beta_theta: f64,
}

pub const MAX_PHI_MAX: f64 = 10.0 * std::f64::consts::PI / 180.0;

impl Default for SonarConfig {
    fn default() -> Self {
        let sigma_r = 0.005;
        let sigma_theta = 0.5_f64.to_radians();
        Self {
            theta_max: 65f64.to_radians(),
            phi_max: 7f64.to_radians(),
            r_min: 0.5,
            r_max: 5.0,
            sigma_r,
            sigma_theta,
            beta_r: 3.0 * sigma_r,
            beta_theta: 3.0 * sigma_theta,
        }
    }
}

impl SonarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_max > 0.0 && self.phi_max <= MAX_PHI_MAX + 1e-15) {
            return Err(Error::config(
                "phi_max",
                format!("must lie in (0, 10deg], got {} rad", self.phi_max),
            ));
        }
        if !(self.theta_max > 0.0 && self.theta_max < std::f64::consts::FRAC_PI_2) {
            return Err(Error::config(
                "theta_max",
                format!("must lie in (0, 90deg), got {} rad", self.theta_max),
            ));
        }
        if !(self.r_min > 0.0) {
            return Err(Error::config("r_min", "must be positive"));
        }
        if !(self.r_max > self.r_min) {
            return Err(Error::config("r_max", "must exceed r_min"));
        }
        for (field, v) in [
            ("sigma_r", self.sigma_r),
            ("sigma_theta", self.sigma_theta),
            ("beta_r", self.beta_r),
            ("beta_theta", self.beta_theta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(
                    field,
                    format!("must be a finite non-negative value, got {v}"),
                ));
            }
        }
        // beta_theta must stay much smaller than the bearing aperture.
        if self.beta_theta > 0.1 * 2.0 * self.theta_max {
            return Err(Error::config(
                "beta_theta",
                "must be much smaller than the bearing aperture",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub id: usize,
    pub world: WorldPoint,
    pub meas: Measurement,
}

pub fn spherical_to_cartesian(p: &SphericalPoint) -> Point3 {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    Vector3::new(p.r * cp * st, p.r * cp * ct, p.r * sp)
}

/// Projects a sonar-frame point to `(r, theta)`, discarding elevation.
pub fn project(p: &Point3) -> Result<Measurement> {
    let r = p.norm();
    if !(r > 0.0) {
        return Err(Error::DegeneratePoint(r));
    }
    Ok(Measurement {
        r,
        theta: p.x.atan2(p.y),
    })
}

/// `project(R p + t)` for a pose mapping world to sonar coordinates.
pub fn project_world(p: &WorldPoint, sonar_from_world: &Pose) -> Result<Measurement> {
    project(&sonar_from_world.transform(&p.coords()))
}

pub fn in_fov(p: &Point3, cfg: &SonarConfig) -> bool {
    let Ok(s) = SphericalPoint::from_cartesian(p) else {
        return false;
    };
    s.r >= cfg.r_min
        && s.r <= cfg.r_max
        && s.theta.abs() <= cfg.theta_max
        && s.phi.abs() <= cfg.phi_max
}

/// Adds Gaussian range and bearing noise. A non-positive noisy range is
/// redrawn.
pub fn add_noise<R: Rng + ?Sized>(m: &Measurement, cfg: &SonarConfig, rng: &mut R) -> Measurement {
    let r = loop {
        let eta: f64 = StandardNormal.sample(rng);
        let r = m.r + cfg.sigma_r * eta;
        if r > 0.0 {
            break r;
        }
    };
    let eps: f64 = StandardNormal.sample(rng);
    Measurement {
        r,
        theta: m.theta + cfg.sigma_theta * eps,
    }
}
