//! Simulation harness: synthetic scenes, outlier injection, experiment
//! groups, metrics, the range-approximation study and timing runs.

mod bench;
mod experiment;
mod rdist;
mod scene;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coplanarity::DEFAULT_P_VALUE;
use crate::geometry::{Point3, SonarConfig};
use crate::pipeline::{Case, RejectOptions};
use crate::{Error, Result};

pub use bench::{loglog_slope, timing_benchmark, TimingRow};
pub use experiment::{
    compute_metrics, run_experiment, run_trial, CellSummary, ExperimentGrid, ResultsTable, Stats,
    TrialMetrics, TrialRow,
};
pub use rdist::{r_distribution_study, RDistStudy, RDIST_BINS, RDIST_MIN_SAMPLES};
pub use scene::{
    generate_scene, generate_scene_coplanar, generate_scene_general, inject_outliers, sample_plane,
    OutlierModel, OutlierRegion, Plane, Scene, MAX_REJECTIONS,
};

/// Axis-aligned box in sonar coordinates (m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        for k in 0..3 {
            if !(min[k].is_finite() && max[k].is_finite() && min[k] < max[k]) {
                return Err(Error::config(
                    "box",
                    format!("axis {k}: need min < max, got [{}, {}]", min[k], max[k]),
                ));
            }
        }
        Ok(Self { min, max })
    }

    /// The box used throughout the simulations.
    pub fn reference() -> Self {
        Self {
            min: [-0.6, 1.6, -0.3],
            max: [0.6, 2.8, 0.3],
        }
    }

    pub fn center(&self) -> Point3 {
        Point3::from_fn(|k, _| 0.5 * (self.min[k] + self.max[k]))
    }

    pub fn extent(&self) -> [f64; 3] {
        std::array::from_fn(|k| self.max[k] - self.min[k])
    }

    /// Scales the edge lengths by `s` about the center.
    pub fn scaled(&self, s: f64) -> Self {
        let c = self.center();
        let e = self.extent();
        Self {
            min: std::array::from_fn(|k| c[k] - 0.5 * s * e[k]),
            max: std::array::from_fn(|k| c[k] + 0.5 * s * e[k]),
        }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point3 {
        Point3::from_fn(|k, _| uniform(rng, self.min[k], self.max[k]))
    }

    pub fn corners(&self) -> [Point3; 8] {
        std::array::from_fn(|i| {
            Point3::new(
                if i & 1 == 0 { self.min[0] } else { self.max[0] },
                if i & 2 == 0 { self.min[1] } else { self.max[1] },
                if i & 4 == 0 { self.min[2] } else { self.max[2] },
            )
        })
    }

    /// Distance from the sonar origin to the nearest point of the box.
    pub fn min_range(&self) -> f64 {
        Point3::from_fn(|k, _| 0f64.clamp(self.min[k], self.max[k])).norm()
    }

    /// Distance from the sonar origin to the farthest corner.
    pub fn max_range(&self) -> f64 {
        self.corners().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Experiment groups. The first five apply to the general case, the rest
/// (and `Standard`) to the coplanar case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Standard,
    ReducedBound,
    ExpandedBound,
    HalfScale,
    QuarterScale,
    Underestimated,
    Overestimated,
    NoApprox,
    WithInRange,
}

impl Group {
    pub const ALL: [Group; 9] = [
        Group::Standard,
        Group::ReducedBound,
        Group::ExpandedBound,
        Group::HalfScale,
        Group::QuarterScale,
        Group::Underestimated,
        Group::Overestimated,
        Group::NoApprox,
        Group::WithInRange,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Group::Standard => "standard",
            Group::ReducedBound => "reduced_bound",
            Group::ExpandedBound => "expanded_bound",
            Group::HalfScale => "half_scale",
            Group::QuarterScale => "quarter_scale",
            Group::Underestimated => "underestimated",
            Group::Overestimated => "overestimated",
            Group::NoApprox => "no_approx",
            Group::WithInRange => "with_in_range",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL
            .into_iter()
            .find(|g| g.name() == key)
            .ok_or_else(|| Error::config("group", format!("unknown group {s:?}")))
    }

    pub fn valid_for(&self, case: Case) -> bool {
        match self {
            Group::Standard => true,
            Group::ReducedBound | Group::ExpandedBound | Group::HalfScale | Group::QuarterScale => {
                case == Case::General
            }
            Group::Underestimated | Group::Overestimated | Group::NoApprox | Group::WithInRange => {
                case == Case::Coplanar
            }
        }
    }

    pub fn for_case(case: Case) -> Vec<Group> {
        Self::ALL
            .into_iter()
            .filter(|g| g.valid_for(case))
            .collect()
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One simulation scenario. Angles are radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub case: Case,
    #[serde(rename = "box")]
    pub bbox: Aabb,
    pub n_points: usize,
    pub outlier_ratio: f64,
    pub group: Group,
    pub trials: usize,
    pub seed: u64,
    /// Ground-truth sensor; its beta fields are the Standard bounds.
    pub sonar: SonarConfig,
    /// `[[x_lo, x_hi], [y_lo, y_hi]]` for the plane anchor (at z = 0).
    pub plane_anchor_box: [[f64; 2]; 2],
    /// Angle between the plane and the sonar xy-plane.
    pub plane_tilt_range: [f64; 2],
    #[serde(default)]
    pub outlier_model: OutlierModel,
    pub p_value: f64,
    /// Pose translations are uniform in `[-t, t]^3`.
    pub translation_half_extent: f64,
}

impl ScenarioConfig {
    pub fn new(case: Case) -> Self {
        Self {
            case,
            bbox: Aabb::reference(),
            n_points: 100,
            outlier_ratio: 0.8,
            group: Group::Standard,
            trials: 500,
            seed: 0,
            sonar: SonarConfig::default(),
            plane_anchor_box: [[-0.15, 0.15], [2.05, 2.35]],
            plane_tilt_range: [5f64.to_radians(), 70f64.to_radians()],
            outlier_model: OutlierModel::default(),
            p_value: DEFAULT_P_VALUE,
            translation_half_extent: 5.0,
        }
    }

    pub fn general() -> Self {
        Self::new(Case::General)
    }

    pub fn coplanar() -> Self {
        Self::new(Case::Coplanar)
    }

    pub fn validate(&self) -> Result<()> {
        self.sonar.validate()?;
        Aabb::new(self.bbox.min, self.bbox.max)?;
        if !self.group.valid_for(self.case) {
            return Err(Error::config(
                "group",
                format!(
                    "{} is not available for the {} case",
                    self.group,
                    self.case.name()
                ),
            ));
        }
        if !(self.outlier_ratio >= 0.0 && self.outlier_ratio < 1.0) {
            return Err(Error::config(
                "outlier_ratio",
                format!("must lie in [0, 1), got {}", self.outlier_ratio),
            ));
        }
        if self.n_points == 0 {
            return Err(Error::config("n_points", "must be positive"));
        }
        if !(self.p_value > 0.0 && self.p_value < 1.0) {
            return Err(Error::config(
                "p_value",
                format!("must lie in (0, 1), got {}", self.p_value),
            ));
        }
        if !(self.translation_half_extent >= 0.0 && self.translation_half_extent.is_finite()) {
            return Err(Error::config(
                "translation_half_extent",
                "must be finite and non-negative",
            ));
        }
        let [[x0, x1], [y0, y1]] = self.plane_anchor_box;
        if !(x0 <= x1 && y0 <= y1) {
            return Err(Error::config("plane_anchor_box", "bounds must be ordered"));
        }
        let [t0, t1] = self.plane_tilt_range;
        if !(0.0 <= t0 && t0 <= t1 && t1 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::config(
                "plane_tilt_range",
                "must be an ordered range within [0, 90deg)",
            ));
        }
        Ok(())
    }

    /// Effective parameters of this scenario's group.
    pub fn effective(&self) -> Result<EffectiveParams> {
        apply_group(self)
    }
}

/// Parameters after applying an experiment group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// Noise used to generate measurements.
    pub generation: SonarConfig,
    /// Noise model assumed by the compatibility tests.
    pub estimation: SonarConfig,
    pub bbox: Aabb,
    pub use_r_approx: bool,
    pub with_in_range: bool,
    pub p_value: f64,
}

impl EffectiveParams {
    pub fn reject_options(&self, case: Case) -> RejectOptions {
        RejectOptions {
            case,
            sonar: self.estimation,
            use_r_approx: self.use_r_approx,
            p_value: self.p_value,
            with_in_range: self.with_in_range,
        }
    }
}

pub fn apply_group(cfg: &ScenarioConfig) -> Result<EffectiveParams> {
    cfg.validate()?;
    let generation = cfg.sonar;
    let mut p = EffectiveParams {
        generation,
        estimation: generation,
        bbox: cfg.bbox,
        use_r_approx: true,
        with_in_range: false,
        p_value: cfg.p_value,
    };
    let scale_bounds = |s: &mut SonarConfig, k: f64| {
        s.beta_r *= k;
        s.beta_theta *= k;
    };
    let scale_sigmas = |s: &mut SonarConfig, k: f64| {
        s.sigma_r *= k;
        s.sigma_theta *= k;
        s.beta_r *= k;
        s.beta_theta *= k;
    };
    match cfg.group {
        Group::Standard => {}
        Group::ReducedBound => scale_bounds(&mut p.estimation, 1.0 / 3.0),
        Group::ExpandedBound => scale_bounds(&mut p.estimation, 3.0),
        Group::HalfScale => p.bbox = cfg.bbox.scaled(0.5),
        Group::QuarterScale => p.bbox = cfg.bbox.scaled(0.25),
        Group::Underestimated => scale_sigmas(&mut p.estimation, 1.0 / 3.0),
        Group::Overestimated => scale_sigmas(&mut p.estimation, 3.0),
        Group::NoApprox => p.use_r_approx = false,
        Group::WithInRange => p.with_in_range = true,
    }
    Ok(p)
}

/// Independent, reproducible stream for one trial.
pub fn trial_rng(master_seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial as u64);
    rng
}
