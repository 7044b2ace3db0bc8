use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    apply_group, generate_scene, inject_outliers, trial_rng, Group, OutlierRegion, ScenarioConfig,
};
use crate::pipeline::{reject_outliers, Case};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub tpr: f64,
    pub fpr: f64,
    /// `None` when nothing was kept.
    pub ir: Option<f64>,
    pub n_est_inliers: usize,
    pub time_test_ms: f64,
    pub time_clique_ms: f64,
    pub time_total_ms: f64,
}

/// TPR, FPR, IR and the estimate size of `estimated` against `mask`. FPR is
/// 0 when there are no outliers.
pub fn compute_metrics(estimated: &[usize], mask: &[bool]) -> (f64, f64, Option<f64>, usize) {
    let n_in = mask.iter().filter(|&&m| m).count();
    let n_out = mask.len() - n_in;
    let tp = estimated.iter().filter(|&&i| mask[i]).count();
    let fp = estimated.len() - tp;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let ir = (!estimated.is_empty()).then(|| tp as f64 / estimated.len() as f64);
    (ratio(tp, n_in), ratio(fp, n_out), ir, estimated.len())
}

/// Scene, outliers, compatibility graph, clique, metrics.
pub fn run_trial<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<TrialMetrics> {
    let eff = apply_group(cfg)?;
    let scene = generate_scene(cfg, rng)?;
    let region = match scene.plane {
        Some(plane) => OutlierRegion::PlaneInBox(plane, eff.bbox),
        None => OutlierRegion::Box(eff.bbox),
    };
    let world_from_sonar = scene.sonar_from_world.inverse();
    let (corrs, mask) = inject_outliers(
        &scene.corrs,
        cfg.outlier_ratio,
        &region,
        cfg.outlier_model,
        &world_from_sonar,
        &eff.generation,
        rng,
    )?;
    let rej = reject_outliers(&corrs, &eff.reject_options(cfg.case))?;
    let (tpr, fpr, ir, n_est_inliers) = compute_metrics(&rej.inliers, &mask);
    Ok(TrialMetrics {
        tpr,
        fpr,
        ir,
        n_est_inliers,
        time_test_ms: rej.test_time.as_secs_f64() * 1e3,
        time_clique_ms: rej.clique_time.as_secs_f64() * 1e3,
        time_total_ms: rej.total_time.as_secs_f64() * 1e3,
    })
}

/// Groups × outlier ratios, all sharing `base` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub base: ScenarioConfig,
    pub groups: Vec<Group>,
    pub ratios: Vec<f64>,
}

impl ExperimentGrid {
    pub fn cells(&self) -> Vec<ScenarioConfig> {
        let mut out = Vec::with_capacity(self.groups.len() * self.ratios.len());
        for &group in &self.groups {
            for &outlier_ratio in &self.ratios {
                out.push(ScenarioConfig {
                    group,
                    outlier_ratio,
                    ..self.base.clone()
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub case: Case,
    pub group: Group,
    pub outlier_ratio: f64,
    pub trial: usize,
    pub metrics: TrialMetrics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Stats {
    /// `None` for an empty sample. Quantiles interpolate linearly between
    /// order statistics.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: q(0.5),
            q25: q(0.25),
            q75: q(0.75),
        })
    }
}

/// Aggregates of one (group, ratio) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub case: Case,
    pub group: Group,
    pub outlier_ratio: f64,
    pub trials: usize,
    pub tpr: Stats,
    pub fpr: Stats,
    /// Over trials with a non-empty estimate.
    pub ir: Option<Stats>,
    pub ir_missing: usize,
    pub n_est_inliers: f64,
    pub time_test_ms: f64,
    pub time_clique_ms: f64,
    pub time_total_ms: f64,
}

impl CellSummary {
    pub fn from_rows(rows: &[TrialRow]) -> Option<Self> {
        let first = rows.first()?;
        let col =
            |f: fn(&TrialMetrics) -> f64| rows.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>();
        let mean = |f: fn(&TrialMetrics) -> f64| col(f).iter().sum::<f64>() / rows.len() as f64;
        let irs: Vec<f64> = rows.iter().filter_map(|r| r.metrics.ir).collect();
        Some(Self {
            case: first.case,
            group: first.group,
            outlier_ratio: first.outlier_ratio,
            trials: rows.len(),
            tpr: Stats::of(&col(|m| m.tpr))?,
            fpr: Stats::of(&col(|m| m.fpr))?,
            ir: Stats::of(&irs),
            ir_missing: rows.len() - irs.len(),
            n_est_inliers: mean(|m| m.n_est_inliers as f64),
            time_test_ms: mean(|m| m.time_test_ms),
            time_clique_ms: mean(|m| m.time_clique_ms),
            time_total_ms: mean(|m| m.time_total_ms),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<CellSummary>,
}

impl ResultsTable {
    pub fn summary(&self, group: Group, outlier_ratio: f64) -> Option<&CellSummary> {
        self.summaries
            .iter()
            .find(|s| s.group == group && (s.outlier_ratio - outlier_ratio).abs() < 1e-12)
    }
}

/// Runs every cell of the grid for `base.trials` trials on a pool of
/// `threads` workers. Trial `t` of every cell uses the stream
/// `trial_rng(seed, t)`, so results do not depend on `threads`.
pub fn run_experiment(grid: &ExperimentGrid, threads: usize) -> Result<ResultsTable> {
    if grid.groups.is_empty() || grid.ratios.is_empty() {
        return Err(Error::config(
            "grid",
            "needs at least one group and one outlier ratio",
        ));
    }
    let cells = grid.cells();
    for c in &cells {
        c.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let trials = grid.base.trials;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let rows: Vec<TrialRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, t)| {
                let cfg = &cells[c];
                let metrics = run_trial(cfg, &mut trial_rng(cfg.seed, t))?;
                Ok(TrialRow {
                    case: cfg.case,
                    group: cfg.group,
                    outlier_ratio: cfg.outlier_ratio,
                    trial: t,
                    metrics,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summaries = rows
        .chunks(trials.max(1))
        .filter_map(CellSummary::from_rows)
        .collect();
    Ok(ResultsTable { rows, summaries })
}
