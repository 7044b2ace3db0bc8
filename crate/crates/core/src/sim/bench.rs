use serde::{Deserialize, Serialize};

use super::{run_trial, trial_rng, ScenarioConfig};
use crate::pipeline::Case;
use crate::{Error, Result};

/// Mean wall-clock time per phase at one problem size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub case: Case,
    pub n: usize,
    pub trials: usize,
    pub mean_test_ms: f64,
    pub mean_clique_ms: f64,
    pub mean_total_ms: f64,
}

/// Runs `trials` Standard trials per size, one after another. The tests and
/// solvers inside each trial use the ambient rayon pool.
pub fn timing_benchmark(
    case: Case,
    sizes: &[usize],
    outlier_ratio: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<TimingRow>> {
    if trials == 0 {
        return Err(Error::config("trials", "must be positive"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let cfg = ScenarioConfig {
            n_points: n,
            outlier_ratio,
            trials,
            seed,
            ..ScenarioConfig::new(case)
        };
        cfg.validate()?;
        let (mut test, mut clique, mut total) = (0.0, 0.0, 0.0);
        for t in 0..trials {
            let m = run_trial(&cfg, &mut trial_rng(seed, t))?;
            test += m.time_test_ms;
            clique += m.time_clique_ms;
            total += m.time_total_ms;
        }
        let k = trials as f64;
        rows.push(TimingRow {
            case,
            n,
            trials,
            mean_test_ms: test / k,
            mean_clique_ms: clique / k,
            mean_total_ms: total / k,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "mismatched samples");
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn phases_within_total() {
        let rows = timing_benchmark(Case::General, &[60], 0.8, 3, 1).unwrap();
        let r = &rows[0];
        assert_eq!(r.n, 60);
        assert!(r.mean_test_ms + r.mean_clique_ms <= r.mean_total_ms * 1.05);
    }
}
