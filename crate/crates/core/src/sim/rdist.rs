use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use super::uniform;
use crate::coplanarity::r_approx;
use crate::geometry::SonarConfig;
use crate::{Error, Result};

pub const RDIST_BINS: usize = 100;
pub const RDIST_MIN_SAMPLES: usize = 10_000;

/// Histogram of `r cos(phi) + eta` against its Gaussian surrogate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDistStudy {
    pub r: f64,
    pub sigma_r: f64,
    pub phi_max: f64,
    pub n_samples: usize,
    /// `RDIST_BINS + 1` edges spanning the sample range.
    pub bin_edges: Vec<f64>,
    /// Empirical density per bin.
    pub density: Vec<f64>,
    pub mu_est: f64,
    pub sigma_est: f64,
    /// Surrogate density at the bin centers.
    pub gaussian_density: Vec<f64>,
    /// Total variation between the binned sample and the surrogate, counting
    /// the surrogate's mass outside the histogram range.
    pub tv_distance: f64,
}

pub fn r_distribution_study<R: Rng + ?Sized>(
    r: f64,
    sigma_r: f64,
    phi_max: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<RDistStudy> {
    if n_samples < RDIST_MIN_SAMPLES {
        return Err(Error::config(
            "samples",
            format!("need at least {RDIST_MIN_SAMPLES}, got {n_samples}"),
        ));
    }
    if !(sigma_r > 0.0 && sigma_r.is_finite()) {
        return Err(Error::config("sigma_r", "must be positive"));
    }
    if !(phi_max >= 0.0 && phi_max.is_finite()) {
        return Err(Error::config("phi_max", "must be non-negative"));
    }
    let noise = Normal::new(0.0, sigma_r).map_err(|e| Error::config("sigma_r", e.to_string()))?;
    let samples: Vec<f64> = (0..n_samples)
        .map(|_| r * uniform(rng, -phi_max, phi_max).cos() + noise.sample(rng))
        .collect();

    let cfg = SonarConfig {
        phi_max: phi_max.max(f64::MIN_POSITIVE),
        sigma_r,
        ..SonarConfig::default()
    };
    let fit = r_approx(r, &cfg)?;
    let gauss = NormalDist::new(fit.mu_est, fit.sigma_est)
        .map_err(|e| Error::config("sigma_r", e.to_string()))?;

    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / RDIST_BINS as f64;
    let bin_edges: Vec<f64> = (0..=RDIST_BINS).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0usize; RDIST_BINS];
    for &s in &samples {
        let k = (((s - lo) / width) as usize).min(RDIST_BINS - 1);
        counts[k] += 1;
    }
    let n = n_samples as f64;
    let mut tv = 1.0 - (gauss.cdf(hi) - gauss.cdf(lo));
    for (k, &c) in counts.iter().enumerate() {
        let mass = gauss.cdf(bin_edges[k + 1]) - gauss.cdf(bin_edges[k]);
        tv += (c as f64 / n - mass).abs();
    }
    let tv_distance = 0.5 * tv;

    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let gaussian_density = (0..RDIST_BINS)
        .map(|k| {
            let x = 0.5 * (bin_edges[k] + bin_edges[k + 1]);
            let z = (x - fit.mu_est) / fit.sigma_est;
            (-0.5 * z * z).exp() / (fit.sigma_est * std::f64::consts::TAU.sqrt())
        })
        .collect();
    Ok(RDistStudy {
        r,
        sigma_r,
        phi_max,
        n_samples,
        bin_edges,
        density,
        mu_est: fit.mu_est,
        sigma_est: fit.sigma_est,
        gaussian_density,
        tv_distance,
    })
}
