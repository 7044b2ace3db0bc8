//! End-to-end outlier rejection: compatibility graph, then maximum clique.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::clique::{max_clique_hyper4_heuristic, max_clique_simple};
use crate::coplanarity::{build_hypergraph, DEFAULT_P_VALUE};
use crate::geometry::{Correspondence, SonarConfig};
use crate::in_range::build_pairwise_graph;
use crate::Result;

/// Scene structure the rejection relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Arbitrary 3D points: pairwise in-range test + exact clique.
    General,
    /// Coplanar 3D points: 4-point coplanarity test + hyperclique heuristic.
    Coplanar,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::General => "general",
            Case::Coplanar => "coplanar",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectOptions {
    pub case: Case,
    /// Noise model as estimated by the user (sigma and beta).
    pub sonar: SonarConfig,
    pub use_r_approx: bool,
    pub p_value: f64,
    pub with_in_range: bool,
}

impl RejectOptions {
    pub fn new(case: Case, sonar: SonarConfig) -> Self {
        Self {
            case,
            sonar,
            use_r_approx: true,
            p_value: DEFAULT_P_VALUE,
            with_in_range: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    /// Positions (into the input slice) of the estimated inliers, sorted.
    pub inliers: Vec<usize>,
    pub certified: bool,
    pub test_time: Duration,
    pub clique_time: Duration,
    pub total_time: Duration,
}

pub fn reject_outliers(corrs: &[Correspondence], opts: &RejectOptions) -> Result<Rejection> {
    let start = Instant::now();
    let (inliers, certified, test_time, clique_time) = match opts.case {
        Case::General => {
            let g = build_pairwise_graph(corrs, &opts.sonar);
            let built = Instant::now();
            let c = max_clique_simple(&g);
            (
                c.vertices,
                c.is_certified_maximum,
                built - start,
                built.elapsed(),
            )
        }
        Case::Coplanar => {
            let h = build_hypergraph(
                corrs,
                &opts.sonar,
                opts.use_r_approx,
                opts.p_value,
                opts.with_in_range,
            )?;
            let built = Instant::now();
            let c = max_clique_hyper4_heuristic(&h);
            (
                c.vertices,
                c.is_certified_maximum,
                built - start,
                built.elapsed(),
            )
        }
    };
    Ok(Rejection {
        inliers,
        certified,
        test_time,
        clique_time,
        total_time: start.elapsed(),
    })
}
