//! Outlier rejection for 2D-3D point correspondences observed by a 2D
//! forward-looking sonar (FLS).
//!
//! Two geometric compatibility tests are provided:
//!
//! - [`in_range`]: a pairwise test that bounds the 3D length of an edge
//!   between two world points from their range/bearing measurements, using
//!   the narrow elevation aperture of the sonar.
//! - [`coplanarity`]: a four-point test for planar scenes that fits an affine
//!   map from three correspondences and gates the residual of the fourth with
//!   a chi-squared threshold.
//!
//! Passing groups become (hyper)edges of a compatibility graph, and the
//! maximum clique found by [`clique`] is reported as the inlier set.
//! [`sim`] reproduces the simulation studies used to evaluate the pipeline
//! and [`io`] holds configuration parsing and result serialization.

pub mod clique;
pub mod coplanarity;
mod error;
pub mod geometry;
pub mod in_range;
pub mod io;
pub mod pipeline;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{Correspondence, Measurement, Pose, SonarConfig, SphericalPoint, WorldPoint};
pub use pipeline::{reject_outliers, Case, RejectOptions, Rejection};
