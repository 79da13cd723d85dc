//! Estimators for percolation, critical intensity, degree tails, graph
//! distances and the finite-box cluster bound.

mod boxes;
mod degree;
mod distance;
mod lambda_c;
mod theta;

pub use boxes::{box_theorem_check, box_theorem_bound, BoxCheckRow, BoxTheoremReport};
pub use degree::{
    degree_histogram, hill_estimator, loglog_tail_slope, tail_exponent, DegreeHistogram,
    DegreeTailEstimate,
};
pub use distance::{
    distance_regime, distance_scaling_report, graph_distance, regime_theory_upper, Distance,
    DistanceRegime, DistanceScalingReport, RadiusStats,
};
pub use lambda_c::{estimate_lambda_c, reach_threshold, LambdaCBracket, LambdaCConfig, LambdaCReport};
pub use theta::{
    boundary_reach, estimate_theta, estimate_theta_with, largest_cluster_membership, theta_curve,
    theta_curve_with, ThetaEstimate, ThetaOptions, ThetaProxy, DEFAULT_RHO0,
};

use crate::params::ModelParams;
use crate::rng::replicate_seeds;
use crate::weights::{sample_weights, WeightField};
use crate::{lattice::BoxSpec, Result};

/// Default confidence of reported intervals.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Weights and edge seed of replicate `r` on `region`.
pub(crate) fn replicate_weights(
    region: &BoxSpec,
    params: &ModelParams,
    base_seed: u64,
    r: u64,
) -> Result<(WeightField, u64)> {
    let (ws, es) = replicate_seeds(base_seed, r);
    Ok((sample_weights(region, params.beta(), ws)?, es))
}
