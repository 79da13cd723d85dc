use rayon::prelude::*;
use serde::Serialize;

use super::replicate_weights;
use crate::cluster::{components, largest_root};
use crate::edges::{sample_graph, SamplingMode};
use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::lattice::BoxSpec;
use crate::params::ModelParams;
use crate::stats::quantile_sorted;

/// Hop count between two vertices of a sampled graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

pub fn graph_distance(graph: &Graph, x: usize, y: usize) -> Distance {
    match graph.bfs_distances(x)[y] {
        u32::MAX => Distance::Unreachable,
        h => Distance::Hops(h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistanceRegime {
    /// `tau < 2`: doubly logarithmic distances.
    InfiniteVariance,
    /// `tau > 2`, `alpha in (d, 2d)`: polylogarithmic distances.
    FiniteVarianceSmallAlpha,
    /// `min(alpha, beta alpha) > 2d`: linear distances.
    Linear,
}

impl DistanceRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceRegime::InfiniteVariance => "InfiniteVariance",
            DistanceRegime::FiniteVarianceSmallAlpha => "FiniteVarianceSmallAlpha",
            DistanceRegime::Linear => "Linear",
        }
    }

    /// The regime's normalized statistic for hop count `hops` at Euclidean
    /// distance `r`.
    pub fn normalize(&self, hops: u32, r: f64) -> f64 {
        let h = hops as f64;
        match self {
            DistanceRegime::InfiniteVariance => h / r.ln().ln(),
            DistanceRegime::FiniteVarianceSmallAlpha => h.ln() / r.ln().ln(),
            DistanceRegime::Linear => h / r,
        }
    }
}

/// Regime of the distance scaling, or an error for parameters covered by
/// none of the three (including all boundary cases).
pub fn distance_regime(params: &ModelParams) -> Result<DistanceRegime> {
    let d = params.d() as f64;
    let (a, ba) = (params.alpha(), params.alpha() * params.beta());
    if a.min(ba) <= d {
        return Err(invalid("degrees are infinite for min(alpha, beta alpha) <= d"));
    }
    let tau = params.tau();
    if tau < 2.0 {
        Ok(DistanceRegime::InfiniteVariance)
    } else if tau > 2.0 && a > d && a < 2.0 * d {
        Ok(DistanceRegime::FiniteVarianceSmallAlpha)
    } else if a.min(ba) > 2.0 * d {
        Ok(DistanceRegime::Linear)
    } else {
        Err(invalid(format!(
            "boundary parameters (alpha = {a}, beta alpha = {ba}, d = {}) fall in no distance regime",
            params.d()
        )))
    }
}

/// Upper constant of the normalized statistic where one is known.
pub fn regime_theory_upper(params: &ModelParams) -> Result<Option<f64>> {
    Ok(match distance_regime(params)? {
        DistanceRegime::InfiniteVariance => Some(2.0 / (params.tau() - 1.0).ln().abs()),
        DistanceRegime::FiniteVarianceSmallAlpha => Some(params.distance_exponent()?),
        DistanceRegime::Linear => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusStats {
    pub radius: usize,
    pub n_conditioned: usize,
    /// Quartiles of the normalized statistic.
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    /// Median raw hop count.
    pub median_hops: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceScalingReport {
    pub regime: DistanceRegime,
    pub radii: Vec<usize>,
    pub stats: Vec<RadiusStats>,
    pub theory_upper: Option<f64>,
    pub replicates: u64,
    pub conditioning: &'static str,
}

/// Medians and quartiles of graph distances from the origin to the axis
/// points at each radius, conditioned on both lying in the largest
/// component of `Lambda_{2 r_max}(0)`. Radii without conditioned samples get
/// NaN statistics.
pub fn distance_scaling_report(
    params: &ModelParams,
    radii: &[usize],
    replicates: u64,
    base_seed: u64,
) -> Result<DistanceScalingReport> {
    let regime = distance_regime(params)?;
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("radii must be non-empty and strictly increasing"));
    }
    if replicates == 0 {
        return Err(invalid("at least one replicate is required"));
    }
    let min_radius = if regime == DistanceRegime::Linear { 1 } else { 3 };
    if radii[0] < min_radius {
        return Err(invalid(format!("radii must be at least {min_radius} in this regime")));
    }
    let d = params.d();
    let r_max = *radii.last().unwrap();
    let region = BoxSpec::centered(vec![0; d], 2 * r_max)?;
    let origin = region.require_index(&vec![0; d])?;
    let targets: Vec<Vec<usize>> = radii
        .iter()
        .map(|&r| {
            let mut t = Vec::with_capacity(2 * d);
            for k in 0..d {
                for s in [-1i64, 1] {
                    let mut x = vec![0i64; d];
                    x[k] = s * r as i64;
                    t.push(region.index_of(&x).expect("target inside box"));
                }
            }
            t
        })
        .collect();
    let per_rep: Vec<Vec<Vec<u32>>> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Vec<u32>>> {
            let (weights, edge_seed) = replicate_weights(&region, params, base_seed, rep)?;
            let sample = sample_graph(&weights, params, SamplingMode::Exact, edge_seed)?;
            let labels = components(&sample.edges);
            let (root, _) = largest_root(&labels);
            if labels.root(origin) != root {
                return Ok(vec![Vec::new(); radii.len()]);
            }
            let dist = Graph::from_edges(&sample.edges).bfs_distances(origin);
            Ok(targets
                .iter()
                .map(|ts| ts.iter().filter(|&&t| labels.root(t) == root).map(|&t| dist[t]).collect())
                .collect())
        })
        .collect::<Result<_>>()?;
    let stats = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let hops: Vec<u32> = per_rep.iter().flat_map(|v| v[k].iter().copied()).collect();
            let mut norm: Vec<f64> = hops.iter().map(|&h| regime.normalize(h, r as f64)).collect();
            norm.sort_unstable_by(f64::total_cmp);
            let mut raw: Vec<f64> = hops.iter().map(|&h| h as f64).collect();
            raw.sort_unstable_by(f64::total_cmp);
            let q = |v: &[f64], p| if v.is_empty() { f64::NAN } else { quantile_sorted(v, p) };
            RadiusStats {
                radius: r,
                n_conditioned: hops.len(),
                q25: q(&norm, 0.25),
                median: q(&norm, 0.5),
                q75: q(&norm, 0.75),
                median_hops: q(&raw, 0.5),
            }
        })
        .collect();
    Ok(DistanceScalingReport {
        regime,
        radii: radii.to_vec(),
        stats,
        theory_upper: regime_theory_upper(params)?,
        replicates,
        conditioning: "largest component of the sampled box",
    })
}
