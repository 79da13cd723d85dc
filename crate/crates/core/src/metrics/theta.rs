use rayon::prelude::*;
use serde::Serialize;

use super::{replicate_weights, DEFAULT_CONFIDENCE};
use crate::cluster::{components, largest_root, UnionFind};
use crate::edges::{CoupledEdgeField, EdgeList};
use crate::error::{invalid, Result};
use crate::lattice::BoxSpec;
use crate::params::ModelParams;
use crate::stats::{wilson, z_for_confidence};

/// Default cluster-fraction threshold of [`ThetaProxy::LargestClusterMembership`].
pub const DEFAULT_RHO0: f64 = 0.05;

/// Finite-volume stand-in for the event that the origin's cluster is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThetaProxy {
    /// The origin's component within `Lambda_n(0)` contains a vertex on a
    /// face of the box.
    BoundaryReach,
    /// The origin lies in the largest component and that component holds at
    /// least `rho0` of the box.
    LargestClusterMembership { rho0: f64 },
}

impl ThetaProxy {
    pub fn name(&self) -> &'static str {
        match self {
            ThetaProxy::BoundaryReach => "BoundaryReach",
            ThetaProxy::LargestClusterMembership { .. } => "LargestClusterMembership",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaEstimate {
    pub lambda: f64,
    pub proxy: ThetaProxy,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: u64,
    pub box_radius: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaOptions {
    pub proxy: ThetaProxy,
    pub confidence: f64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions { proxy: ThetaProxy::BoundaryReach, confidence: DEFAULT_CONFIDENCE }
    }
}

/// Does the origin's component reach a face of the (centered) region?
pub fn boundary_reach(edges: &EdgeList, origin: usize) -> bool {
    let region = edges.region();
    let mut uf = UnionFind::new(region.len());
    for &(a, b) in edges.edges() {
        uf.union(a as usize, b as usize);
    }
    let root = uf.find(origin);
    (0..region.len()).any(|v| region.on_boundary(v) && uf.find(v) == root)
}

/// Is the origin in a largest component of at least `rho0 |box|` vertices?
pub fn largest_cluster_membership(edges: &EdgeList, origin: usize, rho0: f64) -> bool {
    let labels = components(edges);
    let (root, size) = largest_root(&labels);
    labels.root(origin) == root && size as f64 >= rho0 * edges.region().len() as f64
}

fn indicator(edges: &EdgeList, origin: usize, proxy: ThetaProxy) -> bool {
    match proxy {
        ThetaProxy::BoundaryReach => boundary_reach(edges, origin),
        ThetaProxy::LargestClusterMembership { rho0 } => largest_cluster_membership(edges, origin, rho0),
    }
}

/// Fraction of replicates where the proxy event holds at `params.lambda()`.
pub fn estimate_theta(
    params: &ModelParams,
    box_radius: usize,
    replicates: u64,
    proxy: ThetaProxy,
    base_seed: u64,
) -> Result<ThetaEstimate> {
    let opts = ThetaOptions { proxy, ..Default::default() };
    estimate_theta_with(params, box_radius, replicates, base_seed, opts)
}

pub fn estimate_theta_with(
    params: &ModelParams,
    box_radius: usize,
    replicates: u64,
    base_seed: u64,
    opts: ThetaOptions,
) -> Result<ThetaEstimate> {
    let mut curve = theta_curve_with(params, &[params.lambda()], box_radius, replicates, base_seed, opts)?;
    Ok(curve.remove(0))
}

/// Percolation proxy along a grid of intensities, all read off one coupled
/// field per replicate. With [`ThetaProxy::BoundaryReach`] each replicate's
/// indicator is monotone in lambda, so the curve is non-decreasing.
pub fn theta_curve(
    params: &ModelParams,
    lambda_grid: &[f64],
    box_radius: usize,
    replicates: u64,
    base_seed: u64,
) -> Result<Vec<ThetaEstimate>> {
    theta_curve_with(params, lambda_grid, box_radius, replicates, base_seed, ThetaOptions::default())
}

pub fn theta_curve_with(
    params: &ModelParams,
    lambda_grid: &[f64],
    box_radius: usize,
    replicates: u64,
    base_seed: u64,
    opts: ThetaOptions,
) -> Result<Vec<ThetaEstimate>> {
    if replicates == 0 {
        return Err(invalid("at least one replicate is required"));
    }
    if box_radius == 0 {
        return Err(invalid("a box of radius 0 has no boundary to reach"));
    }
    if lambda_grid.is_empty() {
        return Err(invalid("empty lambda grid"));
    }
    if lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(invalid("lambda values must be finite and non-negative"));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("lambda grid must be strictly increasing"));
    }
    if let ThetaProxy::LargestClusterMembership { rho0 } = opts.proxy {
        if !(rho0 > 0.0 && rho0 <= 1.0) {
            return Err(invalid(format!("rho0 must lie in (0, 1], got {rho0}")));
        }
    }
    let region = BoxSpec::centered(vec![0; params.d()], box_radius)?;
    let origin = region.require_index(&vec![0; params.d()])?;
    let ell_max = *lambda_grid.last().unwrap();
    let hits: Vec<Vec<bool>> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<bool>> {
            let (weights, edge_seed) = replicate_weights(&region, params, base_seed, r)?;
            let field = CoupledEdgeField::with_sweep(weights, params.alpha(), edge_seed, None, ell_max)?;
            Ok(lambda_grid
                .iter()
                .map(|&l| indicator(&field.open_edges_at(l), origin, opts.proxy))
                .collect())
        })
        .collect::<Result<_>>()?;
    let z = z_for_confidence(opts.confidence);
    Ok(lambda_grid
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let s = hits.iter().filter(|h| h[k]).count() as u64;
            let p = wilson(s, replicates, z);
            ThetaEstimate {
                lambda,
                proxy: opts.proxy,
                estimate: p.estimate,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                replicates,
                box_radius,
            }
        })
        .collect())
}
