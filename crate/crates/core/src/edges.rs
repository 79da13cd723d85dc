//! Edge probabilities, occupied-edge sampling and the exponential
//! lambda-coupling.
//!
//! Every unordered pair `(i, j)`, `i < j`, owns one uniform `u` drawn from the
//! edge stream at index `i * n + j`. The pair's coupling variable is
//! `phi = -ln(u) |x-y|^alpha / (W_x W_y)`, exponential with rate
//! `W_x W_y / |x-y|^alpha`, and the pair is occupied at intensity `lambda`
//! iff `phi < lambda`. Exact sampling at `lambda` and the coupling slice at
//! `ell = lambda` are therefore the same configuration for the same seeds.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::bounds::truncation_error_bound;
use crate::error::{invalid, Error, Result};
use crate::lattice::BoxSpec;
use crate::params::ModelParams;
use crate::rng::{Stream, Tag};
use crate::weights::WeightField;

/// Conditional probability `1 - exp(-lambda w_x w_y / r^alpha)` that a pair at
/// Euclidean distance `r` is occupied.
pub fn edge_probability(params: &ModelParams, w_x: f64, w_y: f64, r: f64) -> Result<f64> {
    check_pair(w_x, w_y, r)?;
    let rate = params.lambda() * (w_x * w_y) / r.powf(params.alpha());
    Ok(-(-rate).exp_m1())
}

/// Coupling variable of a pair from its uniform `u in (0, 1)`.
pub fn phi_from_uniform(u: f64, w_x: f64, w_y: f64, r: f64, alpha: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("u must lie in (0, 1), got {u}")));
    }
    check_pair(w_x, w_y, r)?;
    Ok(phi_raw(u, w_x, w_y, r.powf(alpha)))
}

#[inline(always)]
fn phi_raw(u: f64, w_x: f64, w_y: f64, r_alpha: f64) -> f64 {
    -u.ln() * r_alpha / (w_x * w_y)
}

fn check_pair(w_x: f64, w_y: f64, r: f64) -> Result<()> {
    if !(w_x >= 1.0 && w_y >= 1.0) {
        return Err(invalid(format!("weights must be at least 1, got {w_x} and {w_y}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("distance must be positive, got {r}")));
    }
    Ok(())
}

/// Unordered occupied pairs on a box, stored as `(i, j)` with `i < j` in
/// increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeList {
    region: BoxSpec,
    edges: Vec<(u32, u32)>,
    lambda_used: f64,
}

impl EdgeList {
    /// Validates and canonicalizes an arbitrary list of pairs.
    pub fn new(region: BoxSpec, edges: Vec<(usize, usize)>, lambda_used: f64) -> Result<Self> {
        let n = region.len();
        let mut out = Vec::with_capacity(edges.len());
        let mut seen = HashSet::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n {
                let bad = if a >= n { a } else { b };
                return Err(Error::OutOfBox(vec![bad as i64]));
            }
            if a == b {
                return Err(invalid(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b) as u32, a.max(b) as u32);
            if !seen.insert(e) {
                return Err(invalid(format!("duplicate pair {e:?}")));
            }
            out.push(e);
        }
        out.sort_unstable();
        Ok(EdgeList { region, edges: out, lambda_used })
    }

    pub(crate) fn from_sorted(region: BoxSpec, edges: Vec<(u32, u32)>, lambda_used: f64) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        EdgeList { region, edges, lambda_used }
    }

    pub fn empty(region: BoxSpec) -> Self {
        EdgeList { region, edges: Vec::new(), lambda_used: 0.0 }
    }

    pub fn region(&self) -> &BoxSpec {
        &self.region
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn lambda_used(&self) -> f64 {
        self.lambda_used
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let e = (i.min(j) as u32, i.max(j) as u32);
        self.edges.binary_search(&e).is_ok()
    }

    /// True when every pair of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &EdgeList) -> bool {
        let mut it = other.edges.iter().peekable();
        'outer: for e in &self.edges {
            while let Some(o) = it.peek() {
                match (*o).cmp(e) {
                    std::cmp::Ordering::Less => {
                        it.next();
                    }
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }
}

/// How pairs are visited by [`sample_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// All `n(n-1)/2` pairs.
    Exact,
    /// Only pairs with `|x - y| <= radius`.
    Truncated { radius: f64 },
}

/// Result of [`sample_graph`]; truncated runs carry the expected number of
/// occupied edges they may have dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub edges: EdgeList,
    pub truncation_bound: Option<f64>,
}

impl GraphSample {
    /// Truncated runs whose missed-edge bound exceeds `budget`.
    pub fn exceeds_budget(&self, budget: f64) -> bool {
        self.truncation_bound.is_some_and(|b| b > budget)
    }
}

/// Default expected-missed-edges budget for truncated sampling.
pub const DEFAULT_TRUNCATION_BUDGET: f64 = 1.0;

/// Samples the occupied edges of the box carried by `weights`.
pub fn sample_graph(
    weights: &WeightField,
    params: &ModelParams,
    mode: SamplingMode,
    edge_seed: u64,
) -> Result<GraphSample> {
    let region = weights.region();
    if region.d() != params.d() {
        return Err(invalid(format!(
            "box dimension {} does not match model dimension {}",
            region.d(),
            params.d()
        )));
    }
    let lambda = params.lambda();
    let radius = match mode {
        SamplingMode::Exact => None,
        SamplingMode::Truncated { radius } => {
            if !(radius > 0.0) {
                return Err(invalid(format!("truncation radius must be positive, got {radius}")));
            }
            Some(radius)
        }
    };
    let kernel = PairKernel::new(weights, params.alpha(), edge_seed);
    let mut edges = Vec::new();
    if lambda > 0.0 {
        kernel.scan(lambda, radius, |i, j, phi| {
            if phi < lambda {
                edges.push((i, j));
            }
        });
    }
    edges.sort_unstable();
    let truncation_bound = radius.map(|r| truncation_error_bound(region, params, r)).transpose()?;
    Ok(GraphSample {
        edges: EdgeList::from_sorted(region.clone(), edges, lambda),
        truncation_bound,
    })
}

/// Visits candidate pairs and reports their coupling variable.
pub(crate) struct PairKernel<'a> {
    region: &'a BoxSpec,
    weights: &'a [f64],
    coords: Vec<i64>,
    /// `|x-y|^alpha` indexed by the absolute displacement, encoded like a
    /// vertex index.
    r_alpha: Vec<f64>,
    stream: Stream,
    n: u64,
}

impl<'a> PairKernel<'a> {
    pub(crate) fn new(weights: &'a WeightField, alpha: f64, edge_seed: u64) -> Self {
        let region = weights.region();
        let d = region.d();
        let n = region.len();
        let mut coords = vec![0i64; n * d];
        for i in 0..n {
            let mut rest = i;
            for k in (0..d).rev() {
                coords[i * d + k] = (rest % region.side()) as i64;
                rest /= region.side();
            }
        }
        let half = alpha / 2.0;
        let r_alpha = (0..n)
            .map(|k| {
                let d2: i64 = coords[k * d..(k + 1) * d].iter().map(|c| c * c).sum();
                (d2 as f64).powf(half)
            })
            .collect();
        PairKernel {
            region,
            weights: weights.values(),
            coords,
            r_alpha,
            stream: Stream::new(edge_seed, Tag::Edge),
            n: n as u64,
        }
    }

    #[inline(always)]
    fn disp_index(&self, i: usize, j: usize) -> usize {
        let d = self.region.d();
        let side = self.region.side();
        let (a, b) = (&self.coords[i * d..i * d + d], &self.coords[j * d..j * d + d]);
        let mut idx = 0usize;
        for k in 0..d {
            idx = idx * side + (a[k] - b[k]).unsigned_abs() as usize;
        }
        idx
    }

    /// Coupling variable of the pair `(i, j)`, `i < j`.
    #[inline(always)]
    pub(crate) fn phi(&self, i: usize, j: usize) -> f64 {
        let u = self.stream.uniform(i as u64 * self.n + j as u64);
        phi_raw(u, self.weights[i], self.weights[j], self.r_alpha[self.disp_index(i, j)])
    }

    /// Calls `f(i, j, phi)` for every pair with `phi < ell_max` (and possibly
    /// some with larger `phi`); callers compare against their own threshold.
    pub(crate) fn scan(&self, ell_max: f64, radius: Option<f64>, mut f: impl FnMut(u32, u32, f64)) {
        if !(ell_max > 0.0) {
            return;
        }
        // -ln(u) >= 1 - u, so a pair with 1 - u >= ell_max w w / r^alpha has
        // phi >= ell_max; the slack absorbs rounding in ln.
        let cut = ell_max * (1.0 + 1e-9);
        let n = self.region.len();
        let d = self.region.d();
        let mut visit = |i: usize, j: usize, disp: usize| {
            let u = self.stream.uniform(i as u64 * self.n + j as u64);
            let (wi, wj) = (self.weights[i], self.weights[j]);
            let ra = self.r_alpha[disp];
            if (1.0 - u) * ra < cut * wi * wj {
                let phi = phi_raw(u, wi, wj, ra);
                if phi < ell_max {
                    f(i as u32, j as u32, phi);
                }
            }
        };
        match radius {
            None if d == 1 => {
                for i in 0..n {
                    for j in i + 1..n {
                        visit(i, j, j - i);
                    }
                }
            }
            None => {
                for i in 0..n {
                    for j in i + 1..n {
                        visit(i, j, self.disp_index(i, j));
                    }
                }
            }
            Some(r) => {
                let offsets = positive_offsets(d, r, self.region.side());
                let side = self.region.side() as i64;
                for i in 0..n {
                    let ci = &self.coords[i * d..i * d + d];
                    'off: for off in &offsets {
                        let mut j = 0i64;
                        for k in 0..d {
                            let c = ci[k] + off[k];
                            if c < 0 || c >= side {
                                continue 'off;
                            }
                            j = j * side + c;
                        }
                        let j = j as usize;
                        let disp = self.disp_index(i, j);
                        if i < j {
                            visit(i, j, disp);
                        }
                    }
                }
            }
        }
    }
}

/// Displacements `delta` with `0 < |delta| <= r` whose index offset is
/// positive (lexicographically positive vectors).
fn positive_offsets(d: usize, r: f64, side: usize) -> Vec<Vec<i64>> {
    let reach = (r.floor() as i64).min(side as i64 - 1).max(0);
    let r2 = r * r;
    let mut out = Vec::new();
    let mut cur = vec![-reach; d];
    loop {
        let norm2: i64 = cur.iter().map(|c| c * c).sum();
        let first_nonzero = cur.iter().find(|&&c| c != 0);
        if matches!(first_nonzero, Some(&c) if c > 0) && (norm2 as f64) <= r2 {
            out.push(cur.clone());
        }
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < reach {
                cur[k] += 1;
                break;
            }
            cur[k] = -reach;
        }
    }
}

/// Per-pair exponential variables realizing all intensities at once.
///
/// Values are regenerated from the seeds on demand. A field built with
/// [`CoupledEdgeField::with_sweep`] additionally keeps the pairs whose
/// `phi` lies below the sweep maximum, sorted by `phi`.
#[derive(Debug, Clone)]
pub struct CoupledEdgeField {
    weights: WeightField,
    alpha: f64,
    edge_seed: u64,
    truncation_radius: Option<f64>,
    retained: Vec<(f64, u32, u32)>,
    retained_max: f64,
}

impl CoupledEdgeField {
    pub fn new(weights: WeightField, alpha: f64, edge_seed: u64, truncation_radius: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("alpha must be positive"));
        }
        if let Some(r) = truncation_radius {
            if !(r > 0.0) {
                return Err(invalid(format!("truncation radius must be positive, got {r}")));
            }
        }
        Ok(CoupledEdgeField {
            weights,
            alpha,
            edge_seed,
            truncation_radius,
            retained: Vec::new(),
            retained_max: 0.0,
        })
    }

    /// Field prepared for slicing at any `ell <= ell_max` without rescanning.
    pub fn with_sweep(
        weights: WeightField,
        alpha: f64,
        edge_seed: u64,
        truncation_radius: Option<f64>,
        ell_max: f64,
    ) -> Result<Self> {
        let mut field = Self::new(weights, alpha, edge_seed, truncation_radius)?;
        field.retain_below(ell_max);
        Ok(field)
    }

    /// Retains every pair with `phi < ell_max`.
    pub fn retain_below(&mut self, ell_max: f64) {
        if ell_max <= self.retained_max {
            return;
        }
        let kernel = PairKernel::new(&self.weights, self.alpha, self.edge_seed);
        let mut kept = Vec::new();
        kernel.scan(ell_max, self.truncation_radius, |i, j, phi| kept.push((phi, i, j)));
        kept.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        self.retained = kept;
        self.retained_max = ell_max;
    }

    pub fn region(&self) -> &BoxSpec {
        self.weights.region()
    }

    pub fn weights(&self) -> &WeightField {
        &self.weights
    }

    pub fn weights_seed(&self) -> Option<u64> {
        self.weights.seed()
    }

    pub fn edge_seed(&self) -> u64 {
        self.edge_seed
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        self.truncation_radius
    }

    pub fn retained_max(&self) -> f64 {
        self.retained_max
    }

    /// Retained `(phi, i, j)` triples in increasing `phi`.
    pub fn retained(&self) -> &[(f64, u32, u32)] {
        &self.retained
    }

    /// Coupling variable of one pair, regenerated from the seeds.
    pub fn phi(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.region().len();
        if i >= n || j >= n || i == j {
            return Err(invalid(format!("({i}, {j}) is not a pair of distinct box vertices")));
        }
        let kernel = PairKernel::new(&self.weights, self.alpha, self.edge_seed);
        Ok(kernel.phi(i.min(j), i.max(j)))
    }

    /// Pairs with `phi < ell`.
    pub fn open_edges_at(&self, ell: f64) -> EdgeList {
        let region = self.region().clone();
        if !(ell > 0.0) {
            return EdgeList::from_sorted(region, Vec::new(), ell.max(0.0));
        }
        let mut edges: Vec<(u32, u32)> = if ell <= self.retained_max {
            let end = self.retained.partition_point(|t| t.0 < ell);
            self.retained[..end].iter().map(|&(_, i, j)| (i, j)).collect()
        } else {
            let kernel = PairKernel::new(&self.weights, self.alpha, self.edge_seed);
            let mut v = Vec::new();
            kernel.scan(ell, self.truncation_radius, |i, j, _| v.push((i, j)));
            v
        };
        edges.sort_unstable();
        EdgeList::from_sorted(region, edges, ell)
    }
}
