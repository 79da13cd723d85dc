//! Exact answers on tiny boxes by enumerating every edge configuration,
//! conditional on fixed weights, and Monte Carlo comparison against them.

use serde::Serialize;

use crate::cluster::UnionFind;
use crate::edges::{edge_probability, sample_graph, EdgeList, SamplingMode};
use crate::error::{invalid, Error, Result};
use crate::lattice::BoxSpec;
use crate::params::ModelParams;
use crate::renorm::{is_good_box, renorm_schedule};
use crate::rng::{derive_seed, replicate_seeds, Tag};
use crate::stats::CompensatedSum;
use crate::weights::WeightField;

/// Largest number of vertex pairs an instance may have.
pub const PAIR_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TinyInstance {
    weights: WeightField,
    params: ModelParams,
    pairs: Vec<(usize, usize)>,
    probs: Vec<f64>,
}

impl TinyInstance {
    pub fn new(region: BoxSpec, weights: Vec<f64>, params: ModelParams) -> Result<Self> {
        if region.d() != params.d() {
            return Err(invalid("box dimension does not match the model"));
        }
        let n = region.len();
        let pairs = n * n.saturating_sub(1) / 2;
        if pairs > PAIR_CAP {
            return Err(Error::CapExceeded { pairs, limit: PAIR_CAP });
        }
        let weights = WeightField::from_values(region, weights)?;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let probs = pairs
            .iter()
            .map(|&(i, j)| {
                let r = (weights.region().dist2(i, j) as f64).sqrt();
                edge_probability(&params, weights.get(i), weights.get(j), r)
            })
            .collect::<Result<_>>()?;
        Ok(TinyInstance { weights, params, pairs, probs })
    }

    pub fn region(&self) -> &BoxSpec {
        self.weights.region()
    }

    pub fn weights(&self) -> &WeightField {
        &self.weights
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn edge_probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `sum_config P[config] f(config)` with `f` seeing the open pairs as a
    /// bit mask and a union-find over them.
    fn expectation(&self, mut f: impl FnMut(u32, &mut UnionFind) -> f64) -> f64 {
        let p = self.pairs.len();
        let mut prob = vec![1.0f64; 1 << p];
        for (k, &q) in self.probs.iter().enumerate() {
            let half = 1usize << k;
            for mask in 0..half {
                let base = prob[mask];
                prob[mask] = base * (1.0 - q);
                prob[mask | half] = base * q;
            }
        }
        let mut acc = CompensatedSum::default();
        for (mask, &w) in prob.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut uf = UnionFind::new(self.region().len());
            for (k, &(i, j)) in self.pairs.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    uf.union(i, j);
                }
            }
            acc.add(w * f(mask as u32, &mut uf));
        }
        acc.value()
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.region().len() {
            return Err(invalid(format!("vertex index {v} outside the instance")));
        }
        Ok(())
    }
}

pub fn exact_connection_prob(inst: &TinyInstance, s: usize, t: usize) -> Result<f64> {
    inst.check_vertex(s)?;
    inst.check_vertex(t)?;
    Ok(inst.expectation(|_, uf| uf.connected(s, t) as u8 as f64))
}

/// Mass function of `|C(x)|`; entry `k - 1` is `P[|C(x)| = k]`.
pub fn exact_component_size_law(inst: &TinyInstance, x: usize) -> Result<Vec<f64>> {
    inst.check_vertex(x)?;
    let n = inst.region().len();
    Ok((1..=n).map(|k| inst.expectation(|_, uf| (uf.set_size(x) == k) as u8 as f64)).collect())
}

/// Probability that the instance box, read as `B_{m_0}` with `m_0` its side,
/// is not a good level-0 box.
pub fn exact_psi0(inst: &TinyInstance) -> f64 {
    let m0 = inst.region().side() as u128;
    let long: u32 = inst
        .pairs
        .iter()
        .enumerate()
        .filter(|(_, &(i, j))| 10_000 * inst.region().dist2(i, j) as u128 > m0 * m0)
        .fold(0, |acc, (k, _)| acc | 1 << k);
    inst.expectation(|mask, _| (mask & long != 0) as u8 as f64)
}

/// Probability that the center's component reaches a face of the
/// (centered) instance box.
pub fn exact_boundary_reach(inst: &TinyInstance) -> Result<f64> {
    let region = inst.region().clone();
    let center = region.center().ok_or_else(|| invalid("boundary reach needs a centered box"))?;
    if region.radius() == Some(0) {
        return Err(invalid("a one-vertex box has no boundary"));
    }
    let origin = region.require_index(&center)?;
    let boundary: Vec<usize> = (0..region.len()).filter(|&v| region.on_boundary(v)).collect();
    Ok(inst.expectation(|_, uf| boundary.iter().any(|&b| uf.connected(origin, b)) as u8 as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleTarget {
    Connection { s: usize, t: usize },
    ComponentLaw { x: usize },
    Psi0,
    ThetaBoundaryReach,
}

impl OracleTarget {
    pub fn name(&self) -> &'static str {
        match self {
            OracleTarget::Connection { .. } => "connection",
            OracleTarget::ComponentLaw { .. } => "component_law",
            OracleTarget::Psi0 => "psi0",
            OracleTarget::ThetaBoundaryReach => "theta_boundary_reach",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZReport {
    pub target: OracleTarget,
    pub replicates: u64,
    /// One entry per reported probability (a single one except for
    /// component laws).
    pub exact: Vec<f64>,
    pub monte_carlo: Vec<f64>,
    pub z: Vec<f64>,
}

impl ZReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z.iter().fold(0.0, |m, z| m.max(z.abs()))
    }

    pub fn passes(&self, limit: f64) -> bool {
        self.max_abs_z() <= limit
    }
}

fn z_score(exact: f64, freq: f64, n: u64) -> f64 {
    let var = exact * (1.0 - exact) / n as f64;
    if var <= 0.0 {
        if freq == exact {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (freq - exact) / var.sqrt()
    }
}

fn observe(target: OracleTarget, inst: &TinyInstance, edges: &EdgeList) -> Result<Vec<bool>> {
    let region = inst.region();
    let mut uf = UnionFind::new(region.len());
    for &(a, b) in edges.edges() {
        uf.union(a as usize, b as usize);
    }
    Ok(match target {
        OracleTarget::Connection { s, t } => vec![uf.connected(s, t)],
        OracleTarget::ComponentLaw { x } => {
            let size = uf.set_size(x);
            (1..=region.len()).map(|k| k == size).collect()
        }
        OracleTarget::Psi0 => {
            let schedule = renorm_schedule(region.side() as u64, 0)?;
            vec![!is_good_box(edges, &schedule, 0, region.low())?.good]
        }
        OracleTarget::ThetaBoundaryReach => {
            let origin = region.require_index(&region.center().unwrap())?;
            vec![(0..region.len()).any(|v| region.on_boundary(v) && uf.connected(origin, v))]
        }
    })
}

/// Runs the sampling engine on the instance's fixed weights and compares
/// frequencies with the exact values through `(mc - exact) / sigma`.
pub fn oracle_vs_mc(inst: &TinyInstance, target: OracleTarget, mc_replicates: u64, seed: u64) -> Result<ZReport> {
    if mc_replicates == 0 {
        return Err(invalid("at least one replicate is required"));
    }
    let exact = match target {
        OracleTarget::Connection { s, t } => vec![exact_connection_prob(inst, s, t)?],
        OracleTarget::ComponentLaw { x } => exact_component_size_law(inst, x)?,
        OracleTarget::Psi0 => vec![exact_psi0(inst)],
        OracleTarget::ThetaBoundaryReach => vec![exact_boundary_reach(inst)?],
    };
    let mut hits = vec![0u64; exact.len()];
    for r in 0..mc_replicates {
        let (_, edge_seed) = replicate_seeds(seed, r);
        let edges = sample_graph(&inst.weights, &inst.params, SamplingMode::Exact, edge_seed)?.edges;
        for (h, b) in hits.iter_mut().zip(observe(target, inst, &edges)?) {
            *h += b as u64;
        }
    }
    let monte_carlo: Vec<f64> = hits.iter().map(|&h| h as f64 / mc_replicates as f64).collect();
    let z = exact.iter().zip(&monte_carlo).map(|(&e, &f)| z_score(e, f, mc_replicates)).collect();
    Ok(ZReport { target, replicates: mc_replicates, exact, monte_carlo, z })
}

/// A named tiny instance with the target checked on it.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: &'static str,
    pub instance: TinyInstance,
    pub target: OracleTarget,
}

/// Fixed collection of instances covering every target type.
pub fn bundled_suite() -> Vec<SuiteCase> {
    fn case(name: &'static str, region: BoxSpec, w: &[f64], p: (usize, f64, f64, f64), target: OracleTarget) -> SuiteCase {
        let params = ModelParams::new(p.0, p.1, p.2, p.3).expect("suite parameters");
        let instance = TinyInstance::new(region, w.to_vec(), params).expect("suite instance");
        SuiteCase { name, instance, target }
    }
    let line = |n| BoxSpec::at_origin(1, n).unwrap();
    let ball = |r| BoxSpec::centered(vec![0], r).unwrap();
    let square = |n| BoxSpec::at_origin(2, n).unwrap();
    vec![
        case("three_path", line(3), &[1.0; 3], (1, 2.0, 2.0, 1.0), OracleTarget::Connection { s: 0, t: 2 }),
        case("two_vertices", line(2), &[1.7, 3.2], (1, 1.5, 1.0, 0.4), OracleTarget::Connection { s: 0, t: 1 }),
        case("no_edges", line(4), &[1.0, 2.0, 5.0, 1.5], (1, 1.5, 1.0, 0.0), OracleTarget::Connection { s: 0, t: 3 }),
        case("hubs_at_ends", line(6), &[10.0, 1.0, 1.0, 1.0, 1.0, 20.0], (1, 1.5, 2.0, 0.05), OracleTarget::Connection { s: 0, t: 5 }),
        case("square_corners", square(2), &[1.0, 2.0, 1.5, 1.0], (2, 3.0, 2.0, 0.6), OracleTarget::Connection { s: 0, t: 3 }),
        case("line_law", line(6), &[1.0, 2.5, 1.0, 1.3, 4.0, 1.0], (1, 2.5, 1.5, 0.3), OracleTarget::ComponentLaw { x: 2 }),
        case("square_law", square(2), &[3.0, 1.0, 1.0, 1.2], (2, 2.5, 1.0, 0.5), OracleTarget::ComponentLaw { x: 0 }),
        case("dense_law", line(6), &[2.0; 6], (1, 1.2, 3.0, 5.0), OracleTarget::ComponentLaw { x: 0 }),
        case("psi0_line", line(6), &[1.0, 1.4, 2.2, 1.0, 1.1, 3.0], (1, 3.0, 1.5, 0.2), OracleTarget::Psi0),
        case("psi0_square", square(2), &[1.0, 1.0, 2.0, 1.0], (2, 4.5, 2.0, 0.3), OracleTarget::Psi0),
        case("reach_heavy", ball(2), &[1.0, 1.5, 1.0, 6.0, 1.2], (1, 1.5, 1.0, 0.5), OracleTarget::ThetaBoundaryReach),
        case("reach_light", ball(2), &[1.0, 1.1, 1.3, 1.0, 1.0], (1, 3.0, 2.0, 1.0), OracleTarget::ThetaBoundaryReach),
    ]
}

/// Runs every bundled case, seeding case `k` with a stream derived from
/// `seed` and `k`.
pub fn run_bundled_suite(mc_replicates: u64, seed: u64) -> Result<Vec<(SuiteCase, ZReport)>> {
    bundled_suite()
        .into_iter()
        .enumerate()
        .map(|(k, case)| {
            let s = derive_seed(seed, Tag::Probe, k as u64);
            let rep = oracle_vs_mc(&case.instance, case.target, mc_replicates, s)?;
            Ok((case, rep))
        })
        .collect()
}
