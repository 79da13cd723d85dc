use rayon::prelude::*;
use serde::Serialize;

use super::replicate_weights;
use crate::edges::CoupledEdgeField;
use crate::error::{invalid, Error, Result};
use crate::lattice::BoxSpec;
use crate::params::{classify_phase, ModelParams, PhaseClass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCConfig {
    /// Frequency of the boundary-reach event taken as the crossing.
    pub crossing_level: f64,
    /// Target bracket width.
    pub tol: f64,
    pub replicates: u64,
    pub base_seed: u64,
    /// First upper probe; doubled until the frequency reaches the level.
    pub initial_upper: f64,
    pub max_doublings: u32,
}

impl Default for LambdaCConfig {
    fn default() -> Self {
        LambdaCConfig {
            crossing_level: 0.5,
            tol: 0.05,
            replicates: 200,
            base_seed: 0,
            initial_upper: 1.0,
            max_doublings: 40,
        }
    }
}

/// Bracket `[lo, hi]` with `freq(lo) < level <= freq(hi)` at one box radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCBracket {
    pub box_radius: usize,
    pub lo: f64,
    pub hi: f64,
    pub freq_lo: f64,
    pub freq_hi: f64,
    pub probes: u32,
}

impl LambdaCBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn overlaps(&self, other: &LambdaCBracket) -> bool {
        self.lo.max(other.lo) <= self.hi.min(other.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCReport {
    pub class: PhaseClass,
    pub crossing_level: f64,
    pub replicates: u64,
    /// One bracket per radius, in the order given.
    pub brackets: Vec<LambdaCBracket>,
}

impl LambdaCReport {
    /// Bracket at the largest radius.
    pub fn final_bracket(&self) -> &LambdaCBracket {
        self.brackets.iter().max_by_key(|b| b.box_radius).expect("non-empty report")
    }

    pub fn all_overlap(&self) -> bool {
        let lo = self.brackets.iter().map(|b| b.lo).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.brackets.iter().map(|b| b.hi).fold(f64::INFINITY, f64::min);
        lo <= hi
    }
}

/// Smallest intensity at which the origin's component reaches a face of the
/// field's (centered) box, i.e. the event holds exactly for `ell` above the
/// returned value. `None` if it does not happen among the retained pairs.
pub fn reach_threshold(field: &CoupledEdgeField, origin: usize) -> Option<f64> {
    let region = field.region();
    let n = region.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut touches: Vec<bool> = (0..n).map(|v| region.on_boundary(v)).collect();
    fn find(parent: &mut [u32], mut x: usize) -> usize {
        while parent[x] as usize != x {
            let p = parent[x] as usize;
            parent[x] = parent[p];
            x = p;
        }
        x
    }
    if touches[origin] {
        return Some(0.0);
    }
    for &(phi, i, j) in field.retained() {
        let a = find(&mut parent, i as usize);
        let b = find(&mut parent, j as usize);
        if a == b {
            continue;
        }
        parent[a] = b as u32;
        touches[b] |= touches[a];
        if touches[b] && find(&mut parent, origin) == b {
            return Some(phi);
        }
    }
    None
}

fn thresholds(
    params: &ModelParams,
    region: &BoxSpec,
    origin: usize,
    cfg: &LambdaCConfig,
    upper: f64,
) -> Result<Vec<f64>> {
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let (weights, edge_seed) = replicate_weights(region, params, cfg.base_seed, r)?;
            let field = CoupledEdgeField::with_sweep(weights, params.alpha(), edge_seed, None, upper)?;
            Ok(reach_threshold(&field, origin).unwrap_or(f64::INFINITY))
        })
        .collect()
}

fn frequency(th: &[f64], ell: f64) -> f64 {
    th.iter().filter(|&&t| t < ell).count() as f64 / th.len() as f64
}

/// Brackets the intensity at which the boundary-reach frequency crosses the
/// configured level, separately for each radius.
///
/// All probes at one radius read the same coupled replicates, so the
/// frequency is a non-decreasing step function of lambda and the bisection
/// is consistent. Parameters whose critical intensity is known in closed
/// form are refused with [`Error::AnalyticPhase`].
pub fn estimate_lambda_c(params: &ModelParams, box_radii: &[usize], cfg: &LambdaCConfig) -> Result<LambdaCReport> {
    let class = classify_phase(params);
    match class {
        PhaseClass::LambdaCPositiveFinite => {}
        PhaseClass::LambdaCZero | PhaseClass::Trivial => {
            return Err(Error::AnalyticPhase { class: class.as_str().into(), answer: "0".into() })
        }
        PhaseClass::LambdaCInfinite => {
            return Err(Error::AnalyticPhase { class: class.as_str().into(), answer: "infinity".into() })
        }
        PhaseClass::Boundary => {
            return Err(invalid("boundary parameters: the phase is not determined, refusing to bisect"))
        }
    }
    if !(cfg.crossing_level > 0.0 && cfg.crossing_level <= 1.0) {
        return Err(invalid("crossing level must lie in (0, 1]"));
    }
    if !(cfg.tol > 0.0) || !(cfg.initial_upper > 0.0) || cfg.replicates == 0 {
        return Err(invalid("tol, initial upper bound and replicate count must be positive"));
    }
    if box_radii.is_empty() || box_radii.contains(&0) {
        return Err(invalid("need at least one positive box radius"));
    }
    let mut brackets = Vec::with_capacity(box_radii.len());
    for &radius in box_radii {
        let region = BoxSpec::centered(vec![0; params.d()], radius)?;
        let origin = region.require_index(&vec![0; params.d()])?;
        let mut hi = cfg.initial_upper;
        let mut probes = 1;
        let mut th = thresholds(params, &region, origin, cfg, hi)?;
        let mut doublings = 0;
        while frequency(&th, hi) < cfg.crossing_level {
            if doublings == cfg.max_doublings {
                return Err(Error::Budget(format!(
                    "boundary-reach frequency stayed below {} up to lambda = {hi} at radius {radius}",
                    cfg.crossing_level
                )));
            }
            hi *= 2.0;
            doublings += 1;
            probes += 1;
            th = thresholds(params, &region, origin, cfg, hi)?;
        }
        let mut lo = 0.0;
        while hi - lo > cfg.tol {
            let mid = 0.5 * (lo + hi);
            probes += 1;
            if frequency(&th, mid) >= cfg.crossing_level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        brackets.push(LambdaCBracket {
            box_radius: radius,
            lo,
            hi,
            freq_lo: frequency(&th, lo),
            freq_hi: frequency(&th, hi),
            probes,
        });
    }
    Ok(LambdaCReport { class, crossing_level: cfg.crossing_level, replicates: cfg.replicates, brackets })
}
