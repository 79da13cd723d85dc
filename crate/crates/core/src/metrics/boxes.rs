use rayon::prelude::*;
use serde::Serialize;

use super::{replicate_weights, DEFAULT_CONFIDENCE};
use crate::cluster::{components, largest_root};
use crate::edges::{sample_graph, SamplingMode};
use crate::error::{invalid, Result};
use crate::lattice::BoxSpec;
use crate::params::ModelParams;
use crate::stats::{wilson, z_for_confidence, Proportion};

/// Lower bound `1 - exp(-rho m^(2d - alpha'))` on `P[|C_m| >= rho |B_m|]`.
pub fn box_theorem_bound(d: usize, alpha_prime: f64, rho: f64, m: usize) -> f64 {
    -(-rho * (m as f64).powf(2.0 * d as f64 - alpha_prime)).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCheckRow {
    pub m: usize,
    pub rho: f64,
    pub frequency: Proportion,
    pub bound: f64,
    /// The interval lies entirely below the bound.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxTheoremReport {
    pub alpha_prime: f64,
    pub lambda: f64,
    pub replicates: u64,
    /// Rows ordered by `m`, then by `rho` as given.
    pub rows: Vec<BoxCheckRow>,
}

impl BoxTheoremReport {
    /// Values of `rho` for which no `m` raised a flag.
    pub fn unflagged_rhos(&self) -> Vec<f64> {
        self.rhos().into_iter().filter(|&r| self.rows_for(r).all(|row| !row.flagged)).collect()
    }

    /// Values of `rho` whose interval lies above the bound at every `m`.
    pub fn dominating_rhos(&self) -> Vec<f64> {
        self.rhos()
            .into_iter()
            .filter(|&r| self.rows_for(r).all(|row| row.frequency.ci_low > row.bound))
            .collect()
    }

    fn rhos(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for row in &self.rows {
            if !v.contains(&row.rho) {
                v.push(row.rho);
            }
        }
        v
    }

    fn rows_for(&self, rho: f64) -> impl Iterator<Item = &BoxCheckRow> {
        self.rows.iter().filter(move |row| row.rho == rho)
    }
}

/// Empirical frequency of `|C_m| >= rho m^d` for the largest component
/// `C_m` of `B_m = [0, m-1]^d`, next to the finite-box lower bound.
pub fn box_theorem_check(
    params: &ModelParams,
    alpha_prime: f64,
    rho_grid: &[f64],
    m_list: &[usize],
    replicates: u64,
    base_seed: u64,
) -> Result<BoxTheoremReport> {
    let d = params.d() as f64;
    let alpha = params.alpha();
    if !(alpha > d && alpha < 2.0 * d) {
        return Err(invalid(format!("alpha must lie in (d, 2d), got {alpha}")));
    }
    if !(alpha_prime > alpha && alpha_prime < 2.0 * d) {
        return Err(invalid(format!("alpha' must lie in (alpha, 2d) = ({alpha}, {}), got {alpha_prime}", 2.0 * d)));
    }
    if rho_grid.is_empty() || rho_grid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(invalid("rho values must lie in (0, 1]"));
    }
    if m_list.is_empty() || m_list.contains(&0) || replicates == 0 {
        return Err(invalid("need positive box sides and at least one replicate"));
    }
    let z = z_for_confidence(DEFAULT_CONFIDENCE);
    let mut rows = Vec::new();
    for (k, &m) in m_list.iter().enumerate() {
        let region = BoxSpec::at_origin(params.d(), m)?;
        let seed = base_seed.wrapping_add(k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let largest: Vec<usize> = (0..replicates)
            .into_par_iter()
            .map(|r| -> Result<usize> {
                let (weights, edge_seed) = replicate_weights(&region, params, seed, r)?;
                let sample = sample_graph(&weights, params, SamplingMode::Exact, edge_seed)?;
                Ok(largest_root(&components(&sample.edges)).1)
            })
            .collect::<Result<_>>()?;
        let vol = region.len() as f64;
        for &rho in rho_grid {
            let s = largest.iter().filter(|&&c| c as f64 >= rho * vol).count() as u64;
            let frequency = wilson(s, replicates, z);
            let bound = box_theorem_bound(params.d(), alpha_prime, rho, m);
            rows.push(BoxCheckRow { m, rho, frequency, bound, flagged: frequency.ci_high < bound });
        }
    }
    Ok(BoxTheoremReport { alpha_prime, lambda: params.lambda(), replicates, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_value() {
        let b = box_theorem_bound(1, 1.9, 0.01, 100);
        let direct = 1.0 - (-0.01 * 100f64.powf(0.1)).exp();
        assert!((b - direct).abs() < 1e-15);
        assert!((b - 0.015_723_998_494_309_055).abs() < 1e-15, "{b}");
    }

    #[test]
    fn validation() {
        let p = ModelParams::new(1, 1.5, 2.0, 1.0).unwrap();
        assert!(box_theorem_check(&p, 1.4, &[0.1], &[8], 5, 0).is_err());
        assert!(box_theorem_check(&p, 2.0, &[0.1], &[8], 5, 0).is_err());
        let q = ModelParams::new(1, 3.0, 2.0, 1.0).unwrap();
        assert!(box_theorem_check(&q, 1.9, &[0.1], &[8], 5, 0).is_err());
    }

    #[test]
    fn tiny_rho_always_holds_and_monotone() {
        let p = ModelParams::new(1, 1.5, 2.0, 0.5).unwrap();
        let rep = box_theorem_check(&p, 1.9, &[1e-9, 0.1, 0.5, 1.0], &[16, 32], 40, 2).unwrap();
        for m in [16, 32] {
            let f: Vec<f64> = rep.rows.iter().filter(|r| r.m == m).map(|r| r.frequency.estimate).collect();
            assert_eq!(f[0], 1.0);
            assert!(f.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
