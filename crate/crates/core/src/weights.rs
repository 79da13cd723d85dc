//! Pareto vertex weights with survival function `w^-beta` on `[1, inf)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::BoxSpec;
use crate::rng::{Stream, Tag};

/// Inverse survival function of the Pareto law: `u^(-1/beta)`.
pub fn pareto_quantile(u: f64, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(invalid(format!("u must lie in (0, 1], got {u}")));
    }
    Ok(u.powf(-1.0 / beta))
}

/// Realized weights on a box, one per vertex in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    region: BoxSpec,
    weights: Vec<f64>,
    seed: Option<u64>,
}

impl WeightField {
    /// Explicit weights, e.g. for conditioning on a fixed assignment.
    pub fn from_values(region: BoxSpec, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != region.len() {
            return Err(invalid(format!(
                "{} weights supplied for a box of {} vertices",
                weights.len(),
                region.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 1.0)) {
            return Err(invalid(format!("weights must be finite and at least 1, got {w}")));
        }
        Ok(WeightField { region, weights, seed: None })
    }

    /// Every vertex carries the same weight; `1.0` gives the homogeneous model.
    pub fn constant(region: BoxSpec, w: f64) -> Result<Self> {
        let n = region.len();
        Self::from_values(region, vec![w; n])
    }

    pub fn region(&self) -> &BoxSpec {
        &self.region
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Draws i.i.d. Pareto(beta) weights keyed by `(seed, vertex index)`.
pub fn sample_weights(region: &BoxSpec, beta: f64, seed: u64) -> Result<WeightField> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let stream = Stream::new(seed, Tag::Weight);
    let exponent = -1.0 / beta;
    let weights = (0..region.len() as u64)
        .map(|i| stream.uniform(i).powf(exponent))
        .collect();
    Ok(WeightField { region: region.clone(), weights, seed: Some(seed) })
}
