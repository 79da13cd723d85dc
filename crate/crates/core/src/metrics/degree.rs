use std::collections::BTreeMap;

use serde::Serialize;

use super::DEFAULT_CONFIDENCE;
use crate::edges::EdgeList;
use crate::error::{invalid, Error, Result};
use crate::stats::z_for_confidence;

/// Per-vertex direct-edge degrees of a sampled graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeHistogram {
    /// Degree of every counted vertex, in vertex order.
    pub degrees: Vec<u32>,
    /// Number of counted vertices per degree.
    pub counts: BTreeMap<u32, u64>,
    /// Vertices closer than this (sup distance) to the region's faces were skipped.
    pub interior_margin: usize,
}

impl DegreeHistogram {
    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree_sum(&self) -> u64 {
        self.degrees.iter().map(|&k| k as u64).sum()
    }
}

/// Degrees of all vertices, or of those at least `interior_margin` from
/// every face when a margin is given.
pub fn degree_histogram(edges: &EdgeList, interior_margin: Option<usize>) -> DegreeHistogram {
    let region = edges.region();
    let mut deg = vec![0u32; region.len()];
    for &(a, b) in edges.edges() {
        deg[a as usize] += 1;
        deg[b as usize] += 1;
    }
    let margin = interior_margin.unwrap_or(0);
    let side = region.side() as i64;
    let low = region.low().to_vec();
    let keep = |v: usize| {
        margin == 0
            || region.coord(v).iter().zip(&low).all(|(&c, &l)| {
                let off = c - l;
                off >= margin as i64 && off < side - margin as i64
            })
    };
    let degrees: Vec<u32> = (0..region.len()).filter(|&v| keep(v)).map(|v| deg[v]).collect();
    let mut counts = BTreeMap::new();
    for &k in &degrees {
        *counts.entry(k).or_insert(0) += 1;
    }
    DegreeHistogram { degrees, counts, interior_margin: margin }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeTailEstimate {
    pub tau_hat: f64,
    pub k_top: usize,
    pub ci: (f64, f64),
    pub theoretical_tau: Option<f64>,
}

/// Hill estimate of the survival exponent from the `k` largest values:
/// `k / sum_{i<k} ln(X_(i) / X_(k))` with `X_(0) >= X_(1) >= ...`.
pub fn hill_estimator(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let mut v: Vec<f64> = values.iter().copied().filter(|x| *x > 0.0).collect();
    if v.len() < k + 1 {
        return Err(Error::Degenerate(format!(
            "need {} positive values for k = {k}, have {}",
            k + 1,
            v.len()
        )));
    }
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = v[k];
    let s: f64 = v[..k].iter().map(|x| (x / threshold).ln()).sum();
    if !(s > 0.0) {
        return Err(Error::Degenerate("top order statistics are all equal".into()));
    }
    Ok(k as f64 / s)
}

/// Hill estimator on the top `k_top` degrees (default `ceil(sqrt(N))` over
/// the nonzero degrees) with interval `tau_hat (1 -+ z / sqrt(k))`.
pub fn tail_exponent(hist: &DegreeHistogram, k_top: Option<usize>) -> Result<DegreeTailEstimate> {
    let values: Vec<f64> = hist.degrees.iter().filter(|&&k| k > 0).map(|&k| k as f64).collect();
    let k = k_top.unwrap_or_else(|| (values.len() as f64).sqrt().ceil() as usize);
    if k < 10 {
        return Err(invalid(format!("k_top must be at least 10, got {k}")));
    }
    let tau_hat = hill_estimator(&values, k)?;
    let z = z_for_confidence(DEFAULT_CONFIDENCE);
    let half = z / (k as f64).sqrt();
    Ok(DegreeTailEstimate {
        tau_hat,
        k_top: k,
        ci: (tau_hat * (1.0 - half), tau_hat * (1.0 + half)),
        theoretical_tau: None,
    })
}

/// Least-squares slope of `ln P[D >= k]` against `ln k` over the degrees at
/// or above the `1 - upper_fraction` empirical quantile, negated.
pub fn loglog_tail_slope(hist: &DegreeHistogram, upper_fraction: f64) -> Result<f64> {
    if !(upper_fraction > 0.0 && upper_fraction <= 1.0) {
        return Err(invalid("upper fraction must lie in (0, 1]"));
    }
    let n = hist.degrees.len() as f64;
    let mut above = 0u64;
    let mut pts = Vec::new();
    for (&k, &c) in hist.counts.iter().rev() {
        above += c;
        if k > 0 && above as f64 / n <= upper_fraction {
            pts.push(((k as f64).ln(), (above as f64 / n).ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::Degenerate("too few distinct tail degrees for a regression".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}
