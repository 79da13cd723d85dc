//! Expected long-edge counts and the power-law tail bound built on them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::BoxSpec;
use crate::params::ModelParams;

/// `E[min(W1 W2 / u, 1)]` for independent Pareto(beta) weights.
///
/// For `u > 1` this is `(1/u) (1 + int_1^u v^-beta (1 + beta ln v) dv)`,
/// using the survival function of the product `v^-beta (1 + beta ln v)`.
pub fn pair_connection_expectation(u: f64, beta: f64) -> f64 {
    if u <= 1.0 {
        return 1.0;
    }
    if u.is_infinite() {
        return 0.0;
    }
    let a = 1.0 - beta;
    let l = u.ln();
    let al = a * l;
    // int_1^u v^-beta dv and int_1^u v^-beta ln v dv with v = e^t
    let (i1, i2) = if al.abs() < 0.1 {
        let mut term1 = l; // a^k L^(k+1) / (k+1)!
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut pow = 1.0; // (aL)^k / k!
        for k in 0..40 {
            let kf = k as f64;
            s1 += term1;
            s2 += pow * l * l / (kf + 2.0);
            pow *= al / (kf + 1.0);
            term1 *= al / (kf + 2.0);
            if pow.abs() < 1e-20 {
                break;
            }
        }
        (s1, s2)
    } else {
        let e = al.exp();
        ((al).exp_m1() / a, (e * (al - 1.0) + 1.0) / (a * a))
    };
    (1.0 + i1 + beta * i2) / u
}

/// Expected value of `min(lambda W_x W_y / r^alpha, 1)` for one pair.
pub fn pair_bound_at(params: &ModelParams, dist: f64) -> f64 {
    if params.lambda() == 0.0 {
        return 0.0;
    }
    pair_connection_expectation(dist.powf(params.alpha()) / params.lambda(), params.beta())
}

/// Sum of [`pair_bound_at`] over in-box pairs with `r_lo < |x-y| <= r_hi`.
pub fn shell_expectation(region: &BoxSpec, params: &ModelParams, r_lo: f64, r_hi: f64) -> f64 {
    if params.lambda() == 0.0 || r_hi <= r_lo {
        return 0.0;
    }
    let d = region.d();
    let m = region.side();
    let (lo2, hi2) = (r_lo * r_lo, r_hi * r_hi);
    // enumerate non-negative displacement vectors; each stands for
    // prod (m - delta_k) * 2^(#nonzero) ordered pairs
    let mut delta = vec![0usize; d];
    let mut total = 0.0;
    loop {
        let d2: u64 = delta.iter().map(|&c| (c * c) as u64).sum();
        let d2f = d2 as f64;
        if d2 > 0 && d2f > lo2 && d2f <= hi2 {
            let mut ordered = 1.0;
            for &c in &delta {
                ordered *= (m - c) as f64 * if c > 0 { 2.0 } else { 1.0 };
            }
            total += 0.5 * ordered * pair_bound_at(params, d2f.sqrt());
        }
        let mut k = d;
        loop {
            if k == 0 {
                return total;
            }
            k -= 1;
            if delta[k] + 1 < m {
                delta[k] += 1;
                break;
            }
            delta[k] = 0;
        }
    }
}

/// Upper bound on the expected number of occupied edges longer than
/// `radius`, i.e. the edges a truncated sampler drops.
pub fn truncation_error_bound(region: &BoxSpec, params: &ModelParams, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(shell_expectation(region, params, radius, f64::INFINITY))
}

/// Constants of the long-edge tail bound `c1 s^d t^(d - alpha min(beta,1) + delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub delta: f64,
    pub c1: f64,
    pub t0: f64,
}

impl TailBoundParams {
    pub fn new(params: &ModelParams, delta: f64, c1: f64, t0: f64) -> Result<Self> {
        let gap = params.effective_decay() - params.d() as f64;
        if !(delta > 0.0 && delta < gap) {
            return Err(invalid(format!("delta must lie in (0, {gap}), got {delta}")));
        }
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(invalid(format!("c1 must be positive, got {c1}")));
        }
        if !(t0 > 0.0) {
            return Err(invalid(format!("t0 must be positive, got {t0}")));
        }
        Ok(TailBoundParams { delta, c1, t0 })
    }

    /// `d - alpha min(beta,1) + delta`.
    pub fn exponent(&self, params: &ModelParams) -> f64 {
        params.d() as f64 - params.effective_decay() + self.delta
    }

    /// Calibrates the constants for `params`.
    ///
    /// `delta` defaults to half of `alpha min(beta,1) - d`, `t0` is
    /// `max(1, lambda^(1/alpha))` and `c1` solves the bound with equality
    /// against the exact pair sum on a box of side `s_ref` at `t = t0`.
    pub fn calibrate(params: &ModelParams, delta: Option<f64>, s_ref: usize) -> Result<Self> {
        let gap = params.effective_decay() - params.d() as f64;
        if !(gap > 0.0) {
            return Err(invalid(format!(
                "tail bound needs alpha min(beta,1) > d, got {}",
                params.effective_decay()
            )));
        }
        let delta = delta.unwrap_or(gap / 2.0).clamp(gap * 1e-6, gap * (1.0 - 1e-6));
        let t0 = if params.lambda() > 0.0 {
            params.lambda().powf(1.0 / params.alpha()).max(1.0)
        } else {
            1.0
        };
        let region = BoxSpec::at_origin(params.d(), s_ref.max(1))?;
        let exact = shell_expectation(&region, params, t0, f64::INFINITY);
        let d = params.d() as f64;
        let exponent = d - params.effective_decay() + delta;
        let c1 = (exact / ((s_ref.max(1) as f64).powf(d) * t0.powf(exponent))).max(f64::MIN_POSITIVE);
        TailBoundParams::new(params, delta, c1, t0)
    }
}

/// `min(1, c1 s^d t^(d - alpha min(beta,1) + delta))`.
pub fn tail_edge_bound(s: f64, t: f64, tail: &TailBoundParams, params: &ModelParams) -> Result<f64> {
    let exponent = tail.exponent(params);
    if exponent >= 0.0 {
        return Err(invalid(format!("tail exponent must be negative, got {exponent}")));
    }
    if !(s >= 1.0) {
        return Err(invalid(format!("s must be at least 1, got {s}")));
    }
    if !(t >= tail.t0) {
        return Err(invalid(format!("t must be at least t0 = {}, got {t}", tail.t0)));
    }
    Ok((tail.c1 * s.powf(params.d() as f64) * t.powf(exponent)).min(1.0))
}
