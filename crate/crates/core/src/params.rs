//! Model parameters and the analytic phase picture.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{invalid, Error, Result};

/// Parameter tuple `(d, alpha, beta, lambda)` of the model.
///
/// `alpha` controls the decay of edge probabilities with distance, `beta` is
/// the Pareto tail exponent of the vertex weights and `lambda` the
/// percolation intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    d: usize,
    alpha: f64,
    beta: f64,
    lambda: f64,
}

impl ModelParams {
    pub fn new(d: usize, alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension d must be at least 1"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive and finite, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid(format!("beta must be positive and finite, got {beta}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(invalid(format!("lambda must be non-negative and finite, got {lambda}")));
        }
        Ok(ModelParams { d, alpha, beta, lambda })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same model with a different intensity.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        ModelParams::new(self.d, self.alpha, self.beta, lambda)
    }

    /// Degree tail parameter `beta * alpha / d`.
    pub fn tau(&self) -> f64 {
        self.beta * self.alpha / self.d as f64
    }

    /// Distance exponent `log 2 / log(2d / alpha)`, defined for `alpha in (d, 2d)`.
    pub fn distance_exponent(&self) -> Result<f64> {
        let d = self.d as f64;
        if self.alpha > d && self.alpha < 2.0 * d {
            Ok(std::f64::consts::LN_2 / (2.0 * d / self.alpha).ln())
        } else {
            Err(Error::OutOfDomain(format!(
                "distance exponent needs alpha in ({d}, {}), got {}",
                2.0 * d,
                self.alpha
            )))
        }
    }

    /// `alpha * min(beta, 1)`, the effective decay rate of long edges.
    pub fn effective_decay(&self) -> f64 {
        self.alpha * self.beta.min(1.0)
    }
}

/// Qualitative behaviour of the critical intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseClass {
    /// `min(alpha, beta alpha) <= d`: infinite degrees, `lambda_c = 0`.
    Trivial,
    LambdaCZero,
    LambdaCPositiveFinite,
    LambdaCInfinite,
    /// Equality cases not settled analytically.
    Boundary,
}

impl PhaseClass {
    pub const ALL: [PhaseClass; 5] = [
        PhaseClass::Trivial,
        PhaseClass::LambdaCZero,
        PhaseClass::LambdaCPositiveFinite,
        PhaseClass::LambdaCInfinite,
        PhaseClass::Boundary,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseClass::Trivial => "Trivial",
            PhaseClass::LambdaCZero => "LambdaCZero",
            PhaseClass::LambdaCPositiveFinite => "LambdaCPositiveFinite",
            PhaseClass::LambdaCInfinite => "LambdaCInfinite",
            PhaseClass::Boundary => "Boundary",
        }
    }
}

impl fmt::Display for PhaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies `(d, alpha, beta)`; `lambda` plays no role.
pub fn classify_phase(params: &ModelParams) -> PhaseClass {
    let d = params.d as f64;
    let ba = params.beta * params.alpha;
    let low = params.alpha.min(ba);
    if low <= d {
        return PhaseClass::Trivial;
    }
    if ba < 2.0 * d {
        return PhaseClass::LambdaCZero;
    }
    if ba == 2.0 * d {
        return PhaseClass::Boundary;
    }
    if params.d == 1 && low > 2.0 {
        PhaseClass::LambdaCInfinite
    } else if params.d >= 2 || (params.alpha > 1.0 && params.alpha <= 2.0) {
        PhaseClass::LambdaCPositiveFinite
    } else {
        PhaseClass::Boundary
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(d: usize, a: f64, b: f64) -> ModelParams {
        ModelParams::new(d, a, b, 1.0).unwrap()
    }

    #[test]
    fn tau_and_distance_exponent() {
        let m = ModelParams::new(1, 1.5, 2.0, 1.0).unwrap();
        assert_eq!(m.tau(), 3.0);
        // log 2 / log(4/3) evaluated with extended precision: 2.40942083965321...
        assert!((m.distance_exponent().unwrap() - 2.409_420_839_653_209).abs() < 1e-12);
        let n = ModelParams::new(1, 2.5, 2.0, 1.0).unwrap();
        assert!(n.distance_exponent().is_err());
    }

    #[test]
    fn rejects_invalid() {
        assert!(ModelParams::new(0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, -0.1).is_err());
        assert!(ModelParams::new(1, f64::NAN, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(classify_phase(&p(1, 1.5, 1.0)), PhaseClass::LambdaCZero);
        assert_eq!(classify_phase(&p(1, 3.0, 1.0)), PhaseClass::LambdaCInfinite);
        assert_eq!(classify_phase(&p(2, 3.0, 2.0)), PhaseClass::LambdaCPositiveFinite);
        assert_eq!(classify_phase(&p(1, 0.5, 10.0)), PhaseClass::Trivial);
    }

    #[test]
    fn phase_edge_cases() {
        // min(alpha, beta alpha) = d is covered by the trivial case
        assert_eq!(classify_phase(&p(1, 1.0, 3.0)), PhaseClass::Trivial);
        assert_eq!(classify_phase(&p(2, 4.0, 0.5)), PhaseClass::Trivial);
        // beta alpha = 2d
        assert_eq!(classify_phase(&p(1, 1.25, 1.6)), PhaseClass::Boundary);
        assert_eq!(classify_phase(&p(2, 4.0, 1.0)), PhaseClass::Boundary);
        assert_eq!(classify_phase(&p(2, 2.0, 2.0)), PhaseClass::Trivial);
        // d = 1, alpha = 2, beta alpha > 2
        assert_eq!(classify_phase(&p(1, 2.0, 2.0)), PhaseClass::LambdaCPositiveFinite);
        // d = 1, alpha > 2 but beta alpha in (2, ...)
        assert_eq!(classify_phase(&p(1, 2.5, 1.0)), PhaseClass::LambdaCInfinite);
        assert_eq!(classify_phase(&p(3, 10.0, 10.0)), PhaseClass::LambdaCPositiveFinite);
    }

    proptest! {
        #[test]
        fn classification_ignores_lambda(d in 1usize..4, a in 0.1f64..8.0, b in 0.1f64..8.0,
                                         l1 in 0.0f64..100.0, l2 in 0.0f64..100.0) {
            let x = ModelParams::new(d, a, b, l1).unwrap();
            let y = ModelParams::new(d, a, b, l2).unwrap();
            prop_assert_eq!(classify_phase(&x), classify_phase(&y));
        }
    }
}
