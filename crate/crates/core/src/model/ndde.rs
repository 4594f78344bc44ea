use serde::{Deserialize, Serialize};

use super::{DdeSystem, HopfHint};
use crate::error::Result;
use crate::series::ModelScalar;

/// Car-following parameters (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NddeParams {
    /// Maximum acceleration, m/s².
    pub a: f64,
    /// Maximum deceleration, m/s².
    pub b: f64,
    /// Leader velocity, m/s. Only fixes the safe distance; does not enter the dynamics.
    pub v0: f64,
    /// Safe distance at `v0`, m.
    #[serde(rename = "M")]
    pub m: f64,
    /// Response intensity of the car-driver ensemble.
    pub d: f64,
    /// Sensitivity to relative velocity, s.
    #[serde(rename = "K")]
    pub k: f64,
}

impl Default for NddeParams {
    fn default() -> Self {
        NddeParams { a: 2.0576, b: 1.5677, v0: 22.2222, m: 44.4444, d: 0.1124, k: 11.3890 }
    }
}

/// Two-car follow-the-leader model with a sigmoid, delayed response, in
/// first-order form around its equilibrium:
///
/// ```text
/// x₁' = x₂
/// x₂' = −a + (a + b) / (1 + (b/a)·exp(d·(x₁(t−λ) + K x₂(t−λ))))
/// ```
///
/// `x₁ = s − M` is the gap deviation and `x₂ = s'` the relative velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Ndde {
    params: NddeParams,
}

impl Ndde {
    pub fn new(params: NddeParams) -> Self {
        Ndde { params }
    }

    pub fn params(&self) -> &NddeParams {
        &self.params
    }

    /// Linear gain `D = d·ab/(a+b)` of the delayed feedback.
    pub fn gain(&self) -> f64 {
        let p = &self.params;
        p.d * p.a * p.b / (p.a + p.b)
    }
}

impl DdeSystem for Ndde {
    fn name(&self) -> &str {
        "ndde"
    }

    fn dim(&self) -> usize {
        2
    }

    fn rhs<T: ModelScalar>(&self, _lambda: &T, x: &[T], y: &[T]) -> Result<Vec<T>> {
        let p = &self.params;
        let arg = (y[0].clone() + y[1].clone() * p.k) * p.d;
        let denom = arg.try_exp()? * (p.b / p.a) + 1.0;
        let accel = denom.constant_like(p.a + p.b).try_div(&denom)? - p.a;
        Ok(vec![x[1].clone(), accel])
    }

    fn equilibrium_hint(&self, _lambda: f64) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn hopf_hint(&self) -> HopfHint {
        HopfHint { omega: 1.1, lambda: 1.3 }
    }

    fn state_labels(&self) -> Vec<String> {
        vec!["x1 [m]".into(), "x2 [m/s]".into()]
    }

    fn time_unit(&self) -> &str {
        "s"
    }

    /// A gap 20 m above the safe distance, closing at 17.22 m/s.
    fn integration_history(&self, _equilibrium: &[f64]) -> Vec<f64> {
        vec![20.0, 17.22]
    }
}
