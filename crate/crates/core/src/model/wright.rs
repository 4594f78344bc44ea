use super::{DdeSystem, HopfHint};
use crate::error::Result;
use crate::series::ModelScalar;

/// Scalar delayed-logistic (Wright) equation `x' = −x(t − λ)·(1 + x)`.
///
/// The origin loses stability at `λ = π/2` with frequency 1; the born orbit
/// has period close to 4λ. Small enough to check results by hand.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wright;

impl DdeSystem for Wright {
    fn name(&self) -> &str {
        "wright"
    }

    fn dim(&self) -> usize {
        1
    }

    fn rhs<T: ModelScalar>(&self, _lambda: &T, x: &[T], y: &[T]) -> Result<Vec<T>> {
        Ok(vec![-(y[0].clone() * (x[0].clone() + 1.0))])
    }

    fn equilibrium_hint(&self, _lambda: f64) -> Vec<f64> {
        vec![0.0]
    }

    fn hopf_hint(&self) -> HopfHint {
        HopfHint { omega: 0.9, lambda: 1.4 }
    }
}
