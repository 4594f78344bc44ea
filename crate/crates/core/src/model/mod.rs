//! Single-delay DDE systems `x'(t) = g(λ, x(t), x(t − λ))`, their equilibria
//! and linearizations.

mod config;
mod ndde;
mod sir;
mod wright;

pub use config::{BuiltinModel, HopfHintConfig, ModelConfig};
pub use ndde::{Ndde, NddeParams};
pub use sir::{sir_r0, Sir, SirParams};
pub use wright::Wright;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{ModelScalar, ScalarSeries};

const EQUILIBRIUM_MAX_ITER: usize = 50;

/// Starting point for the Hopf search: angular frequency and delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfHint {
    pub omega: f64,
    pub lambda: f64,
}

/// A single-delay DDE whose delay is also the bifurcation parameter.
///
/// `rhs` is written once against [`ModelScalar`] and is then evaluated on
/// reals, on real-coefficient series (Jacobians, equilibrium branches) and on
/// trigonometric series (perturbation orders).
pub trait DdeSystem: Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn rhs<T: ModelScalar>(&self, lambda: &T, x: &[T], y: &[T]) -> Result<Vec<T>>;

    /// Newton start for the equilibrium at `lambda`.
    fn equilibrium_hint(&self, lambda: f64) -> Vec<f64>;

    fn hopf_hint(&self) -> HopfHint;

    fn state_labels(&self) -> Vec<String> {
        (1..=self.dim()).map(|i| format!("x{i}")).collect()
    }

    /// Units of time, for table headers.
    fn time_unit(&self) -> &str {
        "time"
    }

    /// Constant history used to start reference integrations, given the
    /// equilibrium at the delay of interest.
    fn integration_history(&self, equilibrium: &[f64]) -> Vec<f64> {
        let mut h = equilibrium.to_vec();
        h[0] += 1e-5;
        if h.len() > 1 {
            h[1] -= 1e-5;
        }
        h
    }
}

/// Jacobians of `g` in the instantaneous (`p`) and delayed (`q`) arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub equilibrium: Vec<f64>,
}

fn check_dim(model: &impl DdeSystem, v: &[f64]) -> Result<()> {
    if v.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: v.len() });
    }
    Ok(())
}

/// Jacobians at an arbitrary point `(x, y)`, by first-order series probing.
pub fn jacobians(model: &impl DdeSystem, lambda: f64, x: &[f64], y: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dim(model, x)?;
    check_dim(model, y)?;
    let n = model.dim();
    let lam = ScalarSeries::from_slice(&[lambda, 0.0]);
    let base = |v: &[f64]| -> Vec<ScalarSeries> { v.iter().map(|c| ScalarSeries::from_slice(&[*c, 0.0])).collect() };
    let mut p = DMatrix::zeros(n, n);
    let mut q = DMatrix::zeros(n, n);
    for col in 0..n {
        for (target, delayed) in [(&mut p, false), (&mut q, true)] {
            let mut xs = base(x);
            let mut ys = base(y);
            let probe = if delayed { &mut ys } else { &mut xs };
            probe[col] = ScalarSeries::from_slice(&[if delayed { y[col] } else { x[col] }, 1.0]);
            let out = model.rhs(&lam, &xs, &ys)?;
            for (row, s) in out.iter().enumerate() {
                target[(row, col)] = s.coeffs()[1];
            }
        }
    }
    Ok((p, q))
}

/// Equilibrium `x*` with `g(λ, x*, x*) = 0`, by Newton from the model's hint.
pub fn equilibrium(model: &impl DdeSystem, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidInput(format!("delay must be non-negative, got {lambda}")));
    }
    let mut x = DVector::from_vec(model.equilibrium_hint(lambda));
    check_dim(model, x.as_slice())?;
    let mut converged = false;
    let mut polish = 0;
    for _ in 0..EQUILIBRIUM_MAX_ITER {
        let g = DVector::from_vec(model.rhs(&lambda, x.as_slice(), x.as_slice())?);
        let (p, q) = jacobians(model, lambda, x.as_slice(), x.as_slice())?;
        let dx = (p + q).lu().solve(&(-&g)).ok_or(Error::SingularJacobian("solving for the equilibrium"))?;
        x += &dx;
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
        if dx.amax() <= 1e-13 * (1.0 + x.amax()) {
            // A couple of extra sweeps take the residual to round-off.
            polish += 1;
            if polish == 2 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::EquilibriumNonConvergence { lambda, iterations: EQUILIBRIUM_MAX_ITER });
    }
    Ok(x.as_slice().to_vec())
}

/// Equilibrium branch `x*(λ(ε))` as series, solved order by order.
pub fn equilibrium_series(model: &impl DdeSystem, lambda: &ScalarSeries) -> Result<Vec<ScalarSeries>> {
    let n = lambda.order();
    let lambda0 = lambda.coeffs()[0];
    let x0 = equilibrium(model, lambda0)?;
    let (p, q) = jacobians(model, lambda0, &x0, &x0)?;
    let lu = (p + q).lu();
    if lu.determinant() == 0.0 {
        return Err(Error::SingularJacobian("expanding the equilibrium branch"));
    }
    let mut coeffs: Vec<Vec<f64>> = x0.iter().map(|v| vec![*v]).collect();
    for k in 1..=n {
        let lam_k = lambda.with_order(k);
        let xs: Vec<ScalarSeries> = coeffs
            .iter()
            .map(|c| {
                let mut v = c.clone();
                v.push(0.0);
                ScalarSeries::from_slice(&v)
            })
            .collect();
        let r = model.rhs(&lam_k, &xs, &xs)?;
        let rk = DVector::from_iterator(r.len(), r.iter().map(|s| s.coeffs()[k]));
        let xk = lu.solve(&(-rk)).ok_or(Error::SingularJacobian("expanding the equilibrium branch"))?;
        for (c, v) in coeffs.iter_mut().zip(xk.iter()) {
            c.push(*v);
        }
    }
    Ok(coeffs.into_iter().map(ScalarSeries::new).collect())
}

/// `P(λ)`, `Q(λ)` at the λ-dependent equilibrium.
pub fn linearization(model: &impl DdeSystem, lambda: f64) -> Result<Linearization> {
    let x = equilibrium(model, lambda)?;
    let (p, q) = jacobians(model, lambda, &x, &x)?;
    Ok(Linearization { p, q, equilibrium: x })
}
