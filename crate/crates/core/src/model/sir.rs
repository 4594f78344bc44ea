use serde::{Deserialize, Serialize};

use super::{DdeSystem, HopfHint};
use crate::error::Result;
use crate::series::ModelScalar;

/// Epidemic parameters; rates are per day, populations in millions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    /// Output rate of the infected state, /day.
    pub alpha: f64,
    /// Contagion rate, /(infected · susceptible · day).
    pub beta: f64,
    /// Natural death rate, /day.
    pub mu: f64,
    /// Fraction of the infected output that recovers.
    pub f: f64,
    /// Maximum population, 10⁶ persons.
    pub p_max: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        SirParams { alpha: 0.1, beta: 0.01, mu: 1e-4, f: 0.98, p_max: 30.0 }
    }
}

/// Basic reproduction number `β P_max / (μ + α)`.
pub fn sir_r0(params: &SirParams) -> f64 {
    params.beta * params.p_max / (params.mu + params.alpha)
}

/// SIR model with births, deaths and immunity lasting exactly λ days.
/// State order is `(I, S, R)`:
///
/// ```text
/// I' = βSI − μI − αI
/// S' = Λ(P) − βSI − μS + fα(1 − μλ) I(t−λ)
/// R' = −μR + fαI − fα(1 − μλ) I(t−λ)
/// ```
///
/// with `P = I + S + R` and `Λ(P) = μ(1 + P_max)P / (1 + P)`.
///
/// The factor `1 − μλ` is used as written; it is only meaningful for
/// `λ < 1/μ` (27 years with the default parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct Sir {
    params: SirParams,
}

impl Sir {
    pub fn new(params: SirParams) -> Self {
        Sir { params }
    }

    pub fn params(&self) -> &SirParams {
        &self.params
    }

    /// Birth rate `Λ(P)`.
    pub fn birth_rate(&self, population: f64) -> f64 {
        let p = &self.params;
        p.mu * (1.0 + p.p_max) * population / (1.0 + population)
    }
}

impl DdeSystem for Sir {
    fn name(&self) -> &str {
        "sir"
    }

    fn dim(&self) -> usize {
        3
    }

    fn rhs<T: ModelScalar>(&self, lambda: &T, x: &[T], y: &[T]) -> Result<Vec<T>> {
        let p = &self.params;
        let (i, s, r) = (&x[0], &x[1], &x[2]);
        let population = i.clone() + s.clone() + r.clone();
        let births = (population.clone() * (p.mu * (1.0 + p.p_max))).try_div(&(population + 1.0))?;
        let contagion = s.clone() * i.clone() * p.beta;
        // fα(1 − μλ) I(t − λ)
        let returning = (lambda.clone() * (-p.mu) + 1.0) * y[0].clone() * (p.f * p.alpha);
        let di = contagion.clone() - i.clone() * (p.mu + p.alpha);
        let ds = births - contagion - s.clone() * p.mu + returning.clone();
        let dr = i.clone() * (p.f * p.alpha) - r.clone() * p.mu - returning;
        Ok(vec![di, ds, dr])
    }

    fn equilibrium_hint(&self, lambda: f64) -> Vec<f64> {
        let p = &self.params;
        let infected = 0.5;
        vec![infected, (p.mu + p.alpha) / p.beta, p.f * p.alpha * lambda * infected]
    }

    fn hopf_hint(&self) -> HopfHint {
        HopfHint { omega: 0.034, lambda: 100.0 }
    }

    fn state_labels(&self) -> Vec<String> {
        vec!["I [1e6 persons]".into(), "S [1e6 persons]".into(), "R [1e6 persons]".into()]
    }

    fn time_unit(&self) -> &str {
        "day"
    }
}
