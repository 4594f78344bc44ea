//! Physical-time orbits from an expansion: amplitude selection for a given
//! delay, evaluation, the DDE residual, and bifurcation diagrams.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::ExpansionResult;
use crate::model::{equilibrium, DdeSystem};

const ROOT_SCAN_SAMPLES: usize = 4000;
const GOLDEN_ITERATIONS: usize = 60;
const REFINED_PEAKS: usize = 3;

/// Defaults for residual and diagram sampling.
pub const DEFAULT_RESIDUAL_SAMPLES: usize = 2048;
pub const DIAGRAM_SAMPLES: usize = 1024;
/// Residual above which a diagram point is flagged as extrapolated.
pub const DEFAULT_EXTRAPOLATION_THRESHOLD: f64 = 0.05;

fn delay_defect(exp: &ExpansionResult, eps: f64, target: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for (j, c) in exp.lambda_hats.iter().enumerate().skip(1).rev() {
        dp = dp * eps + j as f64 * c;
        p = p * eps + c;
    }
    (p * eps - target, dp)
}

fn newton_root(exp: &ExpansionResult, target: f64, start: f64) -> Option<f64> {
    let mut eps = start;
    for _ in 0..100 {
        let (p, dp) = delay_defect(exp, eps, target);
        if dp == 0.0 || !dp.is_finite() {
            return None;
        }
        let step = p / dp;
        eps -= step;
        if !eps.is_finite() {
            return None;
        }
        if step.abs() <= 1e-16 * eps.abs().max(1e-300) {
            break;
        }
    }
    Some(eps)
}

fn bisect(exp: &ExpansionResult, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let (plo, _) = delay_defect(exp, lo, target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (pm, _) = delay_defect(exp, mid, target);
        if (pm < 0.0) == (plo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First sign change of the delay defect on `(0, upper]`, bracketed.
fn first_sign_change(exp: &ExpansionResult, target: f64, upper: f64) -> Option<(f64, f64)> {
    let (p0, _) = delay_defect(exp, 0.0, target);
    let mut prev = 0.0;
    for i in 1..=ROOT_SCAN_SAMPLES {
        let e = upper * i as f64 / ROOT_SCAN_SAMPLES as f64;
        let (p, _) = delay_defect(exp, e, target);
        if p == 0.0 || (p < 0.0) != (p0 < 0.0) {
            return Some((prev, e));
        }
        prev = e;
    }
    None
}

/// Amplitude ε̃ with `λ̂(ε̃)/ω₀ = λ`: the smallest non-negative root of the
/// truncated delay series.
pub fn solve_epsilon(exp: &ExpansionResult, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("delay must be finite, got {lambda}")));
    }
    let target = exp.omega0 * lambda - exp.lambda_hats[0];
    let tiny = 1e-13 * exp.lambda_hats[0].abs();
    if target.abs() <= tiny {
        return Ok(0.0);
    }
    if target < 0.0 {
        return Err(Error::BelowThreshold { lambda, lambda0: exp.lambda0 });
    }
    let start = match exp.lambda_hats.get(2) {
        Some(l2) if *l2 > 0.0 => (target / l2).sqrt(),
        _ => match exp.lambda_hats.get(1) {
            Some(l1) if *l1 > 0.0 => target / l1,
            _ => 1.0,
        },
    };

    let candidate = newton_root(exp, target, start).filter(|e| *e > 0.0);
    let root = match candidate {
        Some(e) => match first_sign_change(exp, target, e * (1.0 - 1e-9)) {
            // An earlier crossing exists; the Newton root is not the smallest.
            Some((lo, hi)) => bisect(exp, target, lo, hi),
            None => e,
        },
        None => {
            let upper = 2.0 * start.max(1.0);
            let (lo, hi) = first_sign_change(exp, target, upper).ok_or(Error::NoEpsilonRoot { lambda })?;
            bisect(exp, target, lo, hi)
        }
    };
    let root = newton_root(exp, target, root).filter(|e| *e >= 0.0).unwrap_or(root);
    let (p, _) = delay_defect(exp, root, target);
    if !(p.abs() <= 1e-12 * (exp.omega0 * lambda).abs().max(1.0)) {
        return Err(Error::NoEpsilonRoot { lambda });
    }
    Ok(root)
}

/// An expansion evaluated at one delay, in physical time and coordinates.
#[derive(Debug, Clone)]
pub struct ReconstructedOrbit<'e> {
    pub lambda: f64,
    pub eps: f64,
    pub period: f64,
    pub order: usize,
    pub equilibrium: Vec<f64>,
    expansion: &'e ExpansionResult,
}

/// Orbit for delay `lambda` (`λ ≥ λ₀`).
pub fn reconstruct<'e>(model: &impl DdeSystem, exp: &'e ExpansionResult, lambda: f64) -> Result<ReconstructedOrbit<'e>> {
    let eps = solve_epsilon(exp, lambda)?;
    let equilibrium = equilibrium(model, lambda)?;
    Ok(ReconstructedOrbit { lambda, eps, period: exp.period_at(eps), order: exp.order, equilibrium, expansion: exp })
}

impl<'e> ReconstructedOrbit<'e> {
    pub fn expansion(&self) -> &ExpansionResult {
        self.expansion
    }

    /// `τ` for physical time `t`.
    pub fn phase(&self, t: f64) -> f64 {
        2.0 * PI * t / self.period
    }

    /// `x_N(t)`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let u = self.expansion.deviation(self.phase(t), self.eps);
        u.iter().zip(&self.equilibrium).map(|(u, x)| u + x).collect()
    }

    /// `x_N'(t)`, differentiated exactly.
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        let nu = 2.0 * PI / self.period;
        self.expansion.deviation_derivative(self.phase(t), self.eps).iter().map(|d| d * nu).collect()
    }

    /// `‖x_N'(t) − g(λ, x_N(t), x_N(t − λ))‖`.
    pub fn defect(&self, model: &impl DdeSystem, t: f64) -> Result<f64> {
        let x = self.eval(t);
        let y = self.eval(t - self.lambda);
        let g = model.rhs(&self.lambda, &x, &y)?;
        Ok(self.derivative(t).iter().zip(&g).map(|(d, g)| (d - g).powi(2)).sum::<f64>().sqrt())
    }

    /// Upward crossing of the first component through its equilibrium value
    /// closest to `t = 0` (exactly 0 under the expansion's phase convention).
    pub fn upward_crossing(&self) -> f64 {
        let level = self.equilibrium[0];
        let f = |t: f64| self.eval(t)[0] - level;
        if f(0.0).abs() <= 1e-12 * self.equilibrium[0].abs().max(1.0) && self.derivative(0.0)[0] > 0.0 {
            return 0.0;
        }
        let n = 1024;
        let h = self.period / n as f64;
        let mut best: Option<f64> = None;
        for i in 0..n {
            let (a, b) = (-0.5 * self.period + i as f64 * h, -0.5 * self.period + (i + 1) as f64 * h);
            let (fa, fb) = (f(a), f(b));
            if fa < 0.0 && fb >= 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let c = 0.5 * (lo + hi);
                if best.is_none_or(|b| c.abs() < b.abs()) {
                    best = Some(c);
                }
            }
        }
        best.unwrap_or(0.0)
    }
}

/// Golden-section maximization of `f` on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Supremum of a periodic function sampled on `samples` points, with
/// golden-section refinement around the largest local maxima.
pub(crate) fn periodic_sup(f: impl Fn(f64) -> f64, period: f64, samples: usize) -> f64 {
    let h = period / samples as f64;
    let vals: Vec<f64> = (0..samples).map(|i| f(i as f64 * h)).collect();
    let mut peaks: Vec<usize> = (0..samples)
        .filter(|&i| {
            let prev = vals[(i + samples - 1) % samples];
            let next = vals[(i + 1) % samples];
            vals[i] >= prev && vals[i] >= next
        })
        .collect();
    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for &i in peaks.iter().take(REFINED_PEAKS) {
        let t = i as f64 * h;
        let (_, v) = golden_max(&f, t - h, t + h);
        best = best.max(v);
    }
    best
}

/// Relative residual `sup‖x_N' − g(λ, x_N, x_N(·−λ))‖ / sup‖x_N'‖` over one period.
pub fn residual(model: &impl DdeSystem, orbit: &ReconstructedOrbit<'_>, samples: usize) -> Result<f64> {
    if samples < 256 {
        return Err(Error::InvalidInput(format!("residual needs at least 256 samples, got {samples}")));
    }
    if orbit.eps == 0.0 {
        return Ok(0.0);
    }
    // Surface model errors before the sampling closures swallow them.
    orbit.defect(model, 0.0)?;
    let num = periodic_sup(|t| orbit.defect(model, t).unwrap_or(f64::NAN), orbit.period, samples);
    let den = periodic_sup(
        |t| orbit.derivative(t).iter().map(|d| d * d).sum::<f64>().sqrt(),
        orbit.period,
        samples,
    );
    if !num.is_finite() {
        return Err(Error::NonFinite { t: f64::NAN });
    }
    Ok(num / den)
}

/// One λ of a bifurcation diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramPoint {
    pub lambda: f64,
    /// `None` on the equilibrium side or when the point failed.
    pub eps: Option<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub residual: Option<f64>,
    /// Residual above the configured threshold.
    pub extrapolated: bool,
    /// The equilibrium is the only solution tracked here (`λ < λ₀`).
    pub equilibrium_branch: bool,
    pub error: Option<String>,
}

/// Per-λ (min, max) of each component over one period, in parallel over the
/// grid; failures are recorded per point.
pub fn bifurcation_diagram(
    model: &impl DdeSystem,
    exp: &ExpansionResult,
    grid: &[f64],
    extrapolation_threshold: f64,
) -> Vec<DiagramPoint> {
    grid.par_iter().map(|&lambda| diagram_point(model, exp, lambda, extrapolation_threshold)).collect()
}

fn diagram_point(model: &impl DdeSystem, exp: &ExpansionResult, lambda: f64, threshold: f64) -> DiagramPoint {
    let mut point = DiagramPoint {
        lambda,
        eps: None,
        min: vec![],
        max: vec![],
        residual: None,
        extrapolated: false,
        equilibrium_branch: false,
        error: None,
    };
    let fail = |mut p: DiagramPoint, e: Error| {
        p.error = Some(e.to_string());
        p
    };
    if lambda < exp.lambda0 {
        return match equilibrium(model, lambda) {
            Ok(x) => DiagramPoint { min: x.clone(), max: x, equilibrium_branch: true, ..point },
            Err(e) => fail(point, e),
        };
    }
    let orbit = match reconstruct(model, exp, lambda) {
        Ok(o) => o,
        Err(e) => return fail(point, e),
    };
    point.eps = Some(orbit.eps);
    let n = model.dim();
    for c in 0..n {
        let hi = periodic_sup(|t| orbit.eval(t)[c], orbit.period, DIAGRAM_SAMPLES);
        let lo = -periodic_sup(|t| -orbit.eval(t)[c], orbit.period, DIAGRAM_SAMPLES);
        point.max.push(hi);
        point.min.push(lo);
    }
    match residual(model, &orbit, DEFAULT_RESIDUAL_SAMPLES) {
        Ok(r) => {
            point.residual = Some(r);
            point.extrapolated = r > threshold;
        }
        Err(e) => return fail(point, e),
    }
    point
}
