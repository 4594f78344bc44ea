//! Reference integrator for constant-history DDEs (method of steps with the
//! Dormand–Prince 5(4) pair and cubic Hermite dense output), steady-state
//! detection, and phase-aligned comparison against reconstructed orbits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::ExpansionResult;
use crate::model::{equilibrium, DdeSystem};
use crate::reconstruct::{golden_max, reconstruct, residual, ReconstructedOrbit, DEFAULT_RESIDUAL_SAMPLES};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Weights of the fourth-order continuous extension beyond the cubic Hermite
/// part: `y(θ) = hermite(θ) + θ²(1 − θ)²·h·Σ dᵢkᵢ`.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Delay multiples after the start that steps land on exactly; the solution
/// gains one derivative of smoothness per multiple.
const BREAKPOINTS: usize = 8;
const ERROR_SAMPLES: usize = 1024;
const PERIOD_MISMATCH: f64 = 0.05;

/// Integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { rtol: 1e-9, atol: 1e-9 }
    }
}

impl IntegrateOptions {
    fn check(&self) -> Result<()> {
        for (name, v) in [("rtol", self.rtol), ("atol", self.atol)] {
            if !(1e-12..=1e-3).contains(&v) {
                return Err(Error::InvalidInput(format!("{name} must lie in [1e-12, 1e-3], got {v}")));
            }
        }
        Ok(())
    }
}

/// Accepted steps of an integration with `y = history` for `t ≤ t_start`.
///
/// Between knots the state is the cubic Hermite interpolant of the stored
/// states and derivatives.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lambda: f64,
    pub history: Vec<f64>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
    h_next: f64,
}

fn hermite(t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let d00 = (6.0 * s2 - 6.0 * s) / h;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = (-6.0 * s2 + 6.0 * s) / h;
    let d11 = 3.0 * s2 - 2.0 * s;
    let mut y = Vec::with_capacity(y0.len());
    let mut dy = Vec::with_capacity(y0.len());
    for i in 0..y0.len() {
        y.push(h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]);
        dy.push(d00 * y0[i] + d10 * f0[i] + d01 * y1[i] + d11 * f1[i]);
    }
    (y, dy)
}

impl Trajectory {
    /// Trajectory built from given knots; `derivs` are the slopes at the knots.
    pub fn from_samples(lambda: f64, times: Vec<f64>, states: Vec<Vec<f64>>, derivs: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() || times.len() != derivs.len() {
            return Err(Error::InvalidInput("trajectory samples must be non-empty and of equal length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("trajectory times must be strictly increasing".into()));
        }
        Ok(Trajectory { lambda, history: states[0].clone(), times, states, derivs, h_next: lambda / 4.0 })
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is non-empty")
    }

    pub fn dim(&self) -> usize {
        self.history.len()
    }

    fn interval(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s <= t);
        i.clamp(1, self.times.len() - 1) - 1
    }

    /// State and derivative at `t`; the history for `t < t_start`.
    pub fn eval_with_derivative(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        if t < self.t_start() {
            return (self.history.clone(), vec![0.0; self.dim()]);
        }
        if self.times.len() == 1 {
            return (self.states[0].clone(), self.derivs[0].clone());
        }
        let i = self.interval(t);
        hermite(
            self.times[i],
            self.times[i + 1],
            &self.states[i],
            &self.states[i + 1],
            &self.derivs[i],
            &self.derivs[i + 1],
            t,
        )
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.eval_with_derivative(t).0
    }

    fn delayed(&self, t: f64) -> Vec<f64> {
        debug_assert!(t <= self.t_end() + 1e-12 * self.t_end().abs().max(1.0));
        self.eval(t)
    }

    /// Continues the integration up to `t_end`.
    pub fn extend(&mut self, model: &impl DdeSystem, t_end: f64, options: &IntegrateOptions) -> Result<()> {
        options.check()?;
        let lambda = self.lambda;
        let n = self.dim();
        let h_max = lambda / 4.0;
        let breaks: Vec<f64> = (1..=BREAKPOINTS).map(|k| self.t_start() + k as f64 * lambda).collect();
        let mut t = self.t_end();
        let mut y = self.states.last().expect("non-empty").clone();
        let mut k1 = self.derivs.last().expect("non-empty").clone();
        let mut h = self.h_next.min(h_max);
        let mut k = vec![vec![0.0; n]; 7];
        let mut stage = vec![0.0; n];
        while t < t_end {
            let floor = 1e-14 * t.abs().max(1.0);
            if h < floor {
                return Err(Error::StepUnderflow { t });
            }
            let mut step = h.min(t_end - t);
            if let Some(b) = breaks.iter().find(|&&b| b > t + floor) {
                if t + step > *b - floor {
                    step = b - t;
                }
            }
            k[0].clone_from(&k1);
            for s in 1..7 {
                for i in 0..n {
                    stage[i] = y[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                let ts = t + C[s] * step;
                k[s] = model.rhs(&lambda, &stage, &self.delayed(ts - lambda))?;
            }
            // Stage 7 is evaluated at the fifth-order solution.
            let y_new = stage.clone();
            let mut err = 0.0;
            for i in 0..n {
                let e = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let scale = options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / n as f64).sqrt();
            // The stored cubic Hermite interpolant deviates from the
            // fourth-order extension by θ²(1 − θ)²·h·Σdᵢkᵢ, largest at θ = 1/2.
            let mut dense_err = 0.0;
            for i in 0..n {
                let e = step * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>() / 16.0;
                let scale = options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
                dense_err += (e / scale).powi(2);
            }
            let dense_err = (dense_err / n as f64).sqrt();
            if !err.is_finite() || !dense_err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if step <= floor {
                    return Err(Error::NonFinite { t });
                }
                h = 0.25 * step;
                continue;
            }
            let step_factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            let dense_factor = if dense_err == 0.0 { 5.0 } else { 0.9 * dense_err.powf(-0.25) };
            let factor = step_factor.min(dense_factor).clamp(0.2, 5.0);
            if err <= 1.0 && dense_err <= 1.0 {
                t += step;
                y = y_new;
                k1 = k[6].clone();
                self.times.push(t);
                self.states.push(y.clone());
                self.derivs.push(k1.clone());
                // A step shortened to hit a breakpoint says nothing about h.
                if step >= h {
                    h = (step * factor).min(h_max);
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        self.h_next = h;
        Ok(())
    }
}

/// Integrates `x' = g(λ, x(t), x(t − λ))` on `[0, t_end]` from the constant
/// history `x(t) = history` for `t ≤ 0`. Steps never exceed `λ/4`.
pub fn integrate(
    model: &impl DdeSystem,
    lambda: f64,
    history: &[f64],
    t_end: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    options.check()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("delay must be positive, got {lambda}")));
    }
    if history.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: history.len() });
    }
    let f0 = model.rhs(&lambda, history, history)?;
    let mut traj = Trajectory {
        lambda,
        history: history.to_vec(),
        times: vec![0.0],
        states: vec![history.to_vec()],
        derivs: vec![f0],
        h_next: 1e-3 * lambda,
    };
    traj.extend(model, t_end, options)?;
    Ok(traj)
}

/// Phase anchor of a steady oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    /// Upward crossing of `level` by component 1, followed by a full period.
    pub t0: f64,
    pub period_est: f64,
    /// Last peak of component 1 above `level`.
    pub amplitude: f64,
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}

/// Upward crossings of `level` by component 1, bisected on the dense output.
pub fn upward_crossings(traj: &Trajectory, level: f64) -> Vec<f64> {
    let f = |t: f64| traj.eval(t)[0] - level;
    let mut out = Vec::new();
    for i in 0..traj.times.len().saturating_sub(1) {
        let (a, b) = (traj.times[i], traj.times[i + 1]);
        let (fa, fb) = (traj.states[i][0] - level, traj.states[i + 1][0] - level);
        if fa < 0.0 && fb >= 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

fn peak_between(traj: &Trajectory, a: f64, b: f64) -> f64 {
    let lo = traj.times.partition_point(|&s| s < a);
    let hi = traj.times.partition_point(|&s| s <= b);
    let Some(best) = (lo..hi).max_by(|&i, &j| traj.states[i][0].total_cmp(&traj.states[j][0])) else {
        return golden_max(|t| traj.eval(t)[0], a, b).1;
    };
    let left = traj.times[best.saturating_sub(1)].max(a);
    let right = traj.times[(best + 1).min(traj.times.len() - 1)].min(b);
    golden_max(|t| traj.eval(t)[0], left, right).1.max(traj.states[best][0])
}

/// Finds a steady oscillation of component 1 about `level`: the last three
/// periods agree within `tol_per` and the last three peaks within `tol_amp`
/// (both relative).
pub fn detect_steady_state(traj: &Trajectory, level: f64, tol_amp: f64, tol_per: f64) -> Result<Alignment> {
    let crossings = upward_crossings(traj, level);
    if crossings.len() < 6 {
        return Err(Error::NotConverged(format!(
            "{} upward crossings found, need at least 6; integrate longer",
            crossings.len()
        )));
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let peaks: Vec<f64> = crossings.windows(2).map(|w| peak_between(traj, w[0], w[1]) - level).collect();
    let last_periods = &periods[periods.len() - 3..];
    let last_peaks = &peaks[peaks.len() - 3..];
    let (sp, sa) = (spread(last_periods), spread(last_peaks));
    if !(sp <= tol_per && sa <= tol_amp) {
        return Err(Error::NotConverged(format!(
            "period spread {sp:.3e} (tol {tol_per:e}), amplitude spread {sa:.3e} (tol {tol_amp:e}); integrate longer"
        )));
    }
    let period_est = last_periods.iter().sum::<f64>() / 3.0;
    let t0 = *crossings
        .iter()
        .rev()
        .find(|&&c| c + period_est <= traj.t_end())
        .expect("the third-to-last crossing is followed by two periods");
    Ok(Alignment { t0, period_est, amplitude: *last_peaks.last().expect("three peaks") })
}

/// `sup_t ‖x̃(t₀ + t) − x_N(s + t)‖ / sup_t ‖x̃(t₀ + t) − x*‖` over one period,
/// where `s` is the orbit's own upward crossing of component 1.
pub fn relative_error(orbit: &ReconstructedOrbit<'_>, traj: &Trajectory, align: &Alignment) -> Result<f64> {
    if (orbit.period - align.period_est).abs() > PERIOD_MISMATCH * orbit.period {
        return Err(Error::PeriodMismatch { expansion: orbit.period, numeric: align.period_est });
    }
    let s = orbit.upward_crossing();
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..ERROR_SAMPLES {
        let t = orbit.period * i as f64 / ERROR_SAMPLES as f64;
        let x = traj.eval(align.t0 + t);
        let xn = orbit.eval(s + t);
        let d: f64 = x.iter().zip(&xn).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let r: f64 = x.iter().zip(&orbit.equilibrium).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        num = num.max(d);
        den = den.max(r);
    }
    if den == 0.0 {
        return Err(Error::NotConverged("reference oscillation has zero amplitude".into()));
    }
    Ok(num / den)
}

/// Settings for [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidateOptions {
    pub integrate: IntegrateOptions,
    pub tol_amp: f64,
    pub tol_per: f64,
    /// First integration horizon, in expansion periods; doubled until a
    /// steady state is found.
    pub initial_periods: f64,
    pub max_periods: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            integrate: IntegrateOptions::default(),
            tol_amp: 1e-6,
            tol_per: 1e-6,
            initial_periods: 60.0,
            max_periods: 8000.0,
        }
    }
}

/// Expansion against integration at one delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub lambda: f64,
    pub order: usize,
    pub eps: f64,
    pub r_r: f64,
    pub e_r: f64,
    pub period_expansion: f64,
    pub period_numeric: f64,
    pub t0: f64,
}

/// Integrates from the model's history until the oscillation settles, then
/// measures the residual and relative error of the order-`N` orbit.
pub fn validate(
    model: &impl DdeSystem,
    exp: &ExpansionResult,
    lambda: f64,
    options: &ValidateOptions,
) -> Result<ValidationReport> {
    let orbit = reconstruct(model, exp, lambda)?;
    if orbit.eps == 0.0 {
        return Err(Error::InvalidInput(format!("delay {lambda} is the bifurcation point; no oscillation to compare")));
    }
    let r_r = residual(model, &orbit, DEFAULT_RESIDUAL_SAMPLES)?;
    let eq = equilibrium(model, lambda)?;
    let history = model.integration_history(&eq);
    let mut t_end = options.initial_periods * orbit.period;
    let mut traj = integrate(model, lambda, &history, t_end, &options.integrate)?;
    let align = loop {
        match detect_steady_state(&traj, eq[0], options.tol_amp, options.tol_per) {
            Ok(a) => break a,
            Err(e @ Error::NotConverged(_)) => {
                if t_end >= options.max_periods * orbit.period {
                    return Err(e);
                }
                t_end *= 2.0;
                traj.extend(model, t_end, &options.integrate)?;
            }
            Err(e) => return Err(e),
        }
    };
    let e_r = relative_error(&orbit, &traj, &align)?;
    Ok(ValidationReport {
        lambda,
        order: exp.order,
        eps: orbit.eps,
        r_r,
        e_r,
        period_expansion: orbit.period,
        period_numeric: align.period_est,
        t0: align.t0,
    })
}

/// [`validate`] over several delays, one trajectory per thread; results keep
/// the order of `lambdas`.
pub fn validate_grid(
    model: &impl DdeSystem,
    exp: &ExpansionResult,
    lambdas: &[f64],
    options: &ValidateOptions,
) -> Vec<Result<ValidationReport>> {
    lambdas.par_iter().map(|&l| validate(model, exp, l, options)).collect()
}
