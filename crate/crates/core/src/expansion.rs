//! Order-by-order construction of the periodic orbit
//! `U(τ, ε) = ε Σ_j ε^j Z_j(τ)` together with `λ̂(ε) = Σ λ̂_j ε^j` and
//! `T̂(ε) = Σ T̂_j ε^j`.
//!
//! With `τ = 2πω₀t/T̂`, the orbit `x = x*(λ) + U` solves
//!
//! ```text
//! Z' = (T̂/2π) · f(λ̂, εZ(τ), εZ(τ − 2πλ̂/T̂)) / ε,   f = g(λ̂/ω₀, x* + ·, x* + ·)/ω₀,
//! ```
//!
//! and its ε^j coefficient reads `L Z_j = h_j = H0 + T̂_j R + λ̂_j S`. Each
//! order computes `H0, R, S` by evaluating the model on truncated series,
//! fixes `(λ̂_j, T̂_j)` so that `h_j ⊥ N(L*)`, solves `L Ẑ_j = h_j` harmonic by
//! harmonic, and adds the kernel component that enforces `Z_j¹(0) = 0` and
//! `⟨Z_j, Z₀⟩ = 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bifurcation::{find_hopf_with, null_bases, HopfOptions, HopfPoint, LinearBases};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_lstsq, scaled_det2, solve2};
use crate::model::{equilibrium_series, linearization, DdeSystem, HopfHint};
use crate::series::{ScalarSeries, TrigSeries};
use crate::trigpoly::TrigPoly;

const SOLVABILITY_DET_TOL: f64 = 1e-8;
const NORMALIZATION_DET_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-8;
const LSTSQ_RESIDUAL_TOL: f64 = 1e-9;
const DEGREE_TOL: f64 = 1e-10;
const OPERATOR_SAMPLES: usize = 256;

/// Normalization of the leading term `Z₀ = s·v₂`.
///
/// Changing `s` only reparametrizes ε: with `ε_s = ε₁/s` the coefficients
/// obey `λ̂_j(s) = s^j λ̂_j(1)`, `T̂_j(s) = s^j T̂_j(1)` and
/// `Z_j(s) = s^{j+1} Z_j(1)`, and every truncated orbit is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Z0Scale {
    /// `s = 2π`.
    #[default]
    TwoPi,
    /// `s = √(2π)`: `Z₀` has unit mean square over a period.
    RootTwoPi,
    /// `s = 1`: `Z₀` is the unit-norm kernel element itself.
    Unit,
}

impl Z0Scale {
    pub fn factor(self) -> f64 {
        match self {
            Z0Scale::TwoPi => 2.0 * PI,
            Z0Scale::RootTwoPi => (2.0 * PI).sqrt(),
            Z0Scale::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExpansionOptions {
    pub z0_scale: Z0Scale,
    /// Overrides the model's Hopf hint.
    pub hint: Option<HopfHint>,
    pub hopf: HopfOptions,
}

/// Normalization choices that make the coefficients unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conventions {
    pub z0_scale: f64,
    /// Value of `⟨Z_j, Z₀⟩` for `j ≥ 1`.
    pub qj: f64,
    pub phase: &'static str,
}

/// Per-order numerical health of the solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderReport {
    pub order: usize,
    /// Row-scaled determinant of the 2×2 solvability system.
    pub solvability_det: f64,
    /// `max_i |⟨h_j, w_i⟩| / max|h_j|` after the solve.
    pub adjoint_projection: f64,
    /// Least-squares residual of the first-harmonic block relative to the forcing.
    pub first_harmonic_residual: f64,
    /// `max |L Z_j − h_j| / max |h_j|` over sampled τ.
    pub operator_residual: f64,
    /// Kernel coefficients added by the normalization step.
    pub kernel_correction: [f64; 2],
}

/// The three ingredients of `h_j = H0 + T̂_j R + λ̂_j S`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderForcing {
    pub h0: TrigPoly,
    pub r: TrigPoly,
    pub s: TrigPoly,
}

/// Expansion coefficients and the linear data they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult {
    pub order: usize,
    pub lambda_hats: Vec<f64>,
    pub t_hats: Vec<f64>,
    /// `Z_0 ..= Z_N`.
    pub z: Vec<TrigPoly>,
    /// `h_0 ..= h_N`, with `h_0 = 0`.
    pub h: Vec<TrigPoly>,
    pub omega0: f64,
    pub lambda0: f64,
    pub hopf: HopfPoint,
    pub bases: LinearBases,
    pub conventions: Conventions,
    pub reports: Vec<OrderReport>,
}

impl ExpansionResult {
    pub fn dim(&self) -> usize {
        self.hopf.dim()
    }

    pub fn lambda_hat_series(&self) -> ScalarSeries {
        ScalarSeries::from_slice(&self.lambda_hats)
    }

    pub fn t_hat_series(&self) -> ScalarSeries {
        ScalarSeries::from_slice(&self.t_hats)
    }

    /// Physical delay `λ(ε) = λ̂(ε)/ω₀`.
    pub fn lambda_at(&self, eps: f64) -> f64 {
        self.lambda_hat_series().eval(eps) / self.omega0
    }

    /// `dλ/dε`.
    pub fn lambda_derivative_at(&self, eps: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.lambda_hats.iter().enumerate().skip(1).rev() {
            acc = acc * eps + j as f64 * c;
        }
        acc / self.omega0
    }

    /// Physical period `T̂(ε)/ω₀`.
    pub fn period_at(&self, eps: f64) -> f64 {
        self.t_hat_series().eval(eps) / self.omega0
    }

    /// `U(τ, ε) = ε Σ ε^j Z_j(τ)`, the deviation from the equilibrium.
    pub fn deviation(&self, tau: f64, eps: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for zj in self.z.iter().rev() {
            for (a, v) in acc.iter_mut().zip(zj.eval(tau)) {
                *a = *a * eps + v;
            }
        }
        acc.iter().map(|a| a * eps).collect()
    }

    /// `∂U/∂τ`.
    pub fn deviation_derivative(&self, tau: f64, eps: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for zj in self.z.iter().rev() {
            for (a, v) in acc.iter_mut().zip(zj.diff().eval(tau)) {
                *a = *a * eps + v;
            }
        }
        acc.iter().map(|a| a * eps).collect()
    }

    /// The same expansion cut to a lower order.
    pub fn truncated(&self, order: usize) -> Result<ExpansionResult> {
        if order > self.order {
            return Err(Error::InvalidInput(format!("cannot truncate order {} to {order}", self.order)));
        }
        let mut out = self.clone();
        out.order = order;
        out.lambda_hats.truncate(order + 1);
        out.t_hats.truncate(order + 1);
        out.z.truncate(order + 1);
        out.h.truncate(order + 1);
        out.reports.retain(|r| r.order <= order);
        Ok(out)
    }
}

/// Step-by-step driver of the expansion for one model.
pub struct Expander<'m, M: DdeSystem> {
    model: &'m M,
    hp: HopfPoint,
    bases: LinearBases,
    z0: TrigPoly,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    scale: f64,
}

impl<'m, M: DdeSystem> Expander<'m, M> {
    pub fn new(model: &'m M, options: &ExpansionOptions) -> Result<Self> {
        let hint = options.hint.unwrap_or_else(|| model.hopf_hint());
        let hp = find_hopf_with(model, hint, &options.hopf)?;
        Self::from_hopf(model, hp, options.z0_scale)
    }

    pub fn from_hopf(model: &'m M, hp: HopfPoint, z0_scale: Z0Scale) -> Result<Self> {
        let bases = null_bases(&hp)?;
        let scale = z0_scale.factor();
        let z0 = bases.v2.scale(scale);
        Ok(Expander { model, a: hp.a(), b: hp.b(), hp, bases, z0, scale })
    }

    pub fn hopf(&self) -> &HopfPoint {
        &self.hp
    }

    pub fn bases(&self) -> &LinearBases {
        &self.bases
    }

    pub fn z0(&self) -> &TrigPoly {
        &self.z0
    }

    /// ε^j coefficient of the rescaled right-hand side with `Z_j = 0`, for
    /// given trial values of `λ̂_j` and `T̂_j`.
    pub fn forcing_probe(
        &self,
        z: &[TrigPoly],
        lambda_hats: &[f64],
        t_hats: &[f64],
        lambda_hat_j: f64,
        t_hat_j: f64,
    ) -> Result<TrigPoly> {
        let j = z.len();
        if j == 0 || lambda_hats.len() != j || t_hats.len() != j {
            return Err(Error::InvalidInput(format!(
                "order {j} needs {j} lower-order terms, got {} λ̂ and {} T̂",
                lambda_hats.len(),
                t_hats.len()
            )));
        }
        let n = self.hp.dim();
        let top = j + 1;
        let pad = |lower: &[f64], current: f64| {
            let mut v = lower.to_vec();
            v.push(current);
            v.resize(top + 1, 0.0);
            ScalarSeries::new(v)
        };
        let lam_hat = pad(lambda_hats, lambda_hat_j);
        let t_hat = pad(t_hats, t_hat_j);
        let lambda = &lam_hat * (1.0 / self.hp.omega0);
        let theta = (&lam_hat * (2.0 * PI)).checked_div(&t_hat)?;
        let xstar = equilibrium_series(self.model, &lambda)?;

        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for (c, xs) in xstar.iter().enumerate() {
            let mut coeffs = Vec::with_capacity(top + 1);
            coeffs.push(TrigPoly::zero(1, 0));
            coeffs.extend(z.iter().map(|zk| zk.component(c)));
            coeffs.push(TrigPoly::zero(1, 0));
            let u = TrigSeries::new(coeffs);
            let v = u.delayed(&theta, self.hp.lambda_hat0)?;
            let base = xs.embed();
            x.push(u.checked_add(&base)?);
            y.push(v.checked_add(&base)?);
        }
        let g = self.model.rhs(&lambda.embed(), &x, &y)?;
        let factor = &t_hat * (1.0 / (2.0 * PI * self.hp.omega0));
        let parts = g
            .iter()
            .map(|gc| Ok(gc.div_eps().scale_by(&factor)?.coeff(j).clone()))
            .collect::<Result<Vec<_>>>()?;
        TrigPoly::from_components(&parts)
    }

    /// `H0 = probe(0, 0)`, `S = probe(1, 0) − H0`, `R = probe(0, 1) − H0`.
    pub fn assemble_rhs(&self, z: &[TrigPoly], lambda_hats: &[f64], t_hats: &[f64]) -> Result<OrderForcing> {
        let h0 = self.forcing_probe(z, lambda_hats, t_hats, 0.0, 0.0)?;
        let s = &self.forcing_probe(z, lambda_hats, t_hats, 1.0, 0.0)? - &h0;
        let r = &self.forcing_probe(z, lambda_hats, t_hats, 0.0, 1.0)? - &h0;
        Ok(OrderForcing { h0, r, s })
    }

    /// `R = (Z₀' + λ̂₀ B Z₀'(τ − λ̂₀))/2π` and
    /// `S = A'Z₀ + B'Z₀(τ − λ̂₀) − B Z₀'(τ − λ̂₀)`, with `A'`, `B'` from
    /// central differences in `λ̂` (equilibrium drift included).
    pub fn closed_form_rs(&self) -> Result<(TrigPoly, TrigPoly)> {
        let (da, db) = self.linear_derivatives()?;
        let lh0 = self.hp.lambda_hat0;
        let dz0 = self.z0.diff();
        let b_dz0_delayed = dz0.shift(lh0).apply_matrix(&self.b)?;
        let mut r = dz0.clone();
        r.add_scaled(lh0, &b_dz0_delayed);
        let r = r.scale(1.0 / (2.0 * PI));
        let mut s = self.z0.apply_matrix(&da)?;
        s.add_scaled(1.0, &self.z0.shift(lh0).apply_matrix(&db)?);
        s.add_scaled(-1.0, &b_dz0_delayed);
        Ok((r, s))
    }

    /// `dA/dλ̂`, `dB/dλ̂` at `λ̂₀` by central differences with step `10⁻⁶ λ̂₀`.
    pub fn linear_derivatives(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let w = self.hp.omega0;
        let h = 1e-6 * self.hp.lambda_hat0;
        let plus = linearization(self.model, (self.hp.lambda_hat0 + h) / w)?;
        let minus = linearization(self.model, (self.hp.lambda_hat0 - h) / w)?;
        let k = 1.0 / (2.0 * h * w);
        Ok(((plus.p - minus.p) * k, (plus.q - minus.q) * k))
    }

    /// Picks `(λ̂_j, T̂_j)` so that `h_j ⊥ w₁, w₂`; returns them with `h_j`
    /// and the row-scaled determinant of the 2×2 system.
    pub fn solve_order(&self, forcing: &OrderForcing) -> Result<(f64, f64, TrigPoly, f64)> {
        let [w1, w2] = self.bases.w();
        let m = [[forcing.s.inner(w1)?, forcing.r.inner(w1)?], [forcing.s.inner(w2)?, forcing.r.inner(w2)?]];
        let rhs = [-forcing.h0.inner(w1)?, -forcing.h0.inner(w2)?];
        let det = scaled_det2(m);
        let [lh, th] = solve2(m, rhs, SOLVABILITY_DET_TOL).map_err(|det| Error::SolvabilitySingular { det })?;
        let mut h = forcing.h0.clone();
        h.add_scaled(th, &forcing.r);
        h.add_scaled(lh, &forcing.s);
        Ok((lh, th, h, det))
    }

    /// A particular solution of `L Ẑ = h`, harmonic by harmonic; the first
    /// harmonic block is singular and is solved in the minimum-norm
    /// least-squares sense. Returns `Ẑ` and that block's relative residual.
    pub fn solve_particular(&self, h: &TrigPoly) -> Result<(TrigPoly, f64)> {
        let n = self.hp.dim();
        if h.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h.dim() });
        }
        let a = &self.a;
        let b = &self.b;
        let theta = self.hp.lambda_hat0;
        let mut out = TrigPoly::zero(n, h.degree());
        let mut first_residual = 0.0;

        if h.const_coef().iter().any(|v| *v != 0.0) {
            let block = -(a + b);
            let rhs = DVector::from_column_slice(h.const_coef());
            let sol = block.lu().solve(&rhs).ok_or(Error::SingularBlock { harmonic: 0 })?;
            if !sol.iter().all(|v| v.is_finite()) {
                return Err(Error::SingularBlock { harmonic: 0 });
            }
            out.const_coef_mut().copy_from_slice(sol.as_slice());
        }

        let eye = DMatrix::<f64>::identity(n, n);
        for k in 1..=h.degree() {
            let (alpha, beta) = (h.cos_coef(k), h.sin_coef(k));
            if alpha.iter().chain(beta).all(|v| *v == 0.0) {
                continue;
            }
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let diag = -a - b * c;
            let off = b * s;
            let mut block = DMatrix::zeros(2 * n, 2 * n);
            block.view_mut((0, 0), (n, n)).copy_from(&diag);
            block.view_mut((0, n), (n, n)).copy_from(&(&eye * kf + &off));
            block.view_mut((n, 0), (n, n)).copy_from(&(&eye * -kf - &off));
            block.view_mut((n, n), (n, n)).copy_from(&diag);
            let rhs = DVector::from_iterator(2 * n, alpha.iter().chain(beta).copied());
            let sol = if k == 1 {
                let ls = min_norm_lstsq(&block, &rhs, RANK_TOL, 1.0 + a.norm() + b.norm());
                // A simple critical pair leaves a two-dimensional kernel.
                if ls.rank != 2 * n - 2 {
                    return Err(Error::DegenerateBasis("first-harmonic block does not have a two-dimensional kernel"));
                }
                // Measured against the whole forcing: after solvability this
                // block's own right-hand side may be pure rounding noise.
                let h_norm = h.coefficients().iter().map(|v| v * v).sum::<f64>().sqrt();
                first_residual = (&block * &ls.x - &rhs).norm() / h_norm;
                if first_residual > LSTSQ_RESIDUAL_TOL {
                    return Err(Error::SolvabilityViolated { residual: first_residual });
                }
                ls.x
            } else {
                let sol = block.lu().solve(&rhs).ok_or(Error::SingularBlock { harmonic: k })?;
                if !sol.iter().all(|v| v.is_finite()) {
                    return Err(Error::SingularBlock { harmonic: k });
                }
                sol
            };
            out.cos_coef_mut(k).copy_from_slice(&sol.as_slice()[..n]);
            out.sin_coef_mut(k).copy_from_slice(&sol.as_slice()[n..]);
        }
        Ok((out, first_residual))
    }

    /// Adds `c₁v₁ + c₂v₂` so that the first component vanishes at `τ = 0`
    /// and the result is orthogonal to `Z₀`.
    pub fn fix_homogeneous(&self, particular: &TrigPoly) -> Result<(TrigPoly, [f64; 2])> {
        let [v1, v2] = self.bases.v();
        let m = [[v1.eval_component(0, 0.0), v2.eval_component(0, 0.0)], [v1.inner(&self.z0)?, v2.inner(&self.z0)?]];
        let rhs = [-particular.eval_component(0, 0.0), -particular.inner(&self.z0)?];
        let c = solve2(m, rhs, NORMALIZATION_DET_TOL).map_err(|det| Error::DegenerateNormalization { det })?;
        let mut z = particular.clone();
        z.add_scaled(c[0], v1);
        z.add_scaled(c[1], v2);
        Ok((z, c))
    }

    /// `max_τ |L z − h| / max_τ |h|` on an even grid.
    pub fn operator_residual(&self, z: &TrigPoly, h: &TrigPoly) -> Result<f64> {
        let defect = &self.hp.apply_operator(z)? - h;
        let grid = |p: &TrigPoly| {
            (0..OPERATOR_SAMPLES)
                .flat_map(|i| p.eval(2.0 * PI * i as f64 / OPERATOR_SAMPLES as f64))
                .fold(0.0, |m: f64, v| m.max(v.abs()))
        };
        let scale = grid(h);
        let d = grid(&defect);
        Ok(if scale > 0.0 { d / scale } else { d })
    }

    /// One full order: forcing, solvability, particular solution, normalization.
    pub fn step(
        &self,
        z: &[TrigPoly],
        lambda_hats: &[f64],
        t_hats: &[f64],
    ) -> Result<(f64, f64, TrigPoly, TrigPoly, OrderReport)> {
        let j = z.len();
        let forcing = self.assemble_rhs(z, lambda_hats, t_hats)?;
        let (lh, th, h, det) = self.solve_order(&forcing)?;
        let bound = j + 1;
        let hmax = h.max_abs();
        for k in bound + 1..=h.degree() {
            let size = h.harmonic_max_abs(k) / hmax.max(f64::MIN_POSITIVE);
            if size > DEGREE_TOL {
                return Err(Error::DegreeBound { harmonic: k, bound, size });
            }
        }
        let h = h.with_degree(bound.min(h.degree()));
        let projection = self
            .bases
            .w()
            .iter()
            .map(|w| h.inner(w).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max)
            / hmax.max(1.0);
        let (particular, first_residual) = self.solve_particular(&h)?;
        let (zj, correction) = self.fix_homogeneous(&particular)?;
        let report = OrderReport {
            order: j,
            solvability_det: det,
            adjoint_projection: projection,
            first_harmonic_residual: first_residual,
            operator_residual: self.operator_residual(&zj, &h)?,
            kernel_correction: correction,
        };
        Ok((lh, th, zj, h, report))
    }

    /// Runs orders `1..=order`.
    pub fn run(&self, order: usize) -> Result<ExpansionResult> {
        if order == 0 {
            return Err(Error::InvalidInput("expansion order must be at least 1".into()));
        }
        let n = self.hp.dim();
        let mut lambda_hats = vec![self.hp.lambda_hat0];
        let mut t_hats = vec![2.0 * PI];
        let mut z = vec![self.z0.clone()];
        let mut h = vec![TrigPoly::zero(n, 0)];
        let mut reports = Vec::with_capacity(order);
        for j in 1..=order {
            let (lh, th, zj, hj, report) = self.step(&z, &lambda_hats, &t_hats).map_err(|e| e.at_order(j))?;
            lambda_hats.push(lh);
            t_hats.push(th);
            z.push(zj);
            h.push(hj);
            reports.push(report);
        }
        Ok(ExpansionResult {
            order,
            lambda_hats,
            t_hats,
            z,
            h,
            omega0: self.hp.omega0,
            lambda0: self.hp.lambda0,
            hopf: self.hp.clone(),
            bases: self.bases.clone(),
            conventions: Conventions { z0_scale: self.scale, qj: 0.0, phase: "first-component sine" },
            reports,
        })
    }
}

/// Expansion to order `order` with default options.
pub fn expand(model: &impl DdeSystem, order: usize) -> Result<ExpansionResult> {
    expand_with(model, order, &ExpansionOptions::default())
}

pub fn expand_with(model: &impl DdeSystem, order: usize, options: &ExpansionOptions) -> Result<ExpansionResult> {
    Expander::new(model, options)?.run(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BuiltinModel, Wright};
    use approx::assert_abs_diff_eq;

    fn ndde() -> BuiltinModel {
        BuiltinModel::by_name("ndde").unwrap()
    }

    fn rel_diff(a: &TrigPoly, b: &TrigPoly) -> f64 {
        (a - b).max_abs() / a.max_abs().max(b.max_abs()).max(1e-300)
    }

    #[test]
    fn first_order_corrections_vanish() {
        for m in [ndde(), BuiltinModel::by_name("sir").unwrap()] {
            let r = expand(&m, 1).unwrap();
            assert_abs_diff_eq!(r.lambda_hats[1], 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(r.t_hats[1], 0.0, epsilon = 1e-10);
            assert_eq!(r.t_hats[0], 2.0 * PI);
            assert_abs_diff_eq!(r.lambda_hats[0], r.omega0 * r.lambda0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ndde_second_order() {
        let opts = ExpansionOptions { z0_scale: Z0Scale::RootTwoPi, ..Default::default() };
        let r = expand_with(&ndde(), 2, &opts).unwrap();
        assert_abs_diff_eq!(r.lambda_hats[2], 0.1666, epsilon = 2e-3);
        assert_abs_diff_eq!(r.t_hats[2], 0.7465, epsilon = 2e-3);
    }

    #[test]
    fn probes_are_affine_and_match_closed_forms() {
        let m = BuiltinModel::by_name("sir").unwrap();
        let ex = Expander::new(&m, &ExpansionOptions::default()).unwrap();
        let z = [ex.z0().clone()];
        let (lh, th) = ([ex.hopf().lambda_hat0], [2.0 * PI]);
        let f = ex.assemble_rhs(&z, &lh, &th).unwrap();
        let double = &ex.forcing_probe(&z, &lh, &th, 2.0, 0.0).unwrap() - &f.h0;
        assert!(rel_diff(&double, &f.s.scale(2.0)) <= 1e-10);
        let (r, s) = ex.closed_form_rs().unwrap();
        assert!(rel_diff(&r, &f.r) <= 1e-9, "R mismatch {}", rel_diff(&r, &f.r));
        assert!(rel_diff(&s, &f.s) <= 1e-9, "S mismatch {}", rel_diff(&s, &f.s));
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let m = ndde();
        let ex = Expander::new(&m, &ExpansionOptions::default()).unwrap();
        let (z, res) = ex.solve_particular(&TrigPoly::zero(2, 3)).unwrap();
        assert!(z.is_zero());
        assert_eq!(res, 0.0);
    }

    #[test]
    fn normalization_is_idempotent() {
        let m = ndde();
        let r = expand(&m, 3).unwrap();
        let ex = Expander::new(&m, &ExpansionOptions::default()).unwrap();
        for zj in &r.z[1..] {
            let (again, c) = ex.fix_homogeneous(zj).unwrap();
            assert!(c[0].abs() <= 1e-12 && c[1].abs() <= 1e-12);
            assert!(rel_diff(&again, zj) <= 1e-12);
        }
    }

    #[test]
    fn leading_scale_only_reparametrizes() {
        let m = BuiltinModel::by_name("sir").unwrap();
        let two_pi = expand(&m, 4).unwrap();
        for scale in [Z0Scale::Unit, Z0Scale::RootTwoPi] {
            let opts = ExpansionOptions { z0_scale: scale, ..Default::default() };
            let other = expand_with(&m, 4, &opts).unwrap();
            let ratio = scale.factor() / (2.0 * PI);
            for j in 0..=4 {
                let f = ratio.powi(j as i32);
                assert_abs_diff_eq!(other.lambda_hats[j], two_pi.lambda_hats[j] * f, epsilon = 1e-9);
                assert_abs_diff_eq!(other.t_hats[j], two_pi.t_hats[j] * f, epsilon = 1e-9);
                assert!(rel_diff(&other.z[j], &two_pi.z[j].scale(f * ratio)) <= 1e-9);
            }
        }
    }

    #[test]
    fn scalar_model_expands() {
        let r = expand(&Wright, 4).unwrap();
        assert_abs_diff_eq!(r.lambda_hats[0], PI / 2.0, epsilon = 1e-10);
        // Orbit period near the threshold tends to four delays.
        assert_abs_diff_eq!(r.t_hats[0] / r.lambda_hats[0], 4.0, epsilon = 1e-9);
        for rep in &r.reports {
            assert!(rep.operator_residual <= 1e-9);
        }
    }

    #[test]
    fn order_errors_are_annotated() {
        let err = expand(&ndde(), 0).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let truncated = expand(&ndde(), 3).unwrap().truncated(2).unwrap();
        assert_eq!(truncated.z.len(), 3);
        assert!(expand(&ndde(), 2).unwrap().truncated(3).is_err());
    }
}
