//! Hopf point location from the characteristic equation and the real bases
//! of the critical kernel `N(L)` and its adjoint `N(L*)`.
//!
//! In rescaled time `τ = ω₀t` the critical linear operator is
//! `L η = η' − Aη − Bη(τ − λ̂₀)` with `A = P/ω₀`, `B = Q/ω₀`, `λ̂₀ = ω₀λ₀`,
//! and its formal adjoint is `L* η = η' + Aᵀη + Bᵀη(τ + λ̂₀)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complex_condition_ratio, complex_null_vector};
use crate::model::{linearization, DdeSystem, HopfHint};
use crate::trigpoly::TrigPoly;

/// Controls for [`find_hopf_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfOptions {
    pub max_iterations: usize,
    /// Bound on the row-normalized characteristic determinant at the solution.
    pub tolerance: f64,
    /// `σ_min/σ_max` of `M(mω₀, λ₀)` at or below which harmonic `m` counts as a root.
    pub resonance_tolerance: f64,
    /// Highest harmonic checked for resonance.
    pub resonance_harmonics: usize,
}

impl Default for HopfOptions {
    fn default() -> Self {
        HopfOptions { max_iterations: 100, tolerance: 1e-11, resonance_tolerance: 1e-6, resonance_harmonics: 8 }
    }
}

/// A critical pair `±iω₀` at delay `λ₀`, with the linearization there.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfPoint {
    pub omega0: f64,
    pub lambda0: f64,
    pub lambda_hat0: f64,
    /// Kernel vector of `iω₀I − P − Qe^{−iω₀λ₀}`, unit norm.
    pub right_null: Vec<Complex64>,
    /// Kernel vector of `iI + Aᵀ + Bᵀe^{iλ̂₀}`, unit norm.
    pub left_null: Vec<Complex64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub equilibrium: Vec<f64>,
    /// Row-normalized determinant left at the solution.
    pub residual: f64,
    pub iterations: usize,
}

impl HopfPoint {
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega0
    }

    /// `A = P/ω₀`.
    pub fn a(&self) -> DMatrix<f64> {
        &self.p / self.omega0
    }

    /// `B = Q/ω₀`.
    pub fn b(&self) -> DMatrix<f64> {
        &self.q / self.omega0
    }

    /// `L η = η' − Aη − Bη(τ − λ̂₀)`.
    pub fn apply_operator(&self, eta: &TrigPoly) -> Result<TrigPoly> {
        let mut out = eta.diff();
        out.add_scaled(-1.0, &eta.apply_matrix(&self.a())?);
        out.add_scaled(-1.0, &eta.shift(self.lambda_hat0).apply_matrix(&self.b())?);
        Ok(out)
    }

    /// `L* η = η' + Aᵀη + Bᵀη(τ + λ̂₀)`.
    pub fn apply_adjoint(&self, eta: &TrigPoly) -> Result<TrigPoly> {
        let mut out = eta.diff();
        out.add_scaled(1.0, &eta.apply_matrix(&self.a().transpose())?);
        out.add_scaled(1.0, &eta.shift(-self.lambda_hat0).apply_matrix(&self.b().transpose())?);
        Ok(out)
    }
}

/// Real bases of `N(L)` (`v₁, v₂`) and `N(L*)` (`w₁, w₂`), orthonormal
/// under `∫₀^{2π} ⟨·,·⟩ dτ`.
///
/// `v₁ = Re(γe^{iτ})`, `v₂ = Re(−iγe^{iτ})` with `γ[0]` real, so the first
/// component of `v₂` is a pure sine. The overall sign makes the cosine
/// coefficient of `v₂`'s second component positive (for scalar systems, the
/// sine coefficient of `v₂`). The `w` pair is built the same way from the
/// adjoint kernel with `w₁`'s first component a positive cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBases {
    pub v1: TrigPoly,
    pub v2: TrigPoly,
    pub w1: TrigPoly,
    pub w2: TrigPoly,
}

impl LinearBases {
    pub fn v(&self) -> [&TrigPoly; 2] {
        [&self.v1, &self.v2]
    }

    pub fn w(&self) -> [&TrigPoly; 2] {
        [&self.w1, &self.w2]
    }
}

/// `iωI − P(λ) − Q(λ)e^{−iωλ}` at the equilibrium for `λ`.
pub fn characteristic_matrix(p: &DMatrix<f64>, q: &DMatrix<f64>, omega: f64, lambda: f64) -> DMatrix<Complex64> {
    let n = p.nrows();
    let decay = Complex64::from_polar(1.0, -omega * lambda);
    DMatrix::from_fn(n, n, |r, c| {
        let diag = if r == c { Complex64::new(0.0, omega) } else { Complex64::new(0.0, 0.0) };
        diag - p[(r, c)] - decay * q[(r, c)]
    })
}

/// Characteristic determinant divided by `Π_r ‖(ω e_r, P_r, Q_r)‖`, a
/// scale that stays away from zero at the roots.
fn normalized_det(p: &DMatrix<f64>, q: &DMatrix<f64>, omega: f64, lambda: f64) -> Complex64 {
    let det = characteristic_matrix(p, q, omega, lambda).lu().determinant();
    let scale: f64 = (0..p.nrows())
        .map(|r| (omega * omega + p.row(r).norm_squared() + q.row(r).norm_squared()).sqrt())
        .product();
    if scale > 0.0 {
        det / scale
    } else {
        det
    }
}

fn residual_at(model: &impl DdeSystem, omega: f64, lambda: f64) -> Result<Complex64> {
    let lin = linearization(model, lambda)?;
    Ok(normalized_det(&lin.p, &lin.q, omega, lambda))
}

/// Hopf point from the model's own hint with default options.
pub fn find_hopf(model: &impl DdeSystem) -> Result<HopfPoint> {
    find_hopf_with(model, model.hopf_hint(), &HopfOptions::default())
}

/// 2-D Newton in `(ω, λ)` on the real and imaginary parts of the
/// characteristic determinant, with a central-difference Jacobian and
/// backtracking.
pub fn find_hopf_with(model: &impl DdeSystem, hint: HopfHint, options: &HopfOptions) -> Result<HopfPoint> {
    if !(hint.omega.is_finite() && hint.lambda.is_finite() && hint.lambda > 0.0) {
        return Err(Error::InvalidInput(format!("invalid Hopf hint ({}, {})", hint.omega, hint.lambda)));
    }
    let (mut omega, mut lambda) = (hint.omega, hint.lambda);
    let mut f = residual_at(model, omega, lambda)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        let hw = 1e-7 * omega.abs().max(1e-6);
        let hl = 1e-7 * lambda.abs().max(1e-6);
        let dw = (residual_at(model, omega + hw, lambda)? - residual_at(model, omega - hw, lambda)?) / (2.0 * hw);
        let dl = (residual_at(model, omega, lambda + hl)? - residual_at(model, omega, lambda - hl)?) / (2.0 * hl);
        let jac = [[dw.re, dl.re], [dw.im, dl.im]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularJacobian("locating the Hopf point"));
        }
        let step_w = -(f.re * jac[1][1] - jac[0][1] * f.im) / det;
        let step_l = -(jac[0][0] * f.im - jac[1][0] * f.re) / det;

        let mut t = 1.0;
        let (mut next_w, mut next_l, mut next_f);
        loop {
            next_w = omega + t * step_w;
            next_l = lambda + t * step_l;
            next_f = if next_l > 0.0 { residual_at(model, next_w, next_l).ok() } else { None };
            match next_f {
                Some(v) if v.norm() < f.norm() || t < 1e-3 => break,
                _ if t < 1e-3 => break,
                _ => t *= 0.5,
            }
        }
        let Some(nf) = next_f else {
            break;
        };
        omega = next_w;
        lambda = next_l;
        f = nf;
        let small_step = (t * step_w).abs() <= 1e-14 * omega.abs() && (t * step_l).abs() <= 1e-14 * lambda.abs();
        if f.norm() <= options.tolerance * 1e-3 || small_step {
            converged = f.norm() <= options.tolerance;
            break;
        }
    }
    if !converged && f.norm() <= options.tolerance {
        converged = true;
    }
    if !converged {
        return Err(Error::HopfNonConvergence { iterations, residual: f.norm() });
    }
    if omega <= 0.0 {
        return Err(Error::NonPositiveFrequency(omega));
    }

    let lin = linearization(model, lambda)?;
    check_resonance(&lin.p, &lin.q, omega, lambda, options)?;
    let m = characteristic_matrix(&lin.p, &lin.q, omega, lambda);
    let (right, _) = complex_null_vector(&m);
    let (left, _) = complex_null_vector(&m.adjoint());
    Ok(HopfPoint {
        omega0: omega,
        lambda0: lambda,
        lambda_hat0: omega * lambda,
        right_null: right.iter().copied().collect(),
        left_null: left.iter().copied().collect(),
        p: lin.p,
        q: lin.q,
        equilibrium: lin.equilibrium,
        residual: f.norm(),
        iterations,
    })
}

/// Fails if `m·iω` is (numerically) a characteristic root for `m = 0` or
/// `2 ≤ m ≤ resonance_harmonics`.
pub fn check_resonance(p: &DMatrix<f64>, q: &DMatrix<f64>, omega: f64, lambda: f64, options: &HopfOptions) -> Result<()> {
    for m in std::iter::once(0).chain(2..=options.resonance_harmonics) {
        let ratio = complex_condition_ratio(&characteristic_matrix(p, q, m as f64 * omega, lambda));
        if ratio <= options.resonance_tolerance {
            return Err(Error::Resonance { harmonic: m });
        }
    }
    Ok(())
}

/// Scales `u` to `|u|² = 1/π` with `u[0]` real and non-negative.
fn normalize_phase(u: &[Complex64], what: &'static str) -> Result<Vec<Complex64>> {
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lead = u[0];
    if !(norm > 0.0) || lead.norm() <= 1e-12 * norm {
        return Err(Error::DegenerateBasis(what));
    }
    let rot = lead.conj() / lead.norm();
    let s = 1.0 / (norm * std::f64::consts::PI.sqrt());
    Ok(u.iter().map(|z| z * rot * s).collect())
}

/// `(Re(γe^{iτ}), Re(−iγe^{iτ}))`.
fn real_pair(gamma: &[Complex64]) -> (TrigPoly, TrigPoly) {
    let n = gamma.len();
    let mut first = TrigPoly::zero(n, 1);
    let mut second = TrigPoly::zero(n, 1);
    for (c, g) in gamma.iter().enumerate() {
        first.cos_coef_mut(1)[c] = g.re;
        first.sin_coef_mut(1)[c] = -g.im;
        second.cos_coef_mut(1)[c] = g.im;
        second.sin_coef_mut(1)[c] = g.re;
    }
    (first, second)
}

/// Orthonormal real bases of the critical kernel and adjoint kernel.
pub fn null_bases(hp: &HopfPoint) -> Result<LinearBases> {
    let mut gamma = normalize_phase(&hp.right_null, "first component of the kernel vector vanishes")?;
    // γ[0] ≥ 0 already; flip so v₂'s second-component cosine, γ[1].im, is positive.
    if gamma.len() > 1 {
        let scale = gamma.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if gamma[1].im < -1e-12 * scale {
            gamma.iter_mut().for_each(|z| *z = -*z);
        }
    }
    let delta = normalize_phase(&hp.left_null, "first component of the adjoint kernel vector vanishes")?;
    let (v1, v2) = real_pair(&gamma);
    let (w1, w2) = real_pair(&delta);
    Ok(LinearBases { v1, v2, w1, w2 })
}

/// Gram matrix `[⟨u_i, u_j⟩]` of a pair.
pub fn gram(pair: [&TrigPoly; 2]) -> Result<[[f64; 2]; 2]> {
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = pair[i].inner(pair[j])?;
        }
    }
    Ok(g)
}
