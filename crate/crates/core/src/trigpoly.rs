//! Vector-valued trigonometric polynomials on `[0, 2π]`.
//!
//! A [`TrigPoly`] of dimension `n` and degree `K` represents
//!
//! ```text
//! u(τ) = a₀ + Σ_{k=1..K} (a_k cos kτ + b_k sin kτ),   a_k, b_k ∈ Rⁿ
//! ```
//!
//! Every operation here is exact in the coefficients: products use the
//! product-to-sum identities, shifts use angle addition per harmonic and
//! inner products are evaluated in closed form.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold used by [`TrigPoly::trim`].
pub const TRIM_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TrigPolyRepr", try_from = "TrigPolyRepr")]
pub struct TrigPoly {
    dim: usize,
    degree: usize,
    // Blocks of `dim` values: [const, cos 1, sin 1, cos 2, sin 2, ...].
    coefs: Vec<f64>,
}

impl TrigPoly {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim > 0, "trigonometric polynomials need a positive dimension");
        TrigPoly { dim, degree, coefs: vec![0.0; dim * (2 * degree + 1)] }
    }

    /// Degree-0 polynomial with the given constant vector.
    pub fn constant(values: &[f64]) -> Self {
        let mut p = TrigPoly::zero(values.len(), 0);
        p.coefs.copy_from_slice(values);
        p
    }

    /// Scalar polynomial `c` (dim 1, degree 0).
    pub fn scalar(c: f64) -> Self {
        TrigPoly::constant(&[c])
    }

    /// Scalar `a cos kτ + b sin kτ`.
    pub fn scalar_harmonic(k: usize, a: f64, b: f64) -> Self {
        let mut p = TrigPoly::zero(1, k);
        if k == 0 {
            p.coefs[0] = a;
        } else {
            p.cos_coef_mut(k)[0] = a;
            p.sin_coef_mut(k)[0] = b;
        }
        p
    }

    /// Builds a polynomial from its constant term and per-harmonic cosine and
    /// sine vectors (`cos[k-1]`, `sin[k-1]` hold harmonic `k`).
    pub fn from_parts(constant: &[f64], cos: &[Vec<f64>], sin: &[Vec<f64>]) -> Result<Self> {
        let dim = constant.len();
        if dim == 0 {
            return Err(Error::InvalidInput("empty constant vector".into()));
        }
        if cos.len() != sin.len() {
            return Err(Error::InvalidInput(format!(
                "{} cosine vs {} sine harmonics",
                cos.len(),
                sin.len()
            )));
        }
        let mut p = TrigPoly::zero(dim, cos.len());
        p.coefs[..dim].copy_from_slice(constant);
        for (k, (c, s)) in cos.iter().zip(sin).enumerate() {
            for v in [c, s] {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
                }
            }
            p.cos_coef_mut(k + 1).copy_from_slice(c);
            p.sin_coef_mut(k + 1).copy_from_slice(s);
        }
        Ok(p)
    }

    /// Stacks scalar polynomials into a vector-valued one.
    pub fn from_components(components: &[TrigPoly]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("no components".into()));
        }
        let degree = components.iter().map(|c| c.degree).max().unwrap_or(0);
        let mut p = TrigPoly::zero(components.len(), degree);
        for (i, c) in components.iter().enumerate() {
            if c.dim != 1 {
                return Err(Error::NotScalar(c.dim));
            }
            for (block, value) in c.coefs.iter().enumerate() {
                p.coefs[block * p.dim + i] = *value;
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn const_coef(&self) -> &[f64] {
        &self.coefs[..self.dim]
    }

    pub fn const_coef_mut(&mut self) -> &mut [f64] {
        &mut self.coefs[..self.dim]
    }

    /// Cosine coefficient vector of harmonic `k` (`1 ≤ k ≤ degree`).
    pub fn cos_coef(&self, k: usize) -> &[f64] {
        let b = self.block(k, 0);
        &self.coefs[b..b + self.dim]
    }

    /// Sine coefficient vector of harmonic `k` (`1 ≤ k ≤ degree`).
    pub fn sin_coef(&self, k: usize) -> &[f64] {
        let b = self.block(k, 1);
        &self.coefs[b..b + self.dim]
    }

    pub fn cos_coef_mut(&mut self, k: usize) -> &mut [f64] {
        let b = self.block(k, 0);
        &mut self.coefs[b..b + self.dim]
    }

    pub fn sin_coef_mut(&mut self, k: usize) -> &mut [f64] {
        let b = self.block(k, 1);
        &mut self.coefs[b..b + self.dim]
    }

    fn block(&self, k: usize, part: usize) -> usize {
        assert!(k >= 1 && k <= self.degree, "harmonic {k} outside 1..={}", self.degree);
        (2 * k - 1 + part) * self.dim
    }

    /// `(cos, sin)` coefficient of component `c` at harmonic `k`; zero above
    /// the degree. For `k = 0` the constant is returned as the cosine part.
    pub fn coef(&self, c: usize, k: usize) -> (f64, f64) {
        if k == 0 {
            (self.coefs[c], 0.0)
        } else if k > self.degree {
            (0.0, 0.0)
        } else {
            (self.coefs[(2 * k - 1) * self.dim + c], self.coefs[2 * k * self.dim + c])
        }
    }

    /// Phase-invariant amplitude `√(a² + b²)` of component `c` at harmonic `k`
    /// (the absolute constant for `k = 0`).
    pub fn amplitude(&self, c: usize, k: usize) -> f64 {
        let (a, b) = self.coef(c, k);
        a.hypot(b)
    }

    /// Raw coefficient storage, block-ordered.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    pub fn max_abs(&self) -> f64 {
        self.coefs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute coefficient of harmonic `k` over all components.
    pub fn harmonic_max_abs(&self, k: usize) -> f64 {
        (0..self.dim).map(|c| {
            let (a, b) = self.coef(c, k);
            a.abs().max(b.abs())
        })
        .fold(0.0, f64::max)
    }

    /// Scalar polynomial holding component `c`.
    pub fn component(&self, c: usize) -> TrigPoly {
        assert!(c < self.dim);
        let mut p = TrigPoly::zero(1, self.degree);
        for (block, slot) in p.coefs.iter_mut().enumerate() {
            *slot = self.coefs[block * self.dim + c];
        }
        p
    }

    pub fn components(&self) -> Vec<TrigPoly> {
        (0..self.dim).map(|c| self.component(c)).collect()
    }

    /// Copy with storage padded (or cut) to exactly `degree` harmonics.
    pub fn with_degree(&self, degree: usize) -> TrigPoly {
        let mut p = TrigPoly::zero(self.dim, degree);
        let n = p.coefs.len().min(self.coefs.len());
        p.coefs[..n].copy_from_slice(&self.coefs[..n]);
        p
    }

    /// Drops trailing harmonics whose coefficients are all below
    /// `rel_tol · max_abs()`.
    pub fn trim(&self, rel_tol: f64) -> TrigPoly {
        let threshold = rel_tol * self.max_abs();
        let mut degree = self.degree;
        while degree > 0 && self.harmonic_max_abs(degree) <= threshold {
            degree -= 1;
        }
        self.with_degree(degree)
    }

    pub fn is_zero(&self) -> bool {
        self.coefs.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly { dim: self.dim, degree: self.degree, coefs: self.coefs.iter().map(|v| v * s).collect() }
    }

    /// Accumulates `s · other` into `self`, growing the degree if needed.
    pub fn add_scaled(&mut self, s: f64, other: &TrigPoly) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        if other.degree > self.degree {
            *self = self.with_degree(other.degree);
        }
        for (a, b) in self.coefs.iter_mut().zip(&other.coefs) {
            *a += s * b;
        }
    }

    /// Coefficient-wise linear combination `Σ cᵢ uᵢ`.
    pub fn linear_combination(coeffs: &[f64], terms: &[TrigPoly]) -> Result<TrigPoly> {
        if coeffs.len() != terms.len() {
            return Err(Error::DimensionMismatch { expected: terms.len(), found: coeffs.len() });
        }
        let first = terms.first().ok_or_else(|| Error::InvalidInput("no terms".into()))?;
        let degree = terms.iter().map(|t| t.degree).max().unwrap_or(0);
        let mut out = TrigPoly::zero(first.dim, degree);
        for (c, t) in coeffs.iter().zip(terms) {
            if t.dim != first.dim {
                return Err(Error::DimensionMismatch { expected: first.dim, found: t.dim });
            }
            out.add_scaled(*c, t);
        }
        Ok(out)
    }

    /// Exact product of two scalar polynomials.
    pub fn try_mul(&self, other: &TrigPoly) -> Result<TrigPoly> {
        if self.dim != 1 {
            return Err(Error::NotScalar(self.dim));
        }
        if other.dim != 1 {
            return Err(Error::NotScalar(other.dim));
        }
        Ok(self.mul_scalar(other))
    }

    /// Component-wise product of a scalar polynomial with a vector-valued one.
    pub fn mul_vector(&self, vector: &TrigPoly) -> Result<TrigPoly> {
        if self.dim != 1 {
            return Err(Error::NotScalar(self.dim));
        }
        let parts: Vec<TrigPoly> = vector.components().iter().map(|c| self.mul_scalar(c)).collect();
        TrigPoly::from_components(&parts)
    }

    pub(crate) fn mul_scalar(&self, other: &TrigPoly) -> TrigPoly {
        debug_assert!(self.dim == 1 && other.dim == 1);
        let (p, q) = (self.degree, other.degree);
        let mut out = TrigPoly::zero(1, p + q);
        // Index 0 carries the constant as "cos 0τ" with a zero sine partner.
        let ab = |u: &TrigPoly, k: usize| -> (f64, f64) {
            if k == 0 {
                (u.coefs[0], 0.0)
            } else {
                (u.coefs[2 * k - 1], u.coefs[2 * k])
            }
        };
        let c = &mut out.coefs;
        let mut add_cos = |m: usize, v: f64| {
            if m == 0 {
                c[0] += v;
            } else {
                c[2 * m - 1] += v;
            }
        };
        let mut sines = vec![0.0; p + q + 1];
        for j in 0..=p {
            let (aj, bj) = ab(self, j);
            if aj == 0.0 && bj == 0.0 {
                continue;
            }
            for k in 0..=q {
                let (ak, bk) = ab(other, k);
                let (aa, bb, ba, abk) = (aj * ak, bj * bk, bj * ak, aj * bk);
                let s = j + k;
                add_cos(s, 0.5 * (aa - bb));
                add_cos(j.abs_diff(k), 0.5 * (aa + bb));
                sines[s] += 0.5 * (ba + abk);
                if j > k {
                    sines[j - k] += 0.5 * (ba - abk);
                } else if k > j {
                    sines[k - j] -= 0.5 * (ba - abk);
                }
            }
        }
        for (m, v) in sines.into_iter().enumerate().skip(1) {
            out.coefs[2 * m] += v;
        }
        out
    }

    /// Derivative in τ.
    pub fn diff(&self) -> TrigPoly {
        let mut out = TrigPoly::zero(self.dim, self.degree);
        for k in 1..=self.degree {
            let kf = k as f64;
            for c in 0..self.dim {
                let (a, b) = self.coef(c, k);
                out.cos_coef_mut(k)[c] = kf * b;
                out.sin_coef_mut(k)[c] = -kf * a;
            }
        }
        out
    }

    /// `m`-th derivative in τ.
    pub fn diff_n(&self, m: usize) -> TrigPoly {
        (0..m).fold(self.clone(), |p, _| p.diff())
    }

    /// Returns `τ ↦ u(τ − θ)`.
    pub fn shift(&self, theta: f64) -> TrigPoly {
        let mut out = self.clone();
        for k in 1..=self.degree {
            let (s, c) = (k as f64 * theta).sin_cos();
            for i in 0..self.dim {
                let (a, b) = self.coef(i, k);
                out.cos_coef_mut(k)[i] = a * c - b * s;
                out.sin_coef_mut(k)[i] = a * s + b * c;
            }
        }
        out
    }

    /// `∫₀^{2π} ⟨u(τ), v(τ)⟩ dτ` in closed form.
    pub fn inner(&self, other: &TrigPoly) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let d = self.dim;
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let mut total = 2.0 * PI * dot(&self.coefs[..d], &other.coefs[..d]);
        let shared = self.degree.min(other.degree);
        let end = (2 * shared + 1) * d;
        total += PI * dot(&self.coefs[d..end], &other.coefs[d..end]);
        Ok(total)
    }

    pub fn eval(&self, tau: f64) -> Vec<f64> {
        let mut out = self.const_coef().to_vec();
        for k in 1..=self.degree {
            let (s, c) = (k as f64 * tau).sin_cos();
            let cos = self.cos_coef(k);
            let sin = self.sin_coef(k);
            for i in 0..self.dim {
                out[i] += cos[i] * c + sin[i] * s;
            }
        }
        out
    }

    /// Value of component `c` at τ.
    pub fn eval_component(&self, c: usize, tau: f64) -> f64 {
        let mut v = self.coefs[c];
        for k in 1..=self.degree {
            let (s, cs) = (k as f64 * tau).sin_cos();
            let (a, b) = self.coef(c, k);
            v += a * cs + b * s;
        }
        v
    }

    /// Left-multiplies every coefficient vector by `m` (which may change the dimension).
    pub fn apply_matrix(&self, m: &DMatrix<f64>) -> Result<TrigPoly> {
        if m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: m.ncols(), found: self.dim });
        }
        let rows = m.nrows();
        let mut out = TrigPoly::zero(rows, self.degree);
        for block in 0..(2 * self.degree + 1) {
            let src = &self.coefs[block * self.dim..(block + 1) * self.dim];
            for r in 0..rows {
                out.coefs[block * rows + r] = (0..self.dim).map(|c| m[(r, c)] * src[c]).sum();
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &TrigPoly, f: impl Fn(f64, f64) -> f64) -> TrigPoly {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let degree = self.degree.max(other.degree);
        let a = self.with_degree(degree);
        let b = other.with_degree(degree);
        TrigPoly {
            dim: self.dim,
            degree,
            coefs: a.coefs.iter().zip(&b.coefs).map(|(x, y)| f(*x, *y)).collect(),
        }
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        &self + &rhs
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        &self - &rhs
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}

impl Mul<f64> for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}

/// JSON shape: `{dim, degree, const, cos: [[..]], sin: [[..]]}`.
#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    dim: usize,
    degree: usize,
    #[serde(rename = "const")]
    constant: Vec<f64>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        TrigPolyRepr {
            dim: p.dim,
            degree: p.degree,
            constant: p.const_coef().to_vec(),
            cos: (1..=p.degree).map(|k| p.cos_coef(k).to_vec()).collect(),
            sin: (1..=p.degree).map(|k| p.sin_coef(k).to_vec()).collect(),
        }
    }
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = Error;
    fn try_from(r: TrigPolyRepr) -> Result<Self> {
        if r.constant.len() != r.dim {
            return Err(Error::DimensionMismatch { expected: r.dim, found: r.constant.len() });
        }
        if r.cos.len() != r.degree {
            return Err(Error::InvalidInput(format!("degree {} but {} cosine harmonics", r.degree, r.cos.len())));
        }
        TrigPoly::from_parts(&r.constant, &r.cos, &r.sin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cos1() -> TrigPoly {
        TrigPoly::scalar_harmonic(1, 1.0, 0.0)
    }

    fn sin1() -> TrigPoly {
        TrigPoly::scalar_harmonic(1, 0.0, 1.0)
    }

    /// Small deterministic generator so tests need no RNG dependency.
    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_poly(dim: usize, degree: usize, seed: &mut u64) -> TrigPoly {
        let mut p = TrigPoly::zero(dim, degree);
        for v in p.coefs.iter_mut() {
            *v = lcg(seed);
        }
        p
    }

    #[test]
    fn linear_combination_identities() {
        let mut seed = 7;
        let u = random_poly(2, 3, &mut seed);
        let z = TrigPoly::linear_combination(&[1.0, -1.0], &[u.clone(), u.clone()]).unwrap();
        assert!(z.is_zero());
        let half = TrigPoly::linear_combination(&[0.5, 0.5], &[u.clone(), u.clone()]).unwrap();
        assert_eq!(half, u);
        let two = TrigPoly::linear_combination(&[2.0], &[cos1()]).unwrap();
        assert_eq!(two.coef(0, 1), (2.0, 0.0));
    }

    #[test]
    fn linear_combination_rejects_mixed_dims() {
        let err = TrigPoly::linear_combination(&[1.0, 1.0], &[TrigPoly::zero(1, 1), TrigPoly::zero(2, 1)]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn double_angle_products() {
        let cc = cos1().try_mul(&cos1()).unwrap();
        assert_abs_diff_eq!(cc.const_coef()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cc.coef(0, 2).0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cc.coef(0, 1).0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cc.coef(0, 2).1, 0.0, epsilon = 1e-15);

        let sc = sin1().try_mul(&cos1()).unwrap();
        assert_abs_diff_eq!(sc.const_coef()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sc.coef(0, 2).1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sc.coef(0, 2).0, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn product_matches_pointwise_samples() {
        let mut seed = 11;
        let u = random_poly(1, 2, &mut seed);
        let v = random_poly(1, 3, &mut seed);
        let w = u.try_mul(&v).unwrap();
        assert_eq!(w.degree(), 5);
        for i in 0..64 {
            let tau = 2.0 * PI * i as f64 / 64.0;
            let expected = u.eval_component(0, tau) * v.eval_component(0, tau);
            assert_abs_diff_eq!(w.eval_component(0, tau), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn mul_rejects_vectors() {
        assert!(matches!(TrigPoly::zero(2, 1).try_mul(&cos1()), Err(Error::NotScalar(2))));
    }

    #[test]
    fn derivative_cases() {
        let d = cos1().diff();
        assert_eq!(d.coef(0, 1), (0.0, -1.0));
        assert!(TrigPoly::constant(&[3.0, -2.0]).diff().is_zero());

        let mut seed = 3;
        let u = random_poly(2, 4, &mut seed);
        let du = u.diff();
        let h = 1e-6;
        for i in 0..16 {
            let tau = 0.37 * i as f64;
            let plus = u.eval(tau + h);
            let minus = u.eval(tau - h);
            let got = du.eval(tau);
            for c in 0..2 {
                assert_abs_diff_eq!(got[c], (plus[c] - minus[c]) / (2.0 * h), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn shift_cases() {
        let s = cos1().shift(PI / 2.0);
        assert_abs_diff_eq!(s.coef(0, 1).0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coef(0, 1).1, 1.0, epsilon = 1e-15);

        let mut seed = 5;
        let u = random_poly(2, 3, &mut seed);
        assert_eq!(u.shift(0.0), u);
        for _ in 0..64 {
            let tau = 4.0 * lcg(&mut seed);
            let theta = 4.0 * lcg(&mut seed);
            let a = u.shift(theta).eval(tau);
            let b = u.eval(tau - theta);
            for c in 0..2 {
                assert_abs_diff_eq!(a[c], b[c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inner_product_cases() {
        assert_abs_diff_eq!(cos1().inner(&sin1()).unwrap(), 0.0);
        assert_abs_diff_eq!(cos1().inner(&cos1()).unwrap(), PI, epsilon = 1e-15);

        let mut seed = 19;
        let u = random_poly(3, 3, &mut seed);
        let v = random_poly(3, 5, &mut seed);
        let n = 2048;
        let h = 2.0 * PI / n as f64;
        // Periodic trapezoid rule: exact for these degrees, used as an independent oracle.
        let quad: f64 = (0..n)
            .map(|i| {
                let tau = i as f64 * h;
                u.eval(tau).iter().zip(v.eval(tau)).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum::<f64>()
            * h;
        assert_abs_diff_eq!(u.inner(&v).unwrap(), quad, epsilon = 1e-10);
        assert!(matches!(u.inner(&TrigPoly::zero(2, 1)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eval_cases() {
        assert_eq!(cos1().eval(0.0), vec![1.0]);
        assert_eq!(TrigPoly::zero(3, 2).eval(1.3), vec![0.0; 3]);
        let mut seed = 23;
        let u = random_poly(2, 2, &mut seed);
        let v = random_poly(2, 4, &mut seed);
        let sum = (&u + &v).eval(0.9);
        let parts: Vec<f64> = u.eval(0.9).iter().zip(v.eval(0.9)).map(|(a, b)| a + b).collect();
        for c in 0..2 {
            assert_abs_diff_eq!(sum[c], parts[c], epsilon = 1e-14);
        }
    }

    #[test]
    fn trim_drops_negligible_tail() {
        let mut p = TrigPoly::zero(1, 4);
        p.coefs[0] = 1.0;
        p.cos_coef_mut(2)[0] = 0.5;
        p.sin_coef_mut(4)[0] = 1e-15;
        assert_eq!(p.trim(TRIM_TOLERANCE).degree(), 2);
    }

    #[test]
    fn components_round_trip() {
        let mut seed = 29;
        let u = random_poly(3, 2, &mut seed);
        assert_eq!(TrigPoly::from_components(&u.components()).unwrap(), u);
    }

    #[test]
    fn json_shape() {
        let p = TrigPoly::from_parts(&[1.0, 2.0], &[vec![0.5, 0.0]], &[vec![0.0, -1.0]]).unwrap();
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["degree"], 1);
        assert_eq!(json["const"], serde_json::json!([1.0, 2.0]));
        assert_eq!(json["sin"], serde_json::json!([[0.0, -1.0]]));
        let back: TrigPoly = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly(dim: usize, max_degree: usize) -> impl Strategy<Value = TrigPoly> {
            (0..=max_degree).prop_flat_map(move |deg| {
                prop::collection::vec(-2.0..2.0f64, dim * (2 * deg + 1)).prop_map(move |coefs| TrigPoly {
                    dim,
                    degree: deg,
                    coefs,
                })
            })
        }

        proptest! {
            #[test]
            fn product_degree_is_exact(u in poly(1, 4), v in poly(1, 4)) {
                let w = u.try_mul(&v).unwrap();
                prop_assert_eq!(w.degree(), u.degree() + v.degree());
            }

            #[test]
            fn shifts_compose(u in poly(2, 4), a in -5.0..5.0f64, b in -5.0..5.0f64) {
                let lhs = u.shift(a).shift(b);
                let rhs = u.shift(a + b);
                for (x, y) in lhs.coefficients().iter().zip(rhs.coefficients()) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }

            #[test]
            fn diff_commutes_with_shift(u in poly(2, 5), a in -5.0..5.0f64) {
                let lhs = u.shift(a).diff();
                let rhs = u.diff().shift(a);
                for (x, y) in lhs.coefficients().iter().zip(rhs.coefficients()) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }

            #[test]
            fn inner_is_symmetric_bilinear(u in poly(2, 3), v in poly(2, 3), w in poly(2, 3), s in -3.0..3.0f64) {
                let uv = u.inner(&v).unwrap();
                prop_assert!((uv - v.inner(&u).unwrap()).abs() <= 1e-12);
                let lhs = (&u.scale(s) + &w).inner(&v).unwrap();
                let rhs = s * uv + w.inner(&v).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10);
                prop_assert!(u.inner(&u).unwrap() >= 0.0);
            }
        }
    }
}
