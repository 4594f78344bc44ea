//! Truncated power series ("jets") in the expansion amplitude ε.
//!
//! An [`EpsSeries`] holds the coefficients `s₀, …, s_N` of
//! `s(ε) = Σ s_k ε^k` and discards everything beyond `ε^N`. Coefficients are
//! either plain reals or scalar trigonometric polynomials in τ; the second
//! kind is the ring over which model right-hand sides are evaluated to pick
//! out each order of the perturbation problem.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

/// Coefficient ring of an [`EpsSeries`].
pub trait Coefficient: Clone + Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn constant_like(&self, c: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn scaled(&self, s: f64) -> Self;
    /// `acc += a · b`.
    fn accumulate_product(acc: &mut Self, a: &Self, b: &Self);
    /// Constant part and the size of the remainder (zero for reals).
    fn split_constant(&self) -> (f64, f64);
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn accumulate_product(acc: &mut Self, a: &Self, b: &Self) {
        *acc += a * b;
    }
    fn split_constant(&self) -> (f64, f64) {
        (*self, 0.0)
    }
}

/// Scalar (dim 1) trigonometric polynomials.
impl Coefficient for TrigPoly {
    fn zero_like(&self) -> Self {
        TrigPoly::zero(1, 0)
    }
    fn constant_like(&self, c: f64) -> Self {
        TrigPoly::scalar(c)
    }
    fn is_zero(&self) -> bool {
        TrigPoly::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn scaled(&self, s: f64) -> Self {
        self.scale(s)
    }
    fn accumulate_product(acc: &mut Self, a: &Self, b: &Self) {
        acc.add_scaled(1.0, &a.mul_scalar(b));
    }
    fn split_constant(&self) -> (f64, f64) {
        let rest = (1..=self.degree()).map(|k| self.harmonic_max_abs(k)).fold(0.0, f64::max);
        (self.const_coef()[0], rest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsSeries<C> {
    coeffs: Vec<C>,
}

/// Series with real coefficients (λ̂(ε), T̂(ε), equilibrium branches).
pub type ScalarSeries = EpsSeries<f64>;
/// Series with scalar trigonometric-polynomial coefficients (components of Z(τ, ε)).
pub type TrigSeries = EpsSeries<TrigPoly>;

impl<C: Coefficient> EpsSeries<C> {
    /// Series from its coefficients; the truncation order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the ε⁰ coefficient");
        EpsSeries { coeffs }
    }

    pub fn constant(c: C, order: usize) -> Self {
        let zero = c.zero_like();
        let mut coeffs = vec![zero; order + 1];
        coeffs[0] = c;
        EpsSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Series of the same shape whose value is the constant `c`.
    pub fn constant_like(&self, c: f64) -> Self {
        EpsSeries::constant(self.coeffs[0].constant_like(c), self.order())
    }

    pub fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        EpsSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(EpsSeries { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.plus(b)).collect() })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(EpsSeries { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.minus(b)).collect() })
    }

    /// Cauchy product truncated at the common order.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order();
        let mut out: Vec<C> = self.coeffs.iter().map(|c| c.zero_like()).collect();
        let nonzero_a: Vec<bool> = self.coeffs.iter().map(|c| !c.is_zero()).collect();
        let nonzero_b: Vec<bool> = other.coeffs.iter().map(|c| !c.is_zero()).collect();
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            for i in 0..=k {
                if nonzero_a[i] && nonzero_b[k - i] {
                    C::accumulate_product(slot, &self.coeffs[i], &other.coeffs[k - i]);
                }
            }
        }
        Ok(EpsSeries { coeffs: out })
    }

    /// Leading constant of a divisor or analytic argument, validated.
    fn leading_constant(&self) -> Result<f64> {
        let (c, rest) = self.coeffs[0].split_constant();
        if rest > 1e-14 * c.abs().max(1.0) {
            return Err(Error::NonConstantLeading(rest));
        }
        Ok(c)
    }

    /// Series quotient by recursive back-substitution.
    pub fn checked_div(&self, divisor: &Self) -> Result<Self> {
        self.check_order(divisor)?;
        let c = divisor.leading_constant()?;
        if c == 0.0 {
            return Err(Error::ZeroLeading);
        }
        let inv = 1.0 / c;
        let mut q: Vec<C> = Vec::with_capacity(self.coeffs.len());
        for k in 0..self.coeffs.len() {
            let mut acc = self.coeffs[k].clone();
            for i in 1..=k {
                if !divisor.coeffs[i].is_zero() && !q[k - i].is_zero() {
                    let mut prod = acc.zero_like();
                    C::accumulate_product(&mut prod, &divisor.coeffs[i], &q[k - i]);
                    acc = acc.minus(&prod);
                }
            }
            q.push(acc.scaled(inv));
        }
        Ok(EpsSeries { coeffs: q })
    }

    /// `f(s)` by Taylor recentering at the constant part of `s₀`.
    pub fn analytic(&self, f: AnalyticFn) -> Result<Self> {
        let c0 = self.leading_constant()?;
        let n = self.order();
        let taylor = f.taylor_coefficients(c0, n)?;
        let mut h = self.clone();
        h.coeffs[0] = h.coeffs[0].minus(&h.coeffs[0].constant_like(c0));
        // Horner in h; h has no ε⁰ term so h^m vanishes beyond m = n.
        let mut acc = self.constant_like(taylor[n]);
        for m in (0..n).rev() {
            acc = acc.checked_mul(&h)?;
            acc.coeffs[0] = acc.coeffs[0].plus(&acc.coeffs[0].constant_like(taylor[m]));
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Result<Self> {
        self.analytic(AnalyticFn::Exp)
    }

    pub fn ln(&self) -> Result<Self> {
        self.analytic(AnalyticFn::Log)
    }

    /// Drops the ε⁰ coefficient and shifts the rest down: the series of `s/ε`
    /// when `s₀` vanishes. The result keeps the order, padding `ε^N` with zero.
    pub fn div_eps(&self) -> Self {
        let mut coeffs: Vec<C> = self.coeffs[1..].to_vec();
        coeffs.push(self.coeffs[0].zero_like());
        EpsSeries { coeffs }
    }

    /// Same series at a different truncation order (zero-padded or cut).
    pub fn with_order(&self, order: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, zero);
        EpsSeries { coeffs }
    }
}

impl ScalarSeries {
    pub fn from_slice(values: &[f64]) -> Self {
        EpsSeries::new(values.to_vec())
    }

    /// Value at ε.
    pub fn eval(&self, eps: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * eps + c)
    }

    /// Lossless embedding as a series of degree-0 trigonometric polynomials.
    pub fn embed(&self) -> TrigSeries {
        EpsSeries { coeffs: self.coeffs.iter().map(|c| TrigPoly::scalar(*c)).collect() }
    }
}

impl TrigSeries {
    /// Value at (τ, ε).
    pub fn eval(&self, tau: f64, eps: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * eps + c.eval_component(0, tau))
    }

    /// Product with a real-coefficient series.
    pub fn scale_by(&self, s: &ScalarSeries) -> Result<TrigSeries> {
        self.checked_mul(&s.with_order(self.order()).embed())
    }

    /// Coefficient-wise τ-derivative.
    pub fn diff_tau(&self) -> TrigSeries {
        self.map(TrigPoly::diff)
    }

    /// Coefficient-wise τ-shift `τ ↦ τ − θ`.
    pub fn shift_tau(&self, theta: f64) -> TrigSeries {
        self.map(|c| c.shift(theta))
    }

    /// Series of `Z(τ − θ(ε), ε)`.
    ///
    /// With `Δθ = θ − θ₀` (no ε⁰ term) this is
    /// `Σ_m (−Δθ)^m / m! · ∂^m_τ Z(τ − θ₀)`, which terminates at `m = N`.
    pub fn delayed(&self, theta: &ScalarSeries, theta0: f64) -> Result<TrigSeries> {
        if theta.order() != self.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: theta.order() });
        }
        let lead = theta.coeffs[0];
        if (lead - theta0).abs() > 1e-12 * theta0.abs().max(1.0) {
            return Err(Error::ShiftMismatch { expected: theta0, found: lead });
        }
        let mut minus_dtheta = -theta;
        minus_dtheta.coeffs[0] = 0.0;

        let mut result = self.shift_tau(theta0);
        let mut weight = theta.constant_like(1.0);
        let mut derivative = self.clone();
        for m in 1..=self.order() {
            weight = weight.checked_mul(&minus_dtheta)? * (1.0 / m as f64);
            if weight.coeffs.iter().all(|c| *c == 0.0) {
                break;
            }
            derivative = derivative.diff_tau();
            result = result.checked_add(&derivative.shift_tau(theta0).scale_by(&weight)?)?;
        }
        Ok(result)
    }
}

/// Elementary functions available to series arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFn {
    Exp,
    Log,
    Pow(f64),
    Sin,
    Cos,
}

impl AnalyticFn {
    fn name(&self) -> &'static str {
        match self {
            AnalyticFn::Exp => "exp",
            AnalyticFn::Log => "log",
            AnalyticFn::Pow(_) => "pow",
            AnalyticFn::Sin => "sin",
            AnalyticFn::Cos => "cos",
        }
    }

    /// `f^{(m)}(c) / m!` for `m = 0..=n`.
    pub fn taylor_coefficients(&self, c: f64, n: usize) -> Result<Vec<f64>> {
        let domain = || Error::Domain { function: self.name(), value: c };
        let mut out = Vec::with_capacity(n + 1);
        match *self {
            AnalyticFn::Exp => {
                let e = c.exp();
                let mut fact = 1.0;
                for m in 0..=n {
                    if m > 0 {
                        fact *= m as f64;
                    }
                    out.push(e / fact);
                }
            }
            AnalyticFn::Log => {
                if c <= 0.0 {
                    return Err(domain());
                }
                out.push(c.ln());
                for m in 1..=n {
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    out.push(sign / (m as f64 * c.powi(m as i32)));
                }
            }
            AnalyticFn::Pow(p) => {
                let integral = p.fract() == 0.0 && p >= 0.0;
                if c < 0.0 && !integral || c == 0.0 && !integral {
                    return Err(domain());
                }
                let mut binom = 1.0;
                for m in 0..=n {
                    if m > 0 {
                        binom *= (p - (m as f64 - 1.0)) / m as f64;
                    }
                    let power = p - m as f64;
                    let cp = if c == 0.0 { if power == 0.0 { 1.0 } else { 0.0 } } else { c.powf(power) };
                    out.push(binom * cp);
                }
            }
            AnalyticFn::Sin | AnalyticFn::Cos => {
                let phase = if matches!(self, AnalyticFn::Cos) { std::f64::consts::FRAC_PI_2 } else { 0.0 };
                let mut fact = 1.0;
                for m in 0..=n {
                    if m > 0 {
                        fact *= m as f64;
                    }
                    // sin^{(m)}(c) = sin(c + mπ/2); cos is sin shifted by π/2.
                    let arg = c + phase + m as f64 * std::f64::consts::FRAC_PI_2;
                    out.push(arg.sin() / fact);
                }
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(domain());
        }
        Ok(out)
    }
}

macro_rules! series_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<C: Coefficient> $trait<&EpsSeries<C>> for &EpsSeries<C> {
            type Output = EpsSeries<C>;
            fn $method(self, rhs: &EpsSeries<C>) -> EpsSeries<C> {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl<C: Coefficient> $trait for EpsSeries<C> {
            type Output = EpsSeries<C>;
            fn $method(self, rhs: EpsSeries<C>) -> EpsSeries<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

series_binop!(Add, add, checked_add);
series_binop!(Sub, sub, checked_sub);
series_binop!(Mul, mul, checked_mul);

impl<C: Coefficient> Neg for &EpsSeries<C> {
    type Output = EpsSeries<C>;
    fn neg(self) -> EpsSeries<C> {
        self.map(|c| c.scaled(-1.0))
    }
}

impl<C: Coefficient> Neg for EpsSeries<C> {
    type Output = EpsSeries<C>;
    fn neg(self) -> EpsSeries<C> {
        -&self
    }
}

impl<C: Coefficient> Mul<f64> for &EpsSeries<C> {
    type Output = EpsSeries<C>;
    fn mul(self, rhs: f64) -> EpsSeries<C> {
        self.map(|c| c.scaled(rhs))
    }
}

impl<C: Coefficient> Mul<f64> for EpsSeries<C> {
    type Output = EpsSeries<C>;
    fn mul(self, rhs: f64) -> EpsSeries<C> {
        &self * rhs
    }
}

impl<C: Coefficient> Add<f64> for EpsSeries<C> {
    type Output = EpsSeries<C>;
    fn add(mut self, rhs: f64) -> EpsSeries<C> {
        self.coeffs[0] = self.coeffs[0].plus(&self.coeffs[0].constant_like(rhs));
        self
    }
}

impl<C: Coefficient> Sub<f64> for EpsSeries<C> {
    type Output = EpsSeries<C>;
    fn sub(self, rhs: f64) -> EpsSeries<C> {
        self + (-rhs)
    }
}

/// Arithmetic contract for model right-hand sides.
///
/// Implemented by `f64` and by both series kinds, so a single generic `rhs`
/// evaluates pointwise, linearizes (first-order real series) and produces
/// the order-by-order terms of the perturbation problem (trigonometric series).
pub trait ModelScalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// A constant with the same shape (truncation order) as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn try_div(&self, divisor: &Self) -> Result<Self>;
    fn try_exp(&self) -> Result<Self>;
}

impl ModelScalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn try_div(&self, divisor: &Self) -> Result<Self> {
        Ok(self / divisor)
    }
    fn try_exp(&self) -> Result<Self> {
        Ok(self.exp())
    }
}

impl<C: Coefficient> ModelScalar for EpsSeries<C> {
    fn constant_like(&self, c: f64) -> Self {
        EpsSeries::constant_like(self, c)
    }
    fn try_div(&self, divisor: &Self) -> Result<Self> {
        self.checked_div(divisor)
    }
    fn try_exp(&self) -> Result<Self> {
        self.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_trig_series(order: usize, degree: usize, seed: &mut u64) -> TrigSeries {
        EpsSeries::new(
            (0..=order)
                .map(|_| {
                    let mut p = TrigPoly::zero(1, degree);
                    p.const_coef_mut()[0] = lcg(seed);
                    for k in 1..=degree {
                        p.cos_coef_mut(k)[0] = lcg(seed);
                        p.sin_coef_mut(k)[0] = lcg(seed);
                    }
                    p
                })
                .collect(),
        )
    }

    fn assert_scalar_eq(a: &ScalarSeries, b: &[f64], tol: f64) {
        assert_eq!(a.order() + 1, b.len());
        for (x, y) in a.coeffs().iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn product_of_conjugate_binomials() {
        let a = ScalarSeries::from_slice(&[1.0, 1.0, 0.0]);
        let b = ScalarSeries::from_slice(&[1.0, -1.0, 0.0]);
        assert_scalar_eq(&(&a * &b), &[1.0, 0.0, -1.0], 0.0);
    }

    #[test]
    fn square_of_eps_cos() {
        let cos = TrigPoly::scalar_harmonic(1, 1.0, 0.0);
        let s = EpsSeries::new(vec![TrigPoly::zero(1, 0), cos, TrigPoly::zero(1, 0)]);
        let sq = &s * &s;
        assert!(sq.coeff(0).is_zero() && sq.coeff(1).is_zero());
        assert_abs_diff_eq!(sq.coeff(2).const_coef()[0], 0.5);
        assert_abs_diff_eq!(sq.coeff(2).coef(0, 2).0, 0.5);
    }

    #[test]
    fn order_mismatch_is_reported() {
        let a = ScalarSeries::from_slice(&[1.0, 2.0]);
        let b = ScalarSeries::from_slice(&[1.0, 2.0, 3.0]);
        assert!(matches!(a.checked_mul(&b), Err(Error::OrderMismatch { left: 1, right: 2 })));
    }

    #[test]
    fn product_evaluation_homomorphism() {
        let mut seed = 41;
        let a = random_trig_series(4, 2, &mut seed);
        let b = random_trig_series(4, 3, &mut seed);
        let p = &a * &b;
        let eps: f64 = 0.07;
        for i in 0..16 {
            let tau = 0.4 * i as f64;
            let truncation = 6.0 * eps.powi(5); // omitted ε⁵.. terms, generous bound
            assert_abs_diff_eq!(p.eval(tau, eps), a.eval(tau, eps) * b.eval(tau, eps), epsilon = truncation);
        }
    }

    #[test]
    fn geometric_series() {
        let one = ScalarSeries::from_slice(&[1.0, 0.0, 0.0, 0.0]);
        let d = ScalarSeries::from_slice(&[1.0, 1.0, 0.0, 0.0]);
        assert_scalar_eq(&one.checked_div(&d).unwrap(), &[1.0, -1.0, 1.0, -1.0], 1e-15);
    }

    #[test]
    fn division_round_trips() {
        let mut seed = 43;
        let mut s = random_trig_series(5, 2, &mut seed);
        let mut t = random_trig_series(5, 2, &mut seed);
        t.coeffs[0] = TrigPoly::scalar(1.5);
        let q = s.checked_div(&t).unwrap();
        let back = &q * &t;
        for (x, y) in back.coeffs().iter().zip(s.coeffs()) {
            for (u, v) in x.with_degree(10).coefficients().iter().zip(y.with_degree(10).coefficients()) {
                assert_abs_diff_eq!(u, v, epsilon = 1e-12);
            }
        }
        s.coeffs[0] = TrigPoly::scalar(0.8);
        let unit = s.checked_div(&s).unwrap();
        assert_abs_diff_eq!(unit.coeff(0).const_coef()[0], 1.0, epsilon = 1e-15);
        for c in &unit.coeffs()[1..] {
            assert!(c.max_abs() < 1e-12);
        }
    }

    #[test]
    fn division_errors() {
        let s = ScalarSeries::from_slice(&[1.0, 1.0]);
        let z = ScalarSeries::from_slice(&[0.0, 1.0]);
        assert!(matches!(s.checked_div(&z), Err(Error::ZeroLeading)));
        let t = EpsSeries::new(vec![TrigPoly::scalar_harmonic(1, 1.0, 0.0), TrigPoly::scalar(1.0)]);
        assert!(matches!(t.checked_div(&t), Err(Error::NonConstantLeading(_))));
    }

    #[test]
    fn exp_taylor_terms() {
        let u = TrigPoly::scalar_harmonic(1, 0.3, -0.2);
        let s = EpsSeries::new(vec![TrigPoly::zero(1, 0), u.clone(), TrigPoly::zero(1, 0)]);
        let e = s.exp().unwrap();
        assert_abs_diff_eq!(e.coeff(0).const_coef()[0], 1.0);
        assert_eq!(e.coeff(1), &u);
        let half_sq = u.try_mul(&u).unwrap().scale(0.5);
        for (a, b) in e.coeff(2).coefficients().iter().zip(half_sq.coefficients()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let zero = ScalarSeries::from_slice(&[0.0; 4]).exp().unwrap();
        assert_scalar_eq(&zero, &[1.0, 0.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn exp_matches_direct_evaluation() {
        let n = 12;
        let mut coeffs = vec![TrigPoly::zero(1, 0); n + 1];
        coeffs[0] = TrigPoly::scalar(0.3);
        coeffs[1] = TrigPoly::scalar_harmonic(1, 0.2, 0.0);
        let e = EpsSeries::new(coeffs).exp().unwrap();
        let (tau, eps) = (0.7_f64, 0.05_f64);
        let direct = (0.3 + eps * 0.2 * tau.cos()).exp();
        assert_abs_diff_eq!(e.eval(tau, eps), direct, epsilon = 1e-10);
    }

    #[test]
    fn log_domain_error() {
        let s = ScalarSeries::from_slice(&[-1.0, 1.0]);
        assert!(matches!(s.ln(), Err(Error::Domain { function: "log", .. })));
    }

    #[test]
    fn analytic_functions_match_closed_forms() {
        let s = ScalarSeries::from_slice(&[0.4, 0.3, -0.1, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let x = |e: f64| 0.4 + 0.3 * e - 0.1 * e * e + 0.2 * e * e * e;
        let eps = 0.02;
        let cases: [(AnalyticFn, fn(f64) -> f64); 5] = [
            (AnalyticFn::Exp, f64::exp),
            (AnalyticFn::Log, f64::ln),
            (AnalyticFn::Sin, f64::sin),
            (AnalyticFn::Cos, f64::cos),
            (AnalyticFn::Pow(-1.5), |v| v.powf(-1.5)),
        ];
        for (f, direct) in cases {
            let got = s.analytic(f).unwrap().eval(eps);
            assert_abs_diff_eq!(got, direct(x(eps)), epsilon = 1e-12);
        }
    }

    #[test]
    fn delayed_state_constant_shift() {
        let mut seed = 47;
        let z = random_trig_series(3, 2, &mut seed);
        let theta = ScalarSeries::from_slice(&[0.8, 0.0, 0.0, 0.0]);
        assert_eq!(z.delayed(&theta, 0.8).unwrap(), z.shift_tau(0.8));
    }

    #[test]
    fn delayed_state_chain_rule() {
        let cos = TrigPoly::scalar_harmonic(1, 1.0, 0.0);
        let z = EpsSeries::new(vec![cos.clone(), TrigPoly::zero(1, 0)]);
        let theta0 = 0.6;
        let theta = ScalarSeries::from_slice(&[theta0, 1.0]);
        let d = z.delayed(&theta, theta0).unwrap();
        // d/dθ cos(τ − θ) = sin(τ − θ)
        let expected = TrigPoly::scalar_harmonic(1, 0.0, 1.0).shift(theta0);
        for (a, b) in d.coeff(1).coefficients().iter().zip(expected.coefficients()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn delayed_state_matches_direct_evaluation() {
        let mut seed = 53;
        let n = 8;
        let z = random_trig_series(n, 3, &mut seed);
        let theta0 = 1.3;
        let mut tc: Vec<f64> = (0..=n).map(|_| 0.5 * lcg(&mut seed)).collect();
        tc[0] = theta0;
        let theta = ScalarSeries::from_slice(&tc);
        let d = z.delayed(&theta, theta0).unwrap();
        let eps = 0.01;
        for i in 0..16 {
            let tau = 0.39 * i as f64;
            let th = theta.eval(eps);
            assert_abs_diff_eq!(d.eval(tau, eps), z.eval(tau - th, eps), epsilon = 1e-8);
        }
    }

    #[test]
    fn delayed_state_checks_leading_shift() {
        let z = EpsSeries::new(vec![TrigPoly::scalar(1.0), TrigPoly::zero(1, 0)]);
        let theta = ScalarSeries::from_slice(&[0.5, 1.0]);
        assert!(matches!(z.delayed(&theta, 0.6), Err(Error::ShiftMismatch { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn series(order: usize) -> impl Strategy<Value = TrigSeries> {
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 5), order + 1).prop_map(|cs| {
                EpsSeries::new(
                    cs.into_iter()
                        .map(|v| TrigPoly::from_parts(&[v[0]], &[vec![v[1]], vec![v[3]]], &[vec![v[2]], vec![v[4]]]).unwrap())
                        .collect(),
                )
            })
        }

        fn close(a: &TrigSeries, b: &TrigSeries, tol: f64) -> bool {
            a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| {
                let d = x.degree().max(y.degree());
                x.with_degree(d).coefficients().iter().zip(y.with_degree(d).coefficients()).all(|(u, v)| (u - v).abs() <= tol)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn ring_axioms(a in series(4), b in series(4), c in series(4)) {
                prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-12));
                prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-12));
            }

            #[test]
            fn exp_of_negation_is_inverse(a in series(5)) {
                let mut a = a;
                a = a.map(|c| c.scale(0.5));
                let lead = a.coeff(0).const_coef()[0];
                let mut coeffs = a.into_coeffs();
                coeffs[0] = TrigPoly::scalar(lead);
                let a = EpsSeries::new(coeffs);
                let p = &a.exp().unwrap() * &(-&a).exp().unwrap();
                let one = p.constant_like(1.0);
                prop_assert!(close(&p, &one, 1e-12));
            }

            #[test]
            fn evaluation_homomorphism(a in series(6), b in series(6), tau in 0.0..6.3f64, eps in 0.0..0.1f64) {
                let mut bc = b.into_coeffs();
                bc[0] = TrigPoly::scalar(1.0 + bc[0].const_coef()[0].abs());
                let b = EpsSeries::new(bc);
                let tol = 1e-8;
                let (av, bv) = (a.eval(tau, eps), b.eval(tau, eps));
                // Truncation of the true product/quotient affects only ε⁷ and beyond.
                let trunc = 40.0 * eps.powi(7);
                prop_assert!(((&a + &b).eval(tau, eps) - (av + bv)).abs() <= tol);
                prop_assert!(((&a * &b).eval(tau, eps) - av * bv).abs() <= tol + trunc);
                prop_assert!((a.checked_div(&b).unwrap().eval(tau, eps) - av / bv).abs() <= tol + 10.0 * trunc);
            }
        }
    }
}
