//! Number-like types that model code can be written against once.
//!
//! Potentials, vector fields and observables are generic over [`Scalar`], so
//! the same expression evaluates on plain `f64`, on a univariate Taylor
//! [`Series`] in time (with `f64` or double-double coefficients), or on a multivariate [`TruncatedJet`](crate::jet::TruncatedJet).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::dd::Dd;

pub trait Scalar:
    Clone
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;

    /// Constant term (the value at the expansion point).
    fn value(&self) -> f64;

    /// Real power. Non-integer exponents require a positive constant term.
    fn powf(&self, exponent: f64) -> Self;

    fn powi(&self, n: u32) -> Self {
        let mut result = self.lift(1.0);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result * base.clone();
            }
            n >>= 1;
            if n > 0 {
                base = base.clone() * base;
            }
        }
        result
    }

    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    fn recip(&self) -> Self {
        self.powf(-1.0)
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn powf(&self, exponent: f64) -> Self {
        f64::powf(*self, exponent)
    }

    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn recip(&self) -> Self {
        1.0 / *self
    }
}

/// Returns `Some(k)` when `x` is a small non-negative integer.
pub(crate) fn as_small_nonneg_int(x: f64) -> Option<u32> {
    if (0.0..=64.0).contains(&x) && x.fract() == 0.0 {
        Some(x as u32)
    } else {
        None
    }
}

/// Coefficient type of a [`Series`]: `f64`, or [`Dd`] where cancellation
/// would otherwise eat the significant digits.
pub trait Coeff:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn to_f64(self) -> f64;
    fn powf(self, exponent: f64) -> Self;
}

impl Coeff for f64 {
    fn to_f64(self) -> f64 {
        self
    }

    fn powf(self, exponent: f64) -> Self {
        f64::powf(self, exponent)
    }
}

impl Coeff for Dd {
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }

    fn powf(self, exponent: f64) -> Self {
        Dd::powf(self, exponent)
    }
}

/// Truncated univariate Taylor series `sum_k c_k t^k`, `k <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<C = f64> {
    coeffs: Vec<C>,
}

impl<C: Coeff> Series<C> {
    pub fn constant(c: C, order: usize) -> Self {
        let mut coeffs = vec![C::from(0.0); order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least a constant term");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).copied().unwrap_or(C::from(0.0))
    }

    pub fn set_coeff(&mut self, k: usize, c: C) {
        self.coeffs[k] = c;
    }

    /// `k`-th time derivative at `t = 0`.
    pub fn derivative_at_zero(&self, k: usize) -> C {
        self.coeff(k) * C::from(factorial(k))
    }

    fn zip_with(self, rhs: Self, f: impl Fn(C, C) -> C) -> Self {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Self {
            coeffs: (0..n).map(|k| f(self.coeffs[k], rhs.coeffs[k])).collect(),
        }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl<C: Coeff> Add for Series<C> {
    type Output = Series<C>;
    fn add(self, rhs: Series<C>) -> Series<C> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<C: Coeff> Sub for Series<C> {
    type Output = Series<C>;
    fn sub(self, rhs: Series<C>) -> Series<C> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<C: Coeff> Mul for Series<C> {
    type Output = Series<C>;
    fn mul(self, rhs: Series<C>) -> Series<C> {
        let zero = C::from(0.0);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![zero; n];
        for (i, &a) in self.coeffs.iter().take(n).enumerate() {
            if a == zero {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Series { coeffs: out }
    }
}

impl<C: Coeff> Neg for Series<C> {
    type Output = Series<C>;
    fn neg(mut self) -> Series<C> {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl<C: Coeff> Add<f64> for Series<C> {
    type Output = Series<C>;
    fn add(mut self, rhs: f64) -> Series<C> {
        self.coeffs[0] = self.coeffs[0] + C::from(rhs);
        self
    }
}

impl<C: Coeff> Mul<f64> for Series<C> {
    type Output = Series<C>;
    fn mul(mut self, rhs: f64) -> Series<C> {
        let r = C::from(rhs);
        self.coeffs.iter_mut().for_each(|c| *c = *c * r);
        self
    }
}

impl<C: Coeff> Scalar for Series<C> {
    fn lift(&self, c: f64) -> Self {
        Series::constant(C::from(c), self.order())
    }

    fn value(&self) -> f64 {
        self.coeffs[0].to_f64()
    }

    fn powf(&self, exponent: f64) -> Self {
        if let Some(n) = as_small_nonneg_int(exponent) {
            return self.powi(n);
        }
        // b = a^p satisfies a b' = p a' b, which gives the usual recurrence
        // b_k = 1/(k a_0) sum_{j=1..k} ((p + 1) j - k) a_j b_{k-j}.
        let a = &self.coeffs;
        let a0 = a[0];
        let mut b = vec![C::from(0.0); a.len()];
        b[0] = a0.powf(exponent);
        for k in 1..a.len() {
            let mut acc = C::from(0.0);
            for j in 1..=k {
                acc = acc + C::from((exponent + 1.0) * j as f64 - k as f64) * a[j] * b[k - j];
            }
            b[k] = acc / (C::from(k as f64) * a0);
        }
        Series { coeffs: b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_powf_matches_binomial_expansion() {
        // (1 + t)^(-1/2) = 1 - t/2 + 3t^2/8 - 5t^3/16
        let s = Series::from_coeffs(vec![1.0, 1.0, 0.0, 0.0]).powf(-0.5);
        let expected = [1.0, -0.5, 0.375, -0.3125];
        for (a, b) in s.coeffs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn series_powi_and_product_agree() {
        let a = Series::from_coeffs(vec![2.0, -1.0, 0.5, 0.25]);
        let cube = a.clone() * a.clone() * a.clone();
        let p = a.powi(3);
        let q = a.powf(3.0);
        for k in 0..4 {
            assert!((cube.coeff(k) - p.coeff(k)).abs() < 1e-14);
            assert!((cube.coeff(k) - q.coeff(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn series_non_integer_power_of_shifted_base() {
        // (4 + 2t)^(3/2) = 8 (1 + t/2)^(3/2) = 8 + 6t + 0.75 t^2 - 0.0625 t^3
        let s = Series::from_coeffs(vec![4.0, 2.0, 0.0, 0.0]).powf(1.5);
        let expected = [8.0, 6.0, 0.75, -0.0625];
        for (a, b) in s.coeffs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }
}
