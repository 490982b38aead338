//! Truncated multivariate Taylor expansions.
//!
//! A [`TruncatedJet`] stores the Taylor coefficients `c_alpha` of a scalar
//! function about a base point, densely, over every multi-index of order at
//! most the truncation degree. Coefficients use the Taylor convention, so the
//! partial derivative is `d^alpha f = alpha! c_alpha`; products are plain
//! truncated convolutions.

mod basis;
pub(crate) mod sample;

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{as_small_nonneg_int, Scalar};

pub use basis::{MonomialBasis, MultiIndex};
pub use sample::{field_jet_from_samples, jet_from_samples, SampledJet, MAX_SAMPLED_DEGREE};

#[derive(Debug, Clone)]
pub struct TruncatedJet {
    basis: Arc<MonomialBasis>,
    base: Arc<[f64]>,
    coeffs: Vec<f64>,
}

impl PartialEq for TruncatedJet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.degree() == other.degree()
            && self.base[..] == other.base[..]
            && self.coeffs == other.coeffs
    }
}

impl TruncatedJet {
    pub fn zero(degree: usize, base: &[f64]) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidInput(
                "jet dimension must be at least 1".into(),
            ));
        }
        let basis = MonomialBasis::shared(base.len(), degree);
        let len = basis.len();
        Ok(Self {
            basis,
            base: Arc::from(base),
            coeffs: vec![0.0; len],
        })
    }

    pub fn constant(c: f64, degree: usize, base: &[f64]) -> Result<Self> {
        let mut jet = Self::zero(degree, base)?;
        jet.coeffs[0] = c;
        Ok(jet)
    }

    /// Jet of the coordinate function `x_axis` about `base`.
    pub fn variable(axis: usize, degree: usize, base: &[f64]) -> Result<Self> {
        if axis >= base.len() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: base.len(),
            });
        }
        let mut jet = Self::constant(base[axis], degree, base)?;
        if degree >= 1 {
            let idx = jet.basis.successor(0, axis).expect("degree >= 1");
            jet.coeffs[idx] = 1.0;
        }
        Ok(jet)
    }

    /// All coordinate jets `x_0, ..., x_{n-1}` about `base`.
    pub fn variables(degree: usize, base: &[f64]) -> Result<Vec<Self>> {
        (0..base.len())
            .map(|axis| Self::variable(axis, degree, base))
            .collect()
    }

    /// Builds a jet from `(alpha, c_alpha)` pairs in Taylor convention.
    pub fn from_terms<'a>(
        degree: usize,
        base: &[f64],
        terms: impl IntoIterator<Item = (&'a [u32], f64)>,
    ) -> Result<Self> {
        let mut jet = Self::zero(degree, base)?;
        for (alpha, c) in terms {
            let idx = jet.index_checked(alpha)?;
            jet.coeffs[idx] += c;
        }
        Ok(jet)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Dense coefficients in graded-lexicographic order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    fn index_checked(&self, alpha: &[u32]) -> Result<usize> {
        if alpha.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "multi-index length {} does not match jet dimension {}",
                alpha.len(),
                self.dim()
            )));
        }
        let order: usize = alpha.iter().map(|&e| e as usize).sum();
        if order > self.degree() {
            return Err(Error::OrderOverflow {
                order,
                degree: self.degree(),
            });
        }
        Ok(self.basis.index_of(alpha).expect("order checked"))
    }

    /// Taylor coefficient `c_alpha`.
    pub fn coeff(&self, alpha: &[u32]) -> Result<f64> {
        Ok(self.coeffs[self.index_checked(alpha)?])
    }

    pub fn set_coeff(&mut self, alpha: &[u32], c: f64) -> Result<()> {
        let idx = self.index_checked(alpha)?;
        self.coeffs[idx] = c;
        Ok(())
    }

    /// The partial derivative `d^alpha f` at the base point, `alpha! c_alpha`.
    pub fn partial_value(&self, alpha: &[u32]) -> Result<f64> {
        let c = self.coeff(alpha)?;
        Ok(c * MultiIndex::new(alpha.to_vec()).factorial())
    }

    /// Gradient at the base point.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|axis| match self.basis.successor(0, axis) {
                Some(idx) => self.coeffs[idx],
                None => 0.0,
            })
            .collect()
    }

    pub fn check_combinable(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Combinability(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        if self.degree() != other.degree() {
            return Err(Error::Combinability(format!(
                "degree {} vs {}",
                self.degree(),
                other.degree()
            )));
        }
        if !Arc::ptr_eq(&self.base, &other.base) && self.base[..] != other.base[..] {
            return Err(Error::Combinability(format!(
                "base point {:?} vs {:?}",
                &self.base[..],
                &other.base[..]
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_combinable(other)?;
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_combinable(other)?;
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_combinable(other)?;
        let basis = &self.basis;
        let degree = basis.degree();
        let mut out = vec![0.0; basis.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let room = degree - basis.order_at(i);
            let limit = basis.count_up_to(room);
            for (j, &b) in other.coeffs[..limit].iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                out[basis.sum_index(i, j)] += a * b;
            }
        }
        Ok(Self {
            basis: self.basis.clone(),
            base: self.base.clone(),
            coeffs: out,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Drops every coefficient above `degree`. Raising the degree pads with zeros.
    pub fn truncate(&self, degree: usize) -> Self {
        if degree == self.degree() {
            return self.clone();
        }
        let basis = MonomialBasis::shared(self.dim(), degree);
        let mut coeffs = vec![0.0; basis.len()];
        let keep = coeffs.len().min(self.coeffs.len());
        coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        Self {
            basis,
            base: self.base.clone(),
            coeffs,
        }
    }

    /// `d/dx_axis`, valid to degree `d - 1`. A degree-0 jet differentiates to
    /// the zero jet of degree 0.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        if self.degree() == 0 {
            return Ok(self.scale(0.0));
        }
        let out_basis = MonomialBasis::shared(self.dim(), self.degree() - 1);
        let mut coeffs = vec![0.0; out_basis.len()];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let e = out_basis.exponent(k, axis);
            let up = self
                .basis
                .successor(k, axis)
                .expect("order below degree has a successor");
            *c = (e as f64 + 1.0) * self.coeffs[up];
        }
        Ok(Self {
            basis: out_basis,
            base: self.base.clone(),
            coeffs,
        })
    }

    /// Evaluates the Taylor polynomial at `base + offset`.
    pub fn eval_offset(&self, offset: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(alpha, &c)| {
                c * alpha
                    .exponents()
                    .iter()
                    .zip(offset)
                    .map(|(&e, &u)| u.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Non-zero `(alpha, c_alpha)` pairs in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.basis
            .iter()
            .zip(self.coeffs.iter().copied())
            .filter(|(_, c)| *c != 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_combinable(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn binary(self, rhs: Self, op: &str, f: impl Fn(&Self, &Self) -> Result<Self>) -> Self {
        f(&self, &rhs).unwrap_or_else(|e| panic!("jet {op}: {e}"))
    }
}

// Operator impls panic on incompatible operands; the `try_*` methods report
// the same condition as an error.
impl Add for TruncatedJet {
    type Output = TruncatedJet;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, "add", Self::try_add)
    }
}

impl Sub for TruncatedJet {
    type Output = TruncatedJet;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, "sub", Self::try_sub)
    }
}

impl Mul for TruncatedJet {
    type Output = TruncatedJet;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, "mul", Self::try_mul)
    }
}

impl Neg for TruncatedJet {
    type Output = TruncatedJet;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Add<f64> for TruncatedJet {
    type Output = TruncatedJet;
    fn add(mut self, rhs: f64) -> Self {
        self.coeffs[0] += rhs;
        self
    }
}

impl Mul<f64> for TruncatedJet {
    type Output = TruncatedJet;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Scalar for TruncatedJet {
    fn lift(&self, c: f64) -> Self {
        let mut out = self.scale(0.0);
        out.coeffs[0] = c;
        out
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn powf(&self, exponent: f64) -> Self {
        if let Some(n) = as_small_nonneg_int(exponent) {
            return self.powi(n);
        }
        // a^p = a0^p sum_k binom(p, k) (h / a0)^k with h = a - a0 nilpotent.
        let a0 = self.coeffs[0];
        let mut h = self.scale(1.0 / a0);
        h.coeffs[0] = 0.0;
        let mut term = self.lift(1.0);
        let mut acc = self.lift(1.0);
        let mut binom = 1.0;
        for k in 1..=self.degree() {
            binom *= (exponent - (k as f64 - 1.0)) / k as f64;
            term = term.try_mul(&h).expect("same shape");
            acc = acc.try_add(&term.scale(binom)).expect("same shape");
        }
        acc.scale(a0.powf(exponent))
    }
}

/// Jet of a vector field: one [`TruncatedJet`] per component, all sharing
/// dimension, degree and base point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetField {
    components: Vec<TruncatedJet>,
}

impl JetField {
    pub fn new(components: Vec<TruncatedJet>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("jet field needs components".into()))?;
        if components.len() != first.dim() {
            return Err(Error::Combinability(format!(
                "{} components for a {}-dimensional space",
                components.len(),
                first.dim()
            )));
        }
        for c in &components[1..] {
            first.check_combinable(c)?;
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> usize {
        self.components[0].degree()
    }

    pub fn base_point(&self) -> &[f64] {
        self.components[0].base_point()
    }

    pub fn components(&self) -> &[TruncatedJet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &TruncatedJet {
        &self.components[i]
    }

    pub fn components_mut(&mut self) -> &mut [TruncatedJet] {
        &mut self.components
    }

    /// Value of the field at the base point.
    pub fn value(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }

    pub fn truncate(&self, degree: usize) -> Self {
        Self {
            components: self.components.iter().map(|c| c.truncate(degree)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    alpha: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetRepr {
    dim: usize,
    degree: usize,
    base: Vec<f64>,
    coeffs: Vec<CoeffEntry>,
}

impl Serialize for TruncatedJet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        JetRepr {
            dim: self.dim(),
            degree: self.degree(),
            base: self.base.to_vec(),
            coeffs: self
                .terms()
                .map(|(alpha, c)| CoeffEntry {
                    alpha: alpha.exponents().to_vec(),
                    c,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedJet {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = JetRepr::deserialize(deserializer)?;
        if repr.base.len() != repr.dim {
            return Err(serde::de::Error::custom(format!(
                "base has {} entries for dim {}",
                repr.base.len(),
                repr.dim
            )));
        }
        TruncatedJet::from_terms(
            repr.degree,
            &repr.base,
            repr.coeffs.iter().map(|e| (e.alpha.as_slice(), e.c)),
        )
        .map_err(serde::de::Error::custom)
    }
}
