//! Sparse real polynomials in absolute coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::MultiIndex;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: MultiIndex,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    dim: usize,
    terms: Vec<Term>,
}

impl TryFrom<PolyRepr> for Polynomial {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        Polynomial::new(r.dim, r.terms.into_iter().map(|t| (t.alpha, t.c)))
    }
}

impl From<Polynomial> for PolyRepr {
    fn from(p: Polynomial) -> Self {
        PolyRepr {
            dim: p.dim,
            terms: p.terms,
        }
    }
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    /// Collects like terms and drops zeros; terms end up in graded-lex order.
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut merged: std::collections::BTreeMap<MultiIndex, f64> = Default::default();
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "monomial {:?} has {} variables, polynomial has {dim}",
                    alpha.exponents(),
                    alpha.dim()
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput(
                    "non-finite polynomial coefficient".into(),
                ));
            }
            *merged.entry(alpha).or_insert(0.0) += c;
        }
        Ok(Self {
            dim,
            terms: merged
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(alpha, c)| Term { alpha, c })
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.alpha.order())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.dim,
            self.terms.iter().map(|t| (t.alpha.clone(), t.c * s)),
        )
        .expect("scaling keeps the shape")
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let terms = self.terms.iter().filter_map(|t| {
            let e = t.alpha.exponents()[axis];
            if e == 0 {
                return None;
            }
            let mut exps = t.alpha.exponents().to_vec();
            exps[axis] -= 1;
            Some((MultiIndex::new(exps), t.c * e as f64))
        });
        Self::new(self.dim, terms).expect("derivative keeps the shape")
    }

    /// Evaluates on any [`Scalar`]; an empty polynomial yields `zero_like`'s zero.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.dim, "polynomial arity");
        let mut acc = x[0].lift(0.0);
        if self.terms.is_empty() {
            return acc;
        }
        let max_e: Vec<u32> = (0..self.dim)
            .map(|i| {
                self.terms
                    .iter()
                    .map(|t| t.alpha.exponents()[i])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let powers: Vec<Vec<T>> = x
            .iter()
            .zip(&max_e)
            .map(|(xi, &m)| {
                let mut p = Vec::with_capacity(m as usize + 1);
                p.push(xi.lift(1.0));
                for k in 1..=m as usize {
                    p.push(p[k - 1].clone() * xi.clone());
                }
                p
            })
            .collect();
        for t in &self.terms {
            let mut mono: Option<T> = None;
            for (i, &e) in t.alpha.exponents().iter().enumerate() {
                if e > 0 {
                    let f = powers[i][e as usize].clone();
                    mono = Some(match mono {
                        None => f,
                        Some(m) => m * f,
                    });
                }
            }
            acc = match mono {
                None => acc + t.c,
                Some(m) => acc + m * t.c,
            };
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    pub fn gradient_f64(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| self.derivative(i).eval(x)).collect()
    }
}
