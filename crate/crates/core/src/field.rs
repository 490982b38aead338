//! Observables `F: P -> R` and vector fields `X` on a phase space `P = R^n`.
//!
//! Models with a closed-form expression implement [`AnalyticObservable`] /
//! [`AnalyticField`] once, generically over [`Scalar`]; they then get exact
//! multivariate jets and Taylor propagation along the flow for free. Black-box
//! closures are wrapped in [`FnObservable`] / [`FnField`] and fall back to
//! sampled jets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::jet::{sample, JetField, TruncatedJet};
use crate::poly::Polynomial;
use crate::scalar::{Scalar, Series};

pub trait Observable: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &[f64]) -> Result<f64>;

    /// Jet about `z`. Defaults to sampled extraction.
    fn jet(&self, z: &[f64], degree: usize) -> Result<TruncatedJet> {
        let (mut jets, _) = sample::extract(|x| Ok(vec![self.value(x)?]), 1, z, degree)?;
        Ok(jets.pop().expect("one component"))
    }

    /// Composition with a time series `z(t)`, when available in closed form.
    fn along(&self, _path: &[Series]) -> Option<Result<Series>> {
        None
    }

    /// As [`Observable::along`], in double-double precision.
    fn along_extended(&self, _path: &[Series<Dd>]) -> Option<Result<Series<Dd>>> {
        None
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(z, 1)?.gradient())
    }
}

/// Per-state diagnostics recorded by the integrators. Entries a model cannot
/// supply are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub energy: f64,
    pub ang_mom: f64,
    pub inertia: f64,
    pub min_sep: f64,
}

impl Default for MonitorRecord {
    fn default() -> Self {
        Self {
            energy: f64::NAN,
            ang_mom: f64::NAN,
            inertia: f64::NAN,
            min_sep: f64::NAN,
        }
    }
}

/// Kinetic-plus-potential split `z = (q, p)`, `q' = v(p)`, `p' = f(q)`,
/// required by the Stormer-Verlet integrator.
pub trait Separable: Send + Sync {
    fn velocity(&self, p: &[f64]) -> Vec<f64>;
    fn force(&self, q: &[f64]) -> Result<Vec<f64>>;
    /// Smallest pairwise separation, for models with bodies.
    fn min_separation(&self, _q: &[f64]) -> Option<f64> {
        None
    }
}

pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>>;

    fn jet(&self, z: &[f64], degree: usize) -> Result<JetField> {
        let (jets, _) = sample::extract(|x| self.eval(x), self.dim(), z, degree)?;
        JetField::new(jets)
    }

    fn along(&self, _path: &[Series]) -> Option<Result<Vec<Series>>> {
        None
    }

    /// As [`VectorField::along`], in double-double precision.
    fn along_extended(&self, _path: &[Series<Dd>]) -> Option<Result<Vec<Series<Dd>>>> {
        None
    }

    fn separable(&self) -> Option<&dyn Separable> {
        None
    }

    fn monitor(&self, _z: &[f64]) -> MonitorRecord {
        MonitorRecord::default()
    }

    /// Removes drift off a constraint manifold (e.g. the centre-of-mass frame).
    fn project(&self, _z: &mut [f64]) {}
}

/// Closed-form observable, generic over the number type.
pub trait AnalyticObservable: Send + Sync {
    fn arity(&self) -> usize;
    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T>;
}

/// Closed-form vector field, generic over the number type.
pub trait AnalyticField: Send + Sync {
    fn arity(&self) -> usize;
    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<Vec<T>>;

    fn separable_part(&self) -> Option<&dyn Separable> {
        None
    }

    fn monitor_state(&self, _z: &[f64]) -> MonitorRecord {
        MonitorRecord::default()
    }

    fn project_state(&self, _z: &mut [f64]) {}
}

fn check_arity(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidInput(format!(
            "expected a {expected}-dimensional point, got {got}"
        )));
    }
    Ok(())
}

impl<A: AnalyticObservable> Observable for A {
    fn dim(&self) -> usize {
        self.arity()
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check_arity(self.arity(), z.len())?;
        self.eval_generic(z)
    }

    fn jet(&self, z: &[f64], degree: usize) -> Result<TruncatedJet> {
        check_arity(self.arity(), z.len())?;
        self.eval_generic(&TruncatedJet::variables(degree, z)?)
    }

    fn along(&self, path: &[Series]) -> Option<Result<Series>> {
        Some(check_arity(self.arity(), path.len()).and_then(|_| self.eval_generic(path)))
    }

    fn along_extended(&self, path: &[Series<Dd>]) -> Option<Result<Series<Dd>>> {
        Some(check_arity(self.arity(), path.len()).and_then(|_| self.eval_generic(path)))
    }
}

impl<A: AnalyticField> VectorField for A {
    fn dim(&self) -> usize {
        self.arity()
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_arity(self.arity(), z.len())?;
        self.eval_generic(z)
    }

    fn jet(&self, z: &[f64], degree: usize) -> Result<JetField> {
        check_arity(self.arity(), z.len())?;
        JetField::new(self.eval_generic(&TruncatedJet::variables(degree, z)?)?)
    }

    fn along(&self, path: &[Series]) -> Option<Result<Vec<Series>>> {
        Some(check_arity(self.arity(), path.len()).and_then(|_| self.eval_generic(path)))
    }

    fn along_extended(&self, path: &[Series<Dd>]) -> Option<Result<Vec<Series<Dd>>>> {
        Some(check_arity(self.arity(), path.len()).and_then(|_| self.eval_generic(path)))
    }

    fn separable(&self) -> Option<&dyn Separable> {
        self.separable_part()
    }

    fn monitor(&self, z: &[f64]) -> MonitorRecord {
        self.monitor_state(z)
    }

    fn project(&self, z: &mut [f64]) {
        self.project_state(z)
    }
}

/// Black-box observable from a closure.
pub struct FnObservable<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnObservable<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Observable for FnObservable<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check_arity(self.dim, z.len())?;
        let v = (self.f)(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvaluationDomain { point: z.to_vec() })
        }
    }
}

/// Black-box vector field from a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Send + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Send + Sync> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_arity(self.dim, z.len())?;
        let v = (self.f)(z);
        if v.len() != self.dim || v.iter().any(|c| !c.is_finite()) {
            return Err(Error::EvaluationDomain { point: z.to_vec() });
        }
        Ok(v)
    }
}

/// Harmonic oscillator `q' = p, p' = -q`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oscillator;

impl Separable for Oscillator {
    fn velocity(&self, p: &[f64]) -> Vec<f64> {
        p.to_vec()
    }

    fn force(&self, q: &[f64]) -> Result<Vec<f64>> {
        Ok(q.iter().map(|x| -x).collect())
    }
}

impl AnalyticField for Oscillator {
    fn arity(&self) -> usize {
        2
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<Vec<T>> {
        Ok(vec![z[1].clone(), -z[0].clone()])
    }

    fn separable_part(&self) -> Option<&dyn Separable> {
        Some(self)
    }

    fn monitor_state(&self, z: &[f64]) -> MonitorRecord {
        MonitorRecord {
            energy: 0.5 * (z[0] * z[0] + z[1] * z[1]),
            ang_mom: f64::NAN,
            inertia: z[0] * z[0],
            min_sep: f64::NAN,
        }
    }
}

/// Oscillator energy `(q^2 + p^2) / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OscillatorEnergy;

impl AnalyticObservable for OscillatorEnergy {
    fn arity(&self) -> usize {
        2
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        Ok((z[0].clone() * z[0].clone() + z[1].clone() * z[1].clone()) * 0.5)
    }
}

/// The one-dimensional linear field `x' = x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Linear1d;

impl AnalyticField for Linear1d {
    fn arity(&self) -> usize {
        1
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<Vec<T>> {
        Ok(vec![z[0].clone()])
    }
}

/// Coordinate function `z -> z[index]`.
#[derive(Debug, Clone, Copy)]
pub struct Coordinate {
    pub dim: usize,
    pub index: usize,
}

impl AnalyticObservable for Coordinate {
    fn arity(&self) -> usize {
        self.dim
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        z.get(self.index).cloned().ok_or(Error::AxisOutOfRange {
            axis: self.index,
            dim: self.dim,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialObservable(pub Polynomial);

impl AnalyticObservable for PolynomialObservable {
    fn arity(&self) -> usize {
        self.0.dim()
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        Ok(self.0.eval(z))
    }
}

/// Vector field with one polynomial per component.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    components: Vec<Polynomial>,
}

impl PolynomialField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        if n == 0 || components.iter().any(|c| c.dim() != n) {
            return Err(Error::InvalidInput(
                "polynomial field needs n components in n variables".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }
}

impl AnalyticField for PolynomialField {
    fn arity(&self) -> usize {
        self.components.len()
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<Vec<T>> {
        Ok(self.components.iter().map(|c| c.eval(z)).collect())
    }
}

/// `F + bump`, keeping whatever closed-form capabilities `F` has.
pub struct PerturbedObservable {
    pub base: Arc<dyn Observable>,
    pub bump: Polynomial,
}

impl Observable for PerturbedObservable {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        Ok(self.base.value(z)? + self.bump.eval(z))
    }

    fn jet(&self, z: &[f64], degree: usize) -> Result<TruncatedJet> {
        let base = self.base.jet(z, degree)?;
        let bump = self.bump.eval(&TruncatedJet::variables(degree, z)?);
        base.try_add(&bump)
    }

    fn along(&self, path: &[Series]) -> Option<Result<Series>> {
        let base = self.base.along(path)?;
        Some(base.map(|b| b + self.bump.eval(path)))
    }

    fn along_extended(&self, path: &[Series<Dd>]) -> Option<Result<Series<Dd>>> {
        let base = self.base.along_extended(path)?;
        Some(base.map(|b| b + self.bump.eval(path)))
    }
}

/// `X + (bump_1, ..., bump_n)`.
pub struct PerturbedField {
    pub base: Arc<dyn VectorField>,
    pub bumps: Vec<Polynomial>,
}

impl VectorField for PerturbedField {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.base.eval(z)?;
        for (vi, b) in v.iter_mut().zip(&self.bumps) {
            *vi += b.eval(z);
        }
        Ok(v)
    }

    fn jet(&self, z: &[f64], degree: usize) -> Result<JetField> {
        let base = self.base.jet(z, degree)?;
        let vars = TruncatedJet::variables(degree, z)?;
        let comps = base
            .components()
            .iter()
            .zip(&self.bumps)
            .map(|(c, b)| c.try_add(&b.eval(&vars)))
            .collect::<Result<Vec<_>>>()?;
        JetField::new(comps)
    }

    fn along(&self, path: &[Series]) -> Option<Result<Vec<Series>>> {
        let base = self.base.along(path)?;
        Some(base.map(|v| {
            v.into_iter()
                .zip(&self.bumps)
                .map(|(vi, b)| vi + b.eval(path))
                .collect()
        }))
    }

    fn along_extended(&self, path: &[Series<Dd>]) -> Option<Result<Vec<Series<Dd>>>> {
        let base = self.base.along_extended(path)?;
        Some(base.map(|v| {
            v.into_iter()
                .zip(&self.bumps)
                .map(|(vi, b)| vi + b.eval(path))
                .collect()
        }))
    }

    fn monitor(&self, z: &[f64]) -> MonitorRecord {
        self.base.monitor(z)
    }

    fn project(&self, z: &mut [f64]) {
        self.base.project(z)
    }
}
