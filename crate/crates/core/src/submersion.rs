//! Seeded random polynomial systems and the submersion suite: how often the
//! tower map has full rank as a function of the observable jet and of the
//! field jet.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{Observable, PolynomialField, PolynomialObservable, VectorField};
use crate::genericity::EMPIRICAL;
use crate::jet::MonomialBasis;
use crate::lie::{
    default_tower_order, dpsi_wrt_f_with_threshold, dpsi_wrt_x_with, FieldJacobianOptions,
};
use crate::poly::Polynomial;
use crate::rng::stream;

/// A random polynomial vector field, observable and base point.
#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub field: PolynomialField,
    pub observable: PolynomialObservable,
    pub point: Vec<f64>,
}

impl RandomSystem {
    pub fn dim(&self) -> usize {
        self.point.len()
    }
}

fn random_polynomial(rng: &mut impl Rng, n: usize, degree: usize) -> Result<Polynomial> {
    let basis = MonomialBasis::shared(n, degree);
    let terms: Vec<_> = basis
        .iter()
        .map(|a| (a.clone(), rng.random_range(-1.0..1.0)))
        .collect();
    Polynomial::new(n, terms)
}

/// System number `index` of the family seeded by `seed`: dimension uniform in
/// `1..=max_dim`, each polynomial of degree uniform in `1..=max_degree` with
/// coefficients uniform in `[-1, 1]`, base point uniform in `[-1, 1]^n`.
pub fn random_system(
    seed: u64,
    index: u64,
    max_dim: usize,
    max_degree: usize,
) -> Result<RandomSystem> {
    let mut rng = stream(seed, "random-system", index);
    let n = rng.random_range(1..=max_dim);
    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let d = rng.random_range(1..=max_degree);
        components.push(random_polynomial(&mut rng, n, d)?);
    }
    let d = rng.random_range(1..=max_degree);
    let observable = PolynomialObservable(random_polynomial(&mut rng, n, d)?);
    let point = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(RandomSystem {
        field: PolynomialField::new(components)?,
        observable,
        point,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmersionConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub max_dim: usize,
    pub max_degree: usize,
    /// Samples need `|X(z)| > min_norm` (observable suite) or
    /// `|grad F(z)| > min_norm` (field suite).
    pub min_norm: f64,
    pub threshold: f64,
}

impl Default for SubmersionConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            seed: 0,
            max_dim: 3,
            max_degree: 4,
            min_norm: 0.1,
            threshold: crate::lie::DEFAULT_RANK_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCount {
    pub n_samples: usize,
    pub n_full_rank: usize,
    pub n_errors: usize,
    pub full_rank_fraction: f64,
    /// Smallest ratio of the last expected singular value to the threshold
    /// cut-off among full-rank samples.
    pub min_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmersionReport {
    pub label: String,
    pub config: SubmersionConfig,
    pub wrt_observable: SuiteCount,
    pub wrt_field: SuiteCount,
}

enum Outcome {
    Full(f64),
    Deficient,
    Failed,
}

fn tally(outcomes: &[Outcome]) -> SuiteCount {
    let mut c = SuiteCount {
        n_samples: outcomes.len(),
        n_full_rank: 0,
        n_errors: 0,
        full_rank_fraction: 0.0,
        min_margin: None,
    };
    for o in outcomes {
        match o {
            Outcome::Full(margin) => {
                c.n_full_rank += 1;
                c.min_margin = Some(c.min_margin.map_or(*margin, |a: f64| a.min(*margin)));
            }
            Outcome::Deficient => {}
            Outcome::Failed => c.n_errors += 1,
        }
    }
    if c.n_samples > 0 {
        c.full_rank_fraction = c.n_full_rank as f64 / c.n_samples as f64;
    }
    c
}

fn margin(sv: &[f64], rank: usize, threshold: f64) -> f64 {
    let cut = threshold * sv.first().copied().unwrap_or(0.0);
    sv.get(rank - 1).copied().unwrap_or(0.0) / cut
}

/// Draws system `index` (re-drawing under a derived index until the norm
/// condition holds).
fn admissible(
    cfg: &SubmersionConfig,
    suite: u64,
    index: u64,
    test: impl Fn(&RandomSystem) -> Result<f64>,
) -> Result<RandomSystem> {
    for attempt in 0u64.. {
        let s = random_system(
            cfg.seed,
            (suite << 48) | (attempt << 32) | index,
            cfg.max_dim,
            cfg.max_degree,
        )?;
        if test(&s)? > cfg.min_norm {
            return Ok(s);
        }
    }
    unreachable!()
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn observable_sample(cfg: &SubmersionConfig, i: u64) -> Result<Outcome> {
    let s = admissible(cfg, 1, i, |s| Ok(euclid(&s.field.eval(&s.point)?)))?;
    let m = default_tower_order(s.dim());
    let x = s.field.jet(&s.point, m - 1)?;
    let jac = dpsi_wrt_f_with_threshold(&x, m, m, cfg.threshold)?;
    let r = &jac.report;
    Ok(if r.submersion {
        Outcome::Full(margin(&r.singular_values, m, r.threshold))
    } else {
        Outcome::Deficient
    })
}

fn field_sample(cfg: &SubmersionConfig, i: u64) -> Result<Outcome> {
    let s = admissible(cfg, 2, i, |s| Ok(euclid(&s.observable.gradient(&s.point)?)))?;
    let m = default_tower_order(s.dim());
    let f = s.observable.jet(&s.point, m)?;
    let x = s.field.jet(&s.point, m - 1)?;
    let opts = FieldJacobianOptions {
        threshold: cfg.threshold,
        ..Default::default()
    };
    let jac = dpsi_wrt_x_with(&f, &x, m, &opts)?;
    let r = &jac.report;
    Ok(if r.submersion {
        Outcome::Full(margin(&r.singular_values, m, r.threshold))
    } else {
        Outcome::Deficient
    })
}

/// Rank of `dPsi/dF` and `dPsi/dX` over `n_samples` random systems each, with
/// tower order `n + 1`.
pub fn submersion_suite(cfg: &SubmersionConfig) -> SubmersionReport {
    let run = |f: fn(&SubmersionConfig, u64) -> Result<Outcome>| -> Vec<Outcome> {
        (0..cfg.n_samples as u64)
            .into_par_iter()
            .map(|i| f(cfg, i).unwrap_or(Outcome::Failed))
            .collect()
    };
    SubmersionReport {
        label: EMPIRICAL.into(),
        config: *cfg,
        wrt_observable: tally(&run(observable_sample)),
        wrt_field: tally(&run(field_sample)),
    }
}
