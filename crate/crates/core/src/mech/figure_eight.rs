//! The equal-mass figure-eight choreography, refined by shooting.
//!
//! Starting values are the classical ones: `x1 = -x2`, `x3 = 0`,
//! `v1 = v2 = -v3 / 2`. The unknowns `(x1, v3, T)` are adjusted by
//! Gauss-Newton on `z(T) - z(0) = 0`; the problem is invariant under
//! rotation and scaling, so steps are minimum-norm least-squares solutions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BodySystem, HamiltonianField};
use crate::error::{Error, Result};
use crate::flow::{advance, IntegratorConfig};

pub const X1: [f64; 2] = [0.97000436, -0.24308753];
pub const V3: [f64; 2] = [-0.93240737, -0.86473146];
pub const PERIOD: f64 = 6.32591398;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEight {
    pub system: BodySystem,
    pub state: Vec<f64>,
    pub period: f64,
    /// `|z(T) - z(0)|` after refinement.
    pub residual: f64,
    pub initial_residual: f64,
    pub iterations: usize,
}

pub fn system() -> BodySystem {
    BodySystem::newtonian(vec![1.0; 3], 2).expect("valid system")
}

/// Phase point from the shooting unknowns `(x1, v3)`.
pub fn state_from(u: &[f64]) -> Vec<f64> {
    let (a, b, c, d) = (u[0], u[1], u[2], u[3]);
    vec![
        a,
        b,
        -a,
        -b,
        0.0,
        0.0,
        -0.5 * c,
        -0.5 * d,
        -0.5 * c,
        -0.5 * d,
        c,
        d,
    ]
}

fn shooting_config() -> IntegratorConfig {
    IntegratorConfig::dopri5(1e-13, 1e-14, 1.0)
}

fn defect(field: &HamiltonianField, u: &[f64]) -> Result<Vec<f64>> {
    let z0 = state_from(u);
    let z1 = advance(field, &z0, u[4], &shooting_config())?;
    Ok(z1.iter().zip(&z0).map(|(a, b)| a - b).collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn refine() -> Result<FigureEight> {
    let sys = system();
    let field = HamiltonianField::new(sys.clone());
    let mut u = vec![X1[0], X1[1], V3[0], V3[1], PERIOD];
    let mut r = defect(&field, &u)?;
    let initial_residual = norm(&r);
    let mut res = initial_residual;
    let mut iterations = 0;
    while iterations < 20 && res > 1e-11 {
        iterations += 1;
        let h = 1e-6;
        let mut jac = DMatrix::zeros(r.len(), u.len());
        for j in 0..u.len() {
            let (mut up, mut um) = (u.clone(), u.clone());
            up[j] += h;
            um[j] -= h;
            let (rp, rm) = (defect(&field, &up)?, defect(&field, &um)?);
            for i in 0..r.len() {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let step = svd
            .solve(
                &DVector::from_iterator(r.len(), r.iter().map(|x| -x)),
                cutoff,
            )
            .map_err(|e| Error::InternalConsistency(e.to_string()))?;
        let un: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
        let rn = defect(&field, &un)?;
        let resn = norm(&rn);
        if resn >= res {
            break;
        }
        u = un;
        r = rn;
        res = resn;
    }
    Ok(FigureEight {
        system: sys,
        state: state_from(&u),
        period: u[4],
        residual: res,
        initial_residual,
        iterations,
    })
}
