//! Planar relative equilibria: configurations `q` with
//! `grad V(q) = omega^2 M (q - c)`, which rotate rigidly at angular velocity
//! `omega` about the centre of mass `c`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::BodySystem;
use crate::error::{Error, Result};
use crate::jet::TruncatedJet;

pub const RESIDUAL_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelEqSolution {
    pub system: BodySystem,
    /// Initial configuration, centre of mass at the origin.
    pub configuration: Vec<f64>,
    pub omega: f64,
    pub omega_squared: f64,
    pub inertia: f64,
    /// `|grad V(q) - omega^2 M q|`.
    pub residual: f64,
}

fn require_planar(sys: &BodySystem) -> Result<()> {
    if sys.space_dim() != 2 {
        return Err(Error::Unsupported(
            "relative equilibria are computed for planar systems only".into(),
        ));
    }
    Ok(())
}

fn mass_weighted(sys: &BodySystem, q: &[f64]) -> Vec<f64> {
    let d = sys.space_dim();
    q.iter()
        .enumerate()
        .map(|(k, x)| sys.masses()[k / d] * x)
        .collect()
}

fn centred(sys: &BodySystem, q: &[f64]) -> Vec<f64> {
    let d = sys.space_dim();
    let c = sys.centre_of_mass(q);
    q.iter().enumerate().map(|(k, x)| x - c[k % d]).collect()
}

/// Least-squares `omega^2` for a configuration and the remaining defect.
pub fn central_configuration_defect(sys: &BodySystem, q: &[f64]) -> Result<(f64, f64)> {
    let q = centred(sys, q);
    let g = sys.grad_potential(&q)?;
    let mq = mass_weighted(sys, &q);
    let w = dot(&g, &mq) / dot(&mq, &mq);
    let r = g
        .iter()
        .zip(&mq)
        .map(|(a, b)| (a - w * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((w, r))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finish(sys: &BodySystem, q: &[f64]) -> Result<RelEqSolution> {
    let configuration = centred(sys, q);
    let (w, residual) = central_configuration_defect(sys, &configuration)?;
    if w.is_nan() || w <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "configuration is not attracting (omega^2 = {w:e})"
        )));
    }
    Ok(RelEqSolution {
        system: sys.clone(),
        inertia: sys.moment_of_inertia(&configuration),
        configuration,
        omega: w.sqrt(),
        omega_squared: w,
        residual,
    })
}

/// Two bodies on the x-axis at separation `r`.
pub fn releq_two_body(sys: &BodySystem, r: f64) -> Result<RelEqSolution> {
    require_planar(sys)?;
    if sys.n_bodies() != 2 {
        return Err(Error::InvalidInput(
            "two-body relative equilibrium needs N = 2".into(),
        ));
    }
    finish(sys, &[0.0, 0.0, r, 0.0])
}

/// Equilateral triangle of side `side`; a central configuration for every
/// pair potential and all masses.
pub fn releq_lagrange(sys: &BodySystem, side: f64) -> Result<RelEqSolution> {
    require_planar(sys)?;
    if sys.n_bodies() != 3 {
        return Err(Error::InvalidInput(
            "Lagrange configuration needs N = 3".into(),
        ));
    }
    let h = side * 3f64.sqrt() / 2.0;
    let sol = finish(sys, &[0.0, 0.0, side, 0.0, 0.5 * side, h])?;
    polish_if_needed(sys, sol)
}

/// Euler's quintic for the ratio `rho = |BC| / |AB|` of the collinear
/// configuration `A, B, C` (B in the middle).
pub fn euler_quintic(m_a: f64, m_b: f64, m_c: f64, rho: f64) -> f64 {
    let c = [
        -(m_b + m_c),
        -(2.0 * m_b + 3.0 * m_c),
        -(m_b + 3.0 * m_c),
        3.0 * m_a + m_b,
        3.0 * m_a + 2.0 * m_b,
        m_a + m_b,
    ];
    c.iter().rev().fold(0.0, |acc, &ck| acc * rho + ck)
}

fn euler_ratio(m_a: f64, m_b: f64, m_c: f64) -> f64 {
    // The quintic is negative at 0 and has exactly one positive root.
    let p = |x| euler_quintic(m_a, m_b, m_c, x);
    let mut hi = 1.0;
    while p(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Collinear configuration with bodies `order[0], order[1], order[2]` on the
/// x-axis in that order and `|q_order[1] - q_order[0]| = spacing`.
pub fn releq_euler(sys: &BodySystem, order: [usize; 3], spacing: f64) -> Result<RelEqSolution> {
    require_planar(sys)?;
    if sys.n_bodies() != 3 {
        return Err(Error::InvalidInput(
            "Euler configuration needs N = 3".into(),
        ));
    }
    let mut sorted = order;
    sorted.sort_unstable();
    if sorted != [0, 1, 2] {
        return Err(Error::InvalidInput(format!(
            "{order:?} is not an ordering of three bodies"
        )));
    }
    let m = sys.masses();
    let rho = euler_ratio(m[order[0]], m[order[1]], m[order[2]]);
    let mut q = vec![0.0; 6];
    q[2 * order[1]] = spacing;
    q[2 * order[2]] = spacing * (1.0 + rho);
    let sol = finish(sys, &q)?;
    polish_if_needed(sys, sol)
}

fn polish_if_needed(sys: &BodySystem, sol: RelEqSolution) -> Result<RelEqSolution> {
    if sys.potential().is_newtonian() || sol.residual < RESIDUAL_TOL {
        Ok(sol)
    } else {
        releq_newton(sys, &sol.configuration)
    }
}

/// Gauss-Newton on `grad V(q) - w M (q - c) = 0` with the moment of inertia
/// held at its initial value. Rotations and translations leave the system
/// singular, so steps are minimum-norm least-squares solutions.
pub fn releq_newton(sys: &BodySystem, guess: &[f64]) -> Result<RelEqSolution> {
    require_planar(sys)?;
    let nd = sys.config_dim();
    if guess.len() != nd {
        return Err(Error::InvalidInput(format!(
            "guess of length {}, expected {nd}",
            guess.len()
        )));
    }
    let i0 = sys.moment_of_inertia(guess);
    if i0.is_nan() || i0 <= 0.0 {
        return Err(Error::InvalidInput(
            "degenerate starting configuration".into(),
        ));
    }
    let mut q = centred(sys, guess);
    let (mut w, _) = central_configuration_defect(sys, &q)?;

    let eval = |q: &[f64], w: f64| -> Result<Vec<f64>> {
        let g = sys.grad_potential(q)?;
        let qc = centred(sys, q);
        let mqc = mass_weighted(sys, &qc);
        let mut r: Vec<f64> = g.iter().zip(&mqc).map(|(a, b)| a - w * b).collect();
        r.push(sys.moment_of_inertia(q) - i0);
        Ok(r)
    };
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut r = eval(&q, w)?;
    let mut res = norm(&r);
    for _ in 0..NEWTON_MAX_ITER {
        if res < 1e-13 * (1.0 + w) {
            break;
        }
        let jac = jacobian(sys, &q, w)?;
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(
                &DVector::from_iterator(r.len(), r.iter().map(|x| -x)),
                1e-12 * smax,
            )
            .map_err(|e| Error::InternalConsistency(e.to_string()))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let qn: Vec<f64> = q.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let wn = w + t * step[nd];
            if let Ok(rn) = eval(&qn, wn) {
                let resn = norm(&rn);
                if resn < res {
                    q = centred(sys, &qn);
                    w = wn;
                    r = eval(&q, w)?;
                    res = norm(&r);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let sol = finish(sys, &q)?;
    if sol.residual >= RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: sol.residual,
        });
    }
    Ok(sol)
}

fn jacobian(sys: &BodySystem, q: &[f64], w: f64) -> Result<DMatrix<f64>> {
    let nd = sys.config_dim();
    let d = sys.space_dim();
    let m = sys.masses();
    let mtot = sys.total_mass();
    let vars = TruncatedJet::variables(1, q)?;
    let g = sys.grad_potential_generic(&vars)?;
    let qc = centred(sys, q);
    let mut jac = DMatrix::zeros(nd + 1, nd + 1);
    for a in 0..nd {
        let hess_row = g[a].gradient();
        let (i, k) = (a / d, a % d);
        for b in 0..nd {
            let (j, l) = (b / d, b % d);
            // d/dq_b of m_i (q_a - c_k)
            let dq = if k == l {
                m[i] * (f64::from(a == b) - m[j] / mtot)
            } else {
                0.0
            };
            jac[(a, b)] = hess_row[b] - w * dq;
        }
        jac[(a, nd)] = -m[i] * qc[a];
        jac[(nd, a)] = 2.0 * m[i] * qc[a];
    }
    Ok(jac)
}

/// Phase point of the rigid rotation at time `t`: `q(t) = R(omega t) q(0)`,
/// `p_i = m_i omega J q_i(t)`.
pub fn releq_trajectory(sol: &RelEqSolution, t: f64) -> Vec<f64> {
    let sys = &sol.system;
    let nd = sys.config_dim();
    let (s, c) = (sol.omega * t).sin_cos();
    let mut z = vec![0.0; 2 * nd];
    for (i, &mi) in sys.masses().iter().enumerate() {
        let (x, y) = (sol.configuration[2 * i], sol.configuration[2 * i + 1]);
        let (xr, yr) = (c * x - s * y, s * x + c * y);
        z[2 * i] = xr;
        z[2 * i + 1] = yr;
        z[nd + 2 * i] = -mi * sol.omega * yr;
        z[nd + 2 * i + 1] = mi * sol.omega * xr;
    }
    z
}

/// Defect of the equations of motion `m_i q_i'' = -dV/dq_i` along the rigid
/// rotation at time `t`, where `q'' = -omega^2 q`.
pub fn rigid_rotation_defect(sol: &RelEqSolution, t: f64) -> Result<f64> {
    let sys = &sol.system;
    let z = releq_trajectory(sol, t);
    let q = &z[..sys.config_dim()];
    let g = sys.grad_potential(q)?;
    let mq = mass_weighted(sys, q);
    Ok(g.iter()
        .zip(&mq)
        .map(|(gi, mqi)| (-sol.omega_squared * mqi + gi).abs())
        .fold(0.0, f64::max))
}

/// Equilibria of the Hamiltonian field (`p = 0`, `grad V = 0`) reached by
/// Gauss-Newton from the given starts. A start counts only if the gradient
/// becomes negligible on the scale of the potential itself, so drifting off
/// to infinity does not register.
pub fn find_equilibria(sys: &BodySystem, starts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut found = Vec::new();
    for s in starts {
        let mut q = s.clone();
        for _ in 0..NEWTON_MAX_ITER {
            let Ok(vars) = TruncatedJet::variables(1, &q) else {
                break;
            };
            let Ok(g) = sys.grad_potential_generic(&vars) else {
                break;
            };
            let n = q.len();
            let jac = DMatrix::from_fn(n, n, |a, b| g[a].gradient()[b]);
            let rhs = DVector::from_iterator(n, g.iter().map(|gi| -gi.constant_term()));
            let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-12) else {
                break;
            };
            q.iter_mut().zip(step.iter()).for_each(|(a, s)| *a += s);
        }
        let (Ok(v), Ok(g)) = (sys.potential_value(&q), sys.grad_potential(&q)) else {
            continue;
        };
        let size = centred(sys, &q).iter().map(|x| x * x).sum::<f64>().sqrt();
        let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm.is_finite() && gnorm * size <= 1e-10 * v.abs().max(f64::MIN_POSITIVE) {
            found.push(q);
        }
    }
    found
}
