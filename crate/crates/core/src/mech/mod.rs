//! N-body mechanics with `G = 1`: pairwise power-law potentials
//! `V = -sum_{i<j} m_i m_j f(r_ij)`, `f(r) = sum_k beta_k r^alpha_k`, the
//! Hamiltonian vector field for the constant mass metric, and the observables
//! energy, moment of inertia and angular momentum.
//!
//! Configurations are flat: body `i` occupies `q[i*d .. (i+1)*d]`, and phase
//! points are `z = (q, p)`.

pub mod figure_eight;
pub mod releq;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AnalyticField, AnalyticObservable, MonitorRecord, Separable};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// Pairs closer than this make the potential undefined.
pub const COLLISION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Newtonian {},
    #[serde(rename = "powerlaw")]
    PowerLaw {
        /// `(beta, alpha)` pairs.
        terms: Vec<(f64, f64)>,
    },
    Perturbed {
        base: Box<PotentialSpec>,
        /// Polynomial in the flat configuration `q`.
        bump: Polynomial,
    },
}

impl PotentialSpec {
    /// Power-law terms of the underlying pair potential.
    pub fn pair_terms(&self) -> Vec<(f64, f64)> {
        match self {
            PotentialSpec::Newtonian {} => vec![(1.0, -1.0)],
            PotentialSpec::PowerLaw { terms } => terms.clone(),
            PotentialSpec::Perturbed { base, .. } => base.pair_terms(),
        }
    }

    /// All configuration-space bumps, outermost last.
    pub fn bumps(&self) -> Vec<&Polynomial> {
        match self {
            PotentialSpec::Perturbed { base, bump } => {
                let mut v = base.bumps();
                v.push(bump);
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn is_newtonian(&self) -> bool {
        match self {
            PotentialSpec::Newtonian {} => true,
            PotentialSpec::PowerLaw { terms } => terms.as_slice() == [(1.0, -1.0)],
            PotentialSpec::Perturbed { .. } => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct BodySystem {
    n: usize,
    space_dim: usize,
    masses: Vec<f64>,
    potential: PotentialSpec,
    com_fixed: bool,
    pair_terms: Vec<(f64, f64)>,
    bump: Option<Polynomial>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemRepr {
    #[serde(rename = "N")]
    n: usize,
    space_dim: usize,
    masses: Vec<f64>,
    potential: PotentialSpec,
    #[serde(default)]
    com_fixed: bool,
}

impl TryFrom<SystemRepr> for BodySystem {
    type Error = Error;
    fn try_from(r: SystemRepr) -> Result<Self> {
        BodySystem::new(r.masses, r.space_dim, r.potential, r.com_fixed).and_then(|s| {
            if s.n == r.n {
                Ok(s)
            } else {
                Err(Error::InvalidInput(format!(
                    "N = {} but {} masses given",
                    r.n, s.n
                )))
            }
        })
    }
}

impl From<BodySystem> for SystemRepr {
    fn from(s: BodySystem) -> Self {
        SystemRepr {
            n: s.n,
            space_dim: s.space_dim,
            masses: s.masses,
            potential: s.potential,
            com_fixed: s.com_fixed,
        }
    }
}

impl BodySystem {
    pub fn new(
        masses: Vec<f64>,
        space_dim: usize,
        potential: PotentialSpec,
        com_fixed: bool,
    ) -> Result<Self> {
        let n = masses.len();
        if n < 2 {
            return Err(Error::InvalidInput(
                "at least two bodies are required".into(),
            ));
        }
        if !(2..=3).contains(&space_dim) {
            return Err(Error::InvalidInput(format!(
                "space_dim must be 2 or 3, got {space_dim}"
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "masses must be positive, got {m}"
            )));
        }
        let pair_terms = potential.pair_terms();
        if pair_terms
            .iter()
            .any(|(b, a)| !(b.is_finite() && a.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite power-law term".into()));
        }
        let bumps = potential.bumps();
        if let Some(b) = bumps.iter().find(|b| b.dim() != n * space_dim) {
            return Err(Error::InvalidInput(format!(
                "potential bump has {} variables, configuration has {}",
                b.dim(),
                n * space_dim
            )));
        }
        let bump = if bumps.is_empty() {
            None
        } else {
            let terms = bumps
                .iter()
                .flat_map(|b| b.terms().iter().map(|t| (t.alpha.clone(), t.c)));
            Some(Polynomial::new(n * space_dim, terms)?)
        };
        Ok(Self {
            n,
            space_dim,
            masses,
            potential,
            com_fixed,
            pair_terms,
            bump,
        })
    }

    pub fn newtonian(masses: Vec<f64>, space_dim: usize) -> Result<Self> {
        Self::new(masses, space_dim, PotentialSpec::Newtonian {}, true)
    }

    pub fn with_potential(&self, potential: PotentialSpec) -> Result<Self> {
        Self::new(
            self.masses.clone(),
            self.space_dim,
            potential,
            self.com_fixed,
        )
    }

    pub fn n_bodies(&self) -> usize {
        self.n
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn com_fixed(&self) -> bool {
        self.com_fixed
    }

    /// Length of a configuration vector.
    pub fn config_dim(&self) -> usize {
        self.n * self.space_dim
    }

    /// Length of stored phase vectors. The centre-of-mass frame is kept by
    /// projection, so this is always `2 N d`.
    pub fn state_dim(&self) -> usize {
        2 * self.config_dim()
    }

    /// Dimension of the phase space proper: `2 (N - 1) d` in the
    /// centre-of-mass frame.
    pub fn phase_dim(&self) -> usize {
        if self.com_fixed {
            2 * (self.n - 1) * self.space_dim
        } else {
            self.state_dim()
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.pair_terms.len() > 2 * self.n - 1 {
            w.push(format!(
                "{} power-law terms exceed 2N - 1 = {}",
                self.pair_terms.len(),
                2 * self.n - 1
            ));
        }
        w
    }

    fn body<'a, T>(&self, q: &'a [T], i: usize) -> &'a [T] {
        &q[i * self.space_dim..(i + 1) * self.space_dim]
    }

    fn check_config_len(&self, len: usize) -> Result<()> {
        if len != self.config_dim() {
            return Err(Error::InvalidInput(format!(
                "configuration of length {len}, expected {}",
                self.config_dim()
            )));
        }
        Ok(())
    }

    fn squared_distance<T: Scalar>(&self, q: &[T], i: usize, j: usize) -> T {
        let (a, b) = (self.body(q, i), self.body(q, j));
        let mut r2 = a[0].lift(0.0);
        for (x, y) in a.iter().zip(b) {
            let d = x.clone() - y.clone();
            r2 = r2 + d.clone() * d;
        }
        r2
    }

    fn check_pair<T: Scalar>(&self, r2: &T, i: usize, j: usize) -> Result<()> {
        let r = r2.value().sqrt();
        if r.is_nan() || r <= COLLISION_TOL {
            return Err(Error::Singularity {
                i,
                j,
                separation: r,
            });
        }
        Ok(())
    }

    /// `V(q)` on any scalar type.
    pub fn potential_generic<T: Scalar>(&self, q: &[T]) -> Result<T> {
        self.check_config_len(q.len())?;
        let mut v = q[0].lift(0.0);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let r2 = self.squared_distance(q, i, j);
                self.check_pair(&r2, i, j)?;
                let mut f = q[0].lift(0.0);
                for &(beta, alpha) in &self.pair_terms {
                    f = f + r2.powf(0.5 * alpha) * beta;
                }
                v = v - f * (self.masses[i] * self.masses[j]);
            }
        }
        if let Some(b) = &self.bump {
            v = v + b.eval(q);
        }
        Ok(v)
    }

    /// `dV/dq` on any scalar type.
    pub fn grad_potential_generic<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>> {
        self.check_config_len(q.len())?;
        let d = self.space_dim;
        let mut g: Vec<T> = q.iter().map(|x| x.lift(0.0)).collect();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let r2 = self.squared_distance(q, i, j);
                self.check_pair(&r2, i, j)?;
                // f'(r) / r = sum beta alpha r^(alpha - 2)
                let mut fr = q[0].lift(0.0);
                for &(beta, alpha) in &self.pair_terms {
                    fr = fr + r2.powf(0.5 * (alpha - 2.0)) * (beta * alpha);
                }
                let c = fr * (-self.masses[i] * self.masses[j]);
                for k in 0..d {
                    let diff = q[i * d + k].clone() - q[j * d + k].clone();
                    let term = c.clone() * diff;
                    g[i * d + k] = g[i * d + k].clone() + term.clone();
                    g[j * d + k] = g[j * d + k].clone() - term;
                }
            }
        }
        if let Some(b) = &self.bump {
            for (axis, gi) in g.iter_mut().enumerate() {
                *gi = gi.clone() + b.derivative(axis).eval(q);
            }
        }
        Ok(g)
    }

    pub fn potential_value(&self, q: &[f64]) -> Result<f64> {
        self.potential_generic(q)
    }

    pub fn grad_potential(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.grad_potential_generic(q)
    }

    pub fn kinetic_generic<T: Scalar>(&self, p: &[T]) -> T {
        let d = self.space_dim;
        let mut k = p[0].lift(0.0);
        for (idx, pi) in p.iter().enumerate() {
            k = k + pi.clone() * pi.clone() * (0.5 / self.masses[idx / d]);
        }
        k
    }

    pub fn energy_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        let (q, p) = z.split_at(self.config_dim());
        Ok(self.kinetic_generic(p) + self.potential_generic(q)?)
    }

    pub fn centre_of_mass<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let d = self.space_dim;
        let inv_m = 1.0 / self.total_mass();
        (0..d)
            .map(|k| {
                let mut c = q[0].lift(0.0);
                for i in 0..self.n {
                    c = c + q[i * d + k].clone() * (self.masses[i] * inv_m);
                }
                c
            })
            .collect()
    }

    /// `I = sum m_i |q_i - c|^2` about the centre of mass `c`.
    pub fn inertia_generic<T: Scalar>(&self, q: &[T]) -> T {
        let d = self.space_dim;
        let c = self.centre_of_mass(q);
        let mut acc = q[0].lift(0.0);
        for i in 0..self.n {
            for k in 0..d {
                let x = q[i * d + k].clone() - c[k].clone();
                acc = acc + x.clone() * x * self.masses[i];
            }
        }
        acc
    }

    pub fn moment_of_inertia(&self, q: &[f64]) -> f64 {
        self.inertia_generic(q)
    }

    /// Total angular momentum `sum q_i x p_i`: the scalar for planar systems,
    /// the vector for spatial ones.
    pub fn angular_momentum(&self, z: &[f64]) -> Vec<f64> {
        let (q, p) = z.split_at(self.config_dim());
        let d = self.space_dim;
        let mut l = vec![0.0; if d == 2 { 1 } else { 3 }];
        for i in 0..self.n {
            let (x, v) = (&q[i * d..(i + 1) * d], &p[i * d..(i + 1) * d]);
            if d == 2 {
                l[0] += x[0] * v[1] - x[1] * v[0];
            } else {
                l[0] += x[1] * v[2] - x[2] * v[1];
                l[1] += x[2] * v[0] - x[0] * v[2];
                l[2] += x[0] * v[1] - x[1] * v[0];
            }
        }
        l
    }

    pub fn min_pair_separation(&self, q: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                best = best.min(self.squared_distance(q, i, j).sqrt());
            }
        }
        best
    }

    /// All mutual distances `r_ij`, `i < j`, in lexicographic pair order.
    pub fn mutual_distances(&self, q: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.squared_distance(q, i, j).sqrt());
            }
        }
        out
    }

    /// Moves a phase point into the centre-of-mass frame.
    pub fn project_com(&self, z: &mut [f64]) {
        let d = self.space_dim;
        let nd = self.config_dim();
        let c = self.centre_of_mass(&z[..nd]);
        let mut ptot = vec![0.0; d];
        for i in 0..self.n {
            for k in 0..d {
                z[i * d + k] -= c[k];
                ptot[k] += z[nd + i * d + k];
            }
        }
        let inv_m = 1.0 / self.total_mass();
        for i in 0..self.n {
            for k in 0..d {
                z[nd + i * d + k] -= self.masses[i] * inv_m * ptot[k];
            }
        }
    }
}

/// `q' = M^{-1} p`, `p' = -grad V(q)`.
#[derive(Debug, Clone)]
pub struct HamiltonianField {
    sys: BodySystem,
}

impl HamiltonianField {
    pub fn new(sys: BodySystem) -> Self {
        Self { sys }
    }

    pub fn system(&self) -> &BodySystem {
        &self.sys
    }
}

impl Separable for HamiltonianField {
    fn velocity(&self, p: &[f64]) -> Vec<f64> {
        let d = self.sys.space_dim;
        p.iter()
            .enumerate()
            .map(|(idx, v)| v / self.sys.masses[idx / d])
            .collect()
    }

    fn force(&self, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .sys
            .grad_potential(q)?
            .into_iter()
            .map(|g| -g)
            .collect())
    }

    fn min_separation(&self, q: &[f64]) -> Option<f64> {
        Some(self.sys.min_pair_separation(q))
    }
}

impl AnalyticField for HamiltonianField {
    fn arity(&self) -> usize {
        self.sys.state_dim()
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<Vec<T>> {
        let nd = self.sys.config_dim();
        let d = self.sys.space_dim;
        let (q, p) = z.split_at(nd);
        let mut out: Vec<T> = p
            .iter()
            .enumerate()
            .map(|(idx, v)| v.clone() * (1.0 / self.sys.masses[idx / d]))
            .collect();
        out.extend(self.sys.grad_potential_generic(q)?.into_iter().map(|g| -g));
        Ok(out)
    }

    fn separable_part(&self) -> Option<&dyn Separable> {
        Some(self)
    }

    fn monitor_state(&self, z: &[f64]) -> MonitorRecord {
        let q = &z[..self.sys.config_dim()];
        let l = self.sys.angular_momentum(z);
        MonitorRecord {
            energy: self.sys.energy_generic(z).unwrap_or(f64::NAN),
            ang_mom: if l.len() == 1 {
                l[0]
            } else {
                l.iter().map(|x| x * x).sum::<f64>().sqrt()
            },
            inertia: self.sys.moment_of_inertia(q),
            min_sep: self.sys.min_pair_separation(q),
        }
    }

    fn project_state(&self, z: &mut [f64]) {
        if self.sys.com_fixed {
            self.sys.project_com(z);
        }
    }
}

/// The Hamiltonian `H = K + V` on phase space.
#[derive(Debug, Clone)]
pub struct Energy(pub BodySystem);

impl AnalyticObservable for Energy {
    fn arity(&self) -> usize {
        self.0.state_dim()
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        self.0.energy_generic(z)
    }
}

/// Moment of inertia lifted to phase space, `F_I(q, p) = I(q)`.
#[derive(Debug, Clone)]
pub struct Inertia(pub BodySystem);

impl AnalyticObservable for Inertia {
    fn arity(&self) -> usize {
        self.0.state_dim()
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        Ok(self.0.inertia_generic(&z[..self.0.config_dim()]))
    }
}

/// Planar angular momentum `sum (x_i p_yi - y_i p_xi)`; for spatial systems
/// its `z` component.
#[derive(Debug, Clone)]
pub struct AngularMomentum(pub BodySystem);

impl AnalyticObservable for AngularMomentum {
    fn arity(&self) -> usize {
        self.0.state_dim()
    }

    fn eval_generic<T: Scalar>(&self, z: &[T]) -> Result<T> {
        let sys = &self.0;
        let d = sys.space_dim;
        let nd = sys.config_dim();
        let mut l = z[0].lift(0.0);
        for i in 0..sys.n {
            let (x, y) = (z[i * d].clone(), z[i * d + 1].clone());
            let (px, py) = (z[nd + i * d].clone(), z[nd + i * d + 1].clone());
            l = l + x * py - y * px;
        }
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Observable, VectorField};
    use crate::jet::TruncatedJet;
    use crate::lie::psi_tower;
    use crate::MultiIndex;

    fn unit(n: usize) -> BodySystem {
        BodySystem::newtonian(vec![1.0; n], 2).unwrap()
    }

    fn triangle() -> Vec<f64> {
        let s = 3f64.sqrt();
        vec![0.0, 1.0 / s, -0.5, -0.5 / s, 0.5, -0.5 / s]
    }

    #[test]
    fn potential_examples() {
        assert_eq!(
            unit(2).potential_value(&[0.0, 0.0, 2.0, 0.0]).unwrap(),
            -0.5
        );
        assert!((unit(3).potential_value(&triangle()).unwrap() + 3.0).abs() < 1e-14);
        let sq = unit(2)
            .with_potential(PotentialSpec::PowerLaw {
                terms: vec![(1.0, 2.0)],
            })
            .unwrap();
        assert!((sq.potential_value(&[0.0, 0.0, 1.0, 0.0]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn collision_names_the_pair() {
        let q = [0.0, 0.0, 1.0, 0.0, 1.0, 1e-9];
        match unit(3).potential_value(&q) {
            Err(Error::Singularity { i: 1, j: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn force_on_unit_pair() {
        let g = unit(2).grad_potential(&[-0.5, 0.0, 0.5, 0.0]).unwrap();
        assert!((-g[0] - 1.0).abs() < 1e-15 && g[1] == 0.0);
        assert!((-g[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_forces_point_at_centroid() {
        let q = triangle();
        let g = unit(3).grad_potential(&q).unwrap();
        for i in 0..3 {
            let (fx, fy) = (-g[2 * i], -g[2 * i + 1]);
            let cross = q[2 * i] * fy - q[2 * i + 1] * fx;
            assert!(cross.abs() < 1e-14);
            assert!(q[2 * i] * fx + q[2 * i + 1] * fy < 0.0);
        }
    }

    #[test]
    fn inertia_examples() {
        assert!((unit(3).moment_of_inertia(&triangle()) - 1.0).abs() < 1e-15);
        assert_eq!(unit(2).moment_of_inertia(&[-0.5, 0.0, 0.5, 0.0]), 0.5);
        // Translation does not matter.
        assert_eq!(unit(2).moment_of_inertia(&[0.5, 3.0, 1.5, 3.0]), 0.5);
    }

    #[test]
    fn hamiltonian_velocity_is_p_over_m() {
        let x = HamiltonianField::new(unit(2));
        let v = VectorField::eval(&x, &[-1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v[0], 1.0);
    }

    #[test]
    fn energy_is_conserved_through_the_tower() {
        let sys = BodySystem::new(vec![1.0, 2.0], 2, PotentialSpec::Newtonian {}, false).unwrap();
        let x = HamiltonianField::new(sys.clone());
        let z = [0.1, -0.3, 1.2, 0.4, 0.2, 0.5, -0.3, 0.1];
        let h = Energy(sys).jet(&z, 4).unwrap();
        let psi = psi_tower(&h, &x.jet(&z, 3).unwrap(), 4).unwrap();
        assert!(psi.norm_inf() < 1e-12, "{:?}", psi.values);
    }

    #[test]
    fn perturbed_potential_adds_bump_exactly() {
        let bump = Polynomial::new(4, [(MultiIndex::new(vec![1, 0, 0, 0]), 0.25)]).unwrap();
        let sys = unit(2)
            .with_potential(PotentialSpec::Perturbed {
                base: Box::new(PotentialSpec::Newtonian {}),
                bump,
            })
            .unwrap();
        let q = [0.3, 0.0, 1.3, 0.0];
        assert!((sys.potential_value(&q).unwrap() - (-1.0 + 0.075)).abs() < 1e-15);
        assert!((sys.grad_potential(&q).unwrap()[0] - (-1.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn jets_of_the_potential_are_exact_derivatives() {
        // V = -1/r in 1-D separation: d^2/dx^2 of -1/|x2 - x1| at r = 2 is -2/r^3.
        let sys = unit(2);
        let q = [0.0, 0.0, 2.0, 0.0];
        let v = sys
            .potential_generic(&TruncatedJet::variables(2, &q).unwrap())
            .unwrap();
        assert!((v.partial_value(&[0, 0, 2, 0]).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn json_schema() {
        let s = r#"{"N":3,"space_dim":2,"masses":[1,1,1],"potential":{"variant":"newtonian"},"com_fixed":true}"#;
        let sys: BodySystem = serde_json::from_str(s).unwrap();
        assert_eq!(sys.phase_dim(), 8);
        assert_eq!(
            serde_json::to_string(&sys).unwrap(),
            s.replace("[1,1,1]", "[1.0,1.0,1.0]")
        );

        let p = r#"{"N":2,"space_dim":2,"masses":[1,2],"potential":{"variant":"powerlaw","terms":[[1,-1],[0.5,2]]}}"#;
        let sys: BodySystem = serde_json::from_str(p).unwrap();
        assert_eq!(sys.potential().pair_terms(), vec![(1.0, -1.0), (0.5, 2.0)]);
        assert!(!sys.com_fixed());

        let bad =
            r#"{"N":2,"space_dim":2,"masses":[1,2],"potential":{"variant":"newtonian"},"extra":1}"#;
        assert!(serde_json::from_str::<BodySystem>(bad).is_err());
        let bad = r#"{"N":2,"space_dim":2,"masses":[1,-2],"potential":{"variant":"newtonian"}}"#;
        assert!(serde_json::from_str::<BodySystem>(bad).is_err());
    }

    #[test]
    fn too_many_terms_warn() {
        let sys = unit(2)
            .with_potential(PotentialSpec::PowerLaw {
                terms: vec![(1.0, -1.0), (1.0, -2.0), (1.0, -3.0), (1.0, 1.0)],
            })
            .unwrap();
        assert_eq!(sys.warnings().len(), 1);
    }

    #[test]
    fn com_projection() {
        let sys = BodySystem::newtonian(vec![1.0, 3.0], 2).unwrap();
        let mut z = vec![1.0, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        sys.project_com(&mut z);
        let c = sys.centre_of_mass(&z[..4]);
        assert!(c.iter().all(|x| x.abs() < 1e-15));
        assert!((z[4] + z[6]).abs() < 1e-15 && (z[5] + z[7]).abs() < 1e-15);
    }
}
