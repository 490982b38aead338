//! Empirical genericity experiments.
//!
//! "Generic" is operationalised as a seeded random polynomial perturbation
//! with i.i.d. `epsilon * N(0, 1)` coefficients. Scans evaluate the tower on
//! sampled phase points and count where it vanishes; every report is labelled
//! empirical, since random sampling says nothing about residual sets.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Observable, PerturbedField, PerturbedObservable, VectorField};
use crate::flow::Trajectory;
use crate::jet::MonomialBasis;
use crate::lie::{default_tower_order, obstruction_at, ObstructionTolerances};
use crate::mech::releq::{releq_trajectory, releq_two_body};
use crate::mech::{BodySystem, PotentialSpec};
use crate::model::{ObservableSpec, SystemSpec};
use crate::poly::Polynomial;
use crate::rng::{stream, trial_sample};

pub const EMPIRICAL: &str = "empirical";
pub const DEFAULT_TOL_ZERO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    ObservableF,
    VectorFieldX,
    PotentialV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub target: Target,
    /// Largest monomial degree of the bump.
    pub degree: usize,
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if self.degree == 0 {
            return Err(Error::InvalidInput(
                "perturbation degree must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `count` bumps in `n_vars` variables for trial `trial`.
    pub fn bumps(&self, n_vars: usize, count: usize, trial: u32) -> Result<Vec<Polynomial>> {
        self.validate()?;
        let basis = MonomialBasis::shared(n_vars, self.degree);
        let mut rng = stream(self.seed, "perturbation", u64::from(trial));
        (0..count)
            .map(|_| {
                let terms: Vec<_> = basis
                    .iter()
                    .map(|alpha| {
                        let c: f64 = rng.sample(StandardNormal);
                        (alpha.clone(), self.epsilon * c)
                    })
                    .collect();
                Polynomial::new(n_vars, terms)
            })
            .collect()
    }
}

pub fn perturb_observable(
    spec: &PerturbationSpec,
    base: Arc<dyn Observable>,
    trial: u32,
) -> Result<Arc<dyn Observable>> {
    if spec.epsilon == 0.0 {
        spec.validate()?;
        return Ok(base);
    }
    let bump = spec.bumps(base.dim(), 1, trial)?.pop().expect("one bump");
    Ok(Arc::new(PerturbedObservable { base, bump }))
}

pub fn perturb_field(
    spec: &PerturbationSpec,
    base: Arc<dyn VectorField>,
    trial: u32,
) -> Result<Arc<dyn VectorField>> {
    if spec.epsilon == 0.0 {
        spec.validate()?;
        return Ok(base);
    }
    let bumps = spec.bumps(base.dim(), base.dim(), trial)?;
    Ok(Arc::new(PerturbedField { base, bumps }))
}

/// Adds a bump in the configuration variables only.
pub fn perturb_potential(
    spec: &PerturbationSpec,
    sys: &BodySystem,
    trial: u32,
) -> Result<BodySystem> {
    if spec.epsilon == 0.0 {
        spec.validate()?;
        return Ok(sys.clone());
    }
    let bump = spec
        .bumps(sys.config_dim(), 1, trial)?
        .pop()
        .expect("one bump");
    sys.with_potential(PotentialSpec::Perturbed {
        base: Box::new(sys.potential().clone()),
        bump,
    })
}

/// A system and an observable on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subject {
    pub system: SystemSpec,
    pub observable: ObservableSpec,
}

pub struct Instance {
    pub observable: Arc<dyn Observable>,
    pub field: Arc<dyn VectorField>,
    pub phase_dim: usize,
}

impl Subject {
    pub fn instantiate(&self, spec: Option<&PerturbationSpec>, trial: u32) -> Result<Instance> {
        let model = self.system.build()?;
        let phase_dim = model.phase_dim();
        let Some(spec) = spec else {
            return Ok(Instance {
                observable: self.observable.build(&self.system)?,
                field: model.field,
                phase_dim,
            });
        };
        Ok(match spec.target {
            Target::ObservableF => Instance {
                observable: perturb_observable(spec, self.observable.build(&self.system)?, trial)?,
                field: model.field,
                phase_dim,
            },
            Target::VectorFieldX => Instance {
                observable: self.observable.build(&self.system)?,
                field: perturb_field(spec, model.field, trial)?,
                phase_dim,
            },
            Target::PotentialV => {
                let sys = self.system.system().ok_or_else(|| {
                    Error::Unsupported("potential perturbations need an N-body system".into())
                })?;
                let perturbed = SystemSpec::Nbody {
                    system: perturb_potential(spec, sys, trial)?,
                };
                let model = perturbed.build()?;
                Instance {
                    observable: self.observable.build(&perturbed)?,
                    field: model.field,
                    phase_dim,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampler {
    /// Uniform in an axis-aligned box.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Positions uniform in `[-position_scale, position_scale]`, momenta in
    /// `[-momentum_scale, momentum_scale]`, rejecting configurations with a
    /// pair closer than `min_separation`; moved to the centre-of-mass frame
    /// when the system fixes it.
    Nbody {
        position_scale: f64,
        momentum_scale: f64,
        min_separation: f64,
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Phase points on circular two-body orbits with radius uniform in
    /// `[r_min, r_max]`, random phase and sense of rotation.
    CircularOrbits {
        r_min: f64,
        r_max: f64,
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    Points {
        points: Vec<Vec<f64>>,
    },
}

const MAX_REJECTIONS: usize = 100_000;

impl Sampler {
    pub fn count(&self) -> usize {
        match self {
            Sampler::Box { count, .. }
            | Sampler::Nbody { count, .. }
            | Sampler::CircularOrbits { count, .. } => *count,
            Sampler::Points { points } => points.len(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Sampler::Box { seed, .. }
            | Sampler::Nbody { seed, .. }
            | Sampler::CircularOrbits { seed, .. } => Some(*seed),
            Sampler::Points { .. } => None,
        }
    }

    /// Sample `index` of trial `trial` for a phase space of dimension `dim`.
    pub fn draw(
        &self,
        trial: u32,
        index: usize,
        dim: usize,
        sys: Option<&BodySystem>,
    ) -> Result<Vec<f64>> {
        let idx = trial_sample(trial, index as u32);
        match self {
            Sampler::Box {
                lower, upper, seed, ..
            } => {
                if lower.len() != dim || upper.len() != dim {
                    return Err(Error::InvalidInput(format!(
                        "sampling box must have dimension {dim}"
                    )));
                }
                let mut rng = stream(*seed, "sampler/box", idx);
                Ok(lower
                    .iter()
                    .zip(upper)
                    .map(|(&lo, &hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect())
            }
            Sampler::Nbody {
                position_scale,
                momentum_scale,
                min_separation,
                seed,
                ..
            } => {
                let sys = sys.ok_or_else(|| {
                    Error::InvalidInput("the nbody sampler needs an N-body system".into())
                })?;
                let mut rng = stream(*seed, "sampler/nbody", idx);
                let nd = sys.config_dim();
                for _ in 0..MAX_REJECTIONS {
                    let mut z: Vec<f64> = (0..2 * nd)
                        .map(|k| {
                            let scale = if k < nd {
                                *position_scale
                            } else {
                                *momentum_scale
                            };
                            scale * (2.0 * rng.random::<f64>() - 1.0)
                        })
                        .collect();
                    if sys.min_pair_separation(&z[..nd]) >= *min_separation {
                        if sys.com_fixed() {
                            sys.project_com(&mut z);
                        }
                        return Ok(z);
                    }
                }
                Err(Error::InvalidInput(
                    "rejection sampling found no admissible configuration".into(),
                ))
            }
            Sampler::CircularOrbits {
                r_min, r_max, seed, ..
            } => {
                let sys = sys.ok_or_else(|| {
                    Error::InvalidInput("circular orbits need a two-body system".into())
                })?;
                let mut rng = stream(*seed, "sampler/circular", idx);
                let r = r_min + (r_max - r_min) * rng.random::<f64>();
                let phase = std::f64::consts::TAU * rng.random::<f64>();
                let reverse = rng.random::<bool>();
                let sol = releq_two_body(sys, r)?;
                let mut z = releq_trajectory(&sol, phase / sol.omega);
                if reverse {
                    let nd = sys.config_dim();
                    z[nd..].iter_mut().for_each(|p| *p = -*p);
                }
                Ok(z)
            }
            Sampler::Points { points } => {
                let z = points
                    .get(index)
                    .ok_or_else(|| Error::InvalidInput(format!("no sample {index}")))?;
                if z.len() != dim {
                    return Err(Error::InvalidInput(format!(
                        "sample {index} has dimension {}",
                        z.len()
                    )));
                }
                Ok(z.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanTolerances {
    pub tol_eq: f64,
    pub tol_crit: f64,
    pub tol_zero: f64,
}

impl Default for ScanTolerances {
    fn default() -> Self {
        let o = ObstructionTolerances::default();
        Self {
            tol_eq: o.tol_eq,
            tol_crit: o.tol_crit,
            tol_zero: DEFAULT_TOL_ZERO,
        }
    }
}

/// Sample counts of a scan. `n_excluded_equilibrium + n_excluded_f_critical +
/// n_obstruction_zero + n_obstruction_nonzero + n_errors == n_samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub label: String,
    pub n_samples: usize,
    pub n_excluded_equilibrium: usize,
    pub n_excluded_f_critical: usize,
    pub n_obstruction_zero: usize,
    pub n_obstruction_nonzero: usize,
    pub n_errors: usize,
    /// Zero count over non-excluded samples.
    pub zero_fraction: Option<f64>,
    pub min_nonexcluded_norm: Option<f64>,
    pub max_zero_norm: Option<f64>,
    pub tower_order: usize,
    pub tolerances: ScanTolerances,
    pub seed: Option<u64>,
    pub trial: u32,
}

impl ScanReport {
    pub fn n_nonexcluded(&self) -> usize {
        self.n_obstruction_zero + self.n_obstruction_nonzero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleOutcome {
    Equilibrium,
    FCritical,
    Zero { norm: f64 },
    Nonzero { norm: f64 },
    Error { message: String },
}

/// Evaluates the tower at each point (in parallel) and tallies the outcomes
/// in index order.
pub fn obstruction_scan(
    f: &dyn Observable,
    x: &dyn VectorField,
    samples: &[Vec<f64>],
    m: usize,
    tol: &ScanTolerances,
) -> (ScanReport, Vec<SampleOutcome>) {
    let otol = ObstructionTolerances {
        tol_eq: tol.tol_eq,
        tol_crit: tol.tol_crit,
    };
    let outcomes: Vec<SampleOutcome> = samples
        .par_iter()
        .map(|z| match obstruction_at(f, x, z, m, &otol) {
            Ok(s) if s.is_near_equilibrium => SampleOutcome::Equilibrium,
            Ok(s) if s.is_near_f_critical => SampleOutcome::FCritical,
            Ok(s) if s.norm_inf < tol.tol_zero => SampleOutcome::Zero { norm: s.norm_inf },
            Ok(s) if s.norm_inf.is_finite() => SampleOutcome::Nonzero { norm: s.norm_inf },
            Ok(s) => SampleOutcome::Error {
                message: format!("non-finite tower at {:?}", s.z),
            },
            Err(e) => SampleOutcome::Error {
                message: e.to_string(),
            },
        })
        .collect();
    let mut r = ScanReport {
        label: EMPIRICAL.into(),
        n_samples: samples.len(),
        n_excluded_equilibrium: 0,
        n_excluded_f_critical: 0,
        n_obstruction_zero: 0,
        n_obstruction_nonzero: 0,
        n_errors: 0,
        zero_fraction: None,
        min_nonexcluded_norm: None,
        max_zero_norm: None,
        tower_order: m,
        tolerances: *tol,
        seed: None,
        trial: 0,
    };
    let min = |a: Option<f64>, b: f64| Some(a.map_or(b, |a| a.min(b)));
    for o in &outcomes {
        match o {
            SampleOutcome::Equilibrium => r.n_excluded_equilibrium += 1,
            SampleOutcome::FCritical => r.n_excluded_f_critical += 1,
            SampleOutcome::Zero { norm } => {
                r.n_obstruction_zero += 1;
                r.min_nonexcluded_norm = min(r.min_nonexcluded_norm, *norm);
                r.max_zero_norm = Some(r.max_zero_norm.map_or(*norm, |a| a.max(*norm)));
            }
            SampleOutcome::Nonzero { norm } => {
                r.n_obstruction_nonzero += 1;
                r.min_nonexcluded_norm = min(r.min_nonexcluded_norm, *norm);
            }
            SampleOutcome::Error { .. } => r.n_errors += 1,
        }
    }
    let n = r.n_nonexcluded();
    if n > 0 {
        r.zero_fraction = Some(r.n_obstruction_zero as f64 / n as f64);
    }
    (r, outcomes)
}

/// Draws the sample set of `trial` for `subject`.
pub fn draw_samples(subject: &Subject, sampler: &Sampler, trial: u32) -> Result<Vec<Vec<f64>>> {
    let model = subject.system.build()?;
    let sys = subject.system.system();
    (0..sampler.count())
        .into_par_iter()
        .map(|i| sampler.draw(trial, i, model.dim(), sys))
        .collect()
}

/// Scan of an unperturbed subject. `m` defaults to `phase_dim + 1`.
pub fn scan_subject(
    subject: &Subject,
    sampler: &Sampler,
    m: Option<usize>,
    tol: &ScanTolerances,
) -> Result<ScanReport> {
    let inst = subject.instantiate(None, 0)?;
    let samples = draw_samples(subject, sampler, 0)?;
    let m = m.unwrap_or(default_tower_order(inst.phase_dim));
    let (mut r, _) = obstruction_scan(
        inst.observable.as_ref(),
        inst.field.as_ref(),
        &samples,
        m,
        tol,
    );
    r.seed = sampler.seed();
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub subject: Subject,
    pub perturbation: PerturbationSpec,
    pub sampler: Sampler,
    pub tower_order: usize,
    pub tolerances: ScanTolerances,
    pub trials: Vec<ScanReport>,
    pub pooled_nonexcluded: usize,
    pub pooled_zero: usize,
    pub pooled_errors: usize,
    pub pooled_zero_fraction: Option<f64>,
}

/// Each trial draws a fresh perturbation and a fresh sample set and scans it.
pub fn genericity_experiment(
    subject: &Subject,
    spec: &PerturbationSpec,
    trials: u32,
    sampler: &Sampler,
    m: Option<usize>,
    tol: &ScanTolerances,
) -> Result<ExperimentReport> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let base = subject.instantiate(None, 0)?;
    let m = m.unwrap_or(default_tower_order(base.phase_dim));
    let reports: Vec<ScanReport> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<ScanReport> {
            let inst = subject.instantiate(Some(spec), trial)?;
            let samples = draw_samples(subject, sampler, trial)?;
            let (mut r, _) = obstruction_scan(
                inst.observable.as_ref(),
                inst.field.as_ref(),
                &samples,
                m,
                tol,
            );
            r.seed = sampler.seed();
            r.trial = trial;
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let pooled_nonexcluded = reports.iter().map(ScanReport::n_nonexcluded).sum();
    let pooled_zero = reports.iter().map(|r| r.n_obstruction_zero).sum();
    let pooled_errors = reports.iter().map(|r| r.n_errors).sum();
    Ok(ExperimentReport {
        label: EMPIRICAL.into(),
        subject: subject.clone(),
        perturbation: spec.clone(),
        sampler: sampler.clone(),
        tower_order: m,
        tolerances: *tol,
        trials: reports,
        pooled_nonexcluded,
        pooled_zero,
        pooled_errors,
        pooled_zero_fraction: (pooled_nonexcluded > 0)
            .then(|| pooled_zero as f64 / pooled_nonexcluded as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RelativeEquilibrium,
    Equilibrium,
    NonConstantF,
    /// Inertia variation between the relative-equilibrium threshold and the
    /// noise margin.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyTolerances {
    /// `tol_I = max(tol_i_factor * energy_drift, tol_i_floor)`.
    pub tol_i_factor: f64,
    pub tol_i_floor: f64,
    pub tol_shape: f64,
    pub margin: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            tol_i_factor: 10.0,
            tol_i_floor: 1e-12,
            tol_shape: 1e-6,
            margin: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaariClassification {
    pub verdict: Verdict,
    pub inertia_rel_variation: f64,
    pub shape_variation: f64,
    pub energy_drift: f64,
    pub tol_i: f64,
    pub tolerances: ClassifyTolerances,
    pub span: f64,
    pub dynamical_time: f64,
}

/// Decides whether a computed N-body trajectory keeps its moment of inertia
/// constant, measured against the run's own energy drift as noise floor.
///
/// The trajectory must cover at least the dynamical time
/// `2 pi sqrt(R^3 / M)`, `R = sqrt(I / M)`, of its initial state.
pub fn classify_trajectory(
    traj: &Trajectory,
    sys: &BodySystem,
    tol: &ClassifyTolerances,
) -> Result<SaariClassification> {
    if traj.len() < 3 {
        return Err(Error::TrajectoryTooShort(format!(
            "{} recorded states",
            traj.len()
        )));
    }
    let nd = sys.config_dim();
    if traj.dim() != 2 * nd {
        return Err(Error::InvalidInput(format!(
            "trajectory dimension {} does not match the system ({})",
            traj.dim(),
            2 * nd
        )));
    }
    let mtot = sys.total_mass();
    let inertia: Vec<f64> = traj
        .states
        .iter()
        .map(|z| sys.moment_of_inertia(&z[..nd]))
        .collect();
    let radius = (inertia[0] / mtot).sqrt();
    let dynamical_time = std::f64::consts::TAU * (radius.powi(3) / mtot).sqrt();
    let span = traj.t_end() - traj.t_start();
    if span < dynamical_time {
        return Err(Error::TrajectoryTooShort(format!(
            "span {span} is shorter than the dynamical time {dynamical_time}"
        )));
    }

    let (lo, hi) = inertia
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    let mean = inertia.iter().sum::<f64>() / inertia.len() as f64;
    let inertia_rel_variation = (hi - lo) / mean;

    let dists: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|z| sys.mutual_distances(&z[..nd]))
        .collect();
    let shape_variation = (0..dists[0].len())
        .map(|k| {
            let col = dists.iter().map(|d| d[k]);
            let (lo, hi) = col
                .clone()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                    (l.min(x), h.max(x))
                });
            let mean = col.sum::<f64>() / dists.len() as f64;
            (hi - lo) / mean
        })
        .fold(0.0, f64::max);

    let energies: Vec<f64> = traj
        .states
        .iter()
        .map(|z| sys.energy_generic(z))
        .collect::<Result<_>>()?;
    let e0 = energies[0];
    let energy_drift = energies.iter().fold(0.0f64, |m, e| m.max((e - e0).abs()))
        / e0.abs().max(f64::MIN_POSITIVE);

    let z0 = &traj.states[0];
    let scale = 1.0 + z0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let at_rest = traj.states.iter().all(|z| {
        z.iter()
            .zip(z0)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * scale)
    });

    let tol_i = (tol.tol_i_factor * energy_drift).max(tol.tol_i_floor);
    let verdict = if at_rest {
        Verdict::Equilibrium
    } else if inertia_rel_variation < tol_i && shape_variation < tol.tol_shape {
        Verdict::RelativeEquilibrium
    } else if inertia_rel_variation > tol.margin * energy_drift && inertia_rel_variation > tol_i {
        Verdict::NonConstantF
    } else {
        Verdict::Inconclusive
    };
    Ok(SaariClassification {
        verdict,
        inertia_rel_variation,
        shape_variation,
        energy_drift,
        tol_i,
        tolerances: *tol,
        span,
        dynamical_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Coordinate, Oscillator, OscillatorEnergy};
    use crate::flow::{integrate, IntegratorConfig};
    use crate::mech::releq::releq_lagrange;
    use crate::mech::HamiltonianField;

    fn box_sampler(count: usize) -> Sampler {
        Sampler::Box {
            lower: vec![-2.0, -2.0],
            upper: vec![2.0, 2.0],
            count,
            seed: 11,
        }
    }

    fn oscillator(observable: ObservableSpec) -> Subject {
        Subject {
            system: SystemSpec::Oscillator {},
            observable,
        }
    }

    #[test]
    fn zero_epsilon_is_the_identity() {
        let spec = PerturbationSpec {
            target: Target::ObservableF,
            degree: 3,
            epsilon: 0.0,
            seed: 1,
        };
        let f = perturb_observable(&spec, Arc::new(OscillatorEnergy), 0).unwrap();
        assert_eq!(
            f.value(&[0.3, 0.4]).unwrap(),
            OscillatorEnergy.value(&[0.3, 0.4]).unwrap()
        );
        assert!(spec.bumps(2, 1, 0).unwrap()[0].is_zero());
    }

    #[test]
    fn bumps_are_seeded() {
        let spec = PerturbationSpec {
            target: Target::ObservableF,
            degree: 1,
            epsilon: 0.5,
            seed: 42,
        };
        let a = spec.bumps(1, 1, 0).unwrap();
        assert_eq!(a, spec.bumps(1, 1, 0).unwrap());
        assert_ne!(a, spec.bumps(1, 1, 1).unwrap());
        // Regenerate c0 + c1 x from the stream directly.
        let mut rng = stream(42, "perturbation", 0);
        let c0: f64 = rng.sample::<f64, _>(StandardNormal) * 0.5;
        let c1: f64 = rng.sample::<f64, _>(StandardNormal) * 0.5;
        assert_eq!(a[0].eval_f64(&[2.0]), c0 + 2.0 * c1);
    }

    #[test]
    fn conserved_energy_scans_to_zero_everywhere() {
        let r = scan_subject(
            &oscillator(ObservableSpec::Energy {}),
            &box_sampler(500),
            None,
            &ScanTolerances::default(),
        )
        .unwrap();
        assert_eq!(
            r.n_obstruction_zero + r.n_excluded_equilibrium + r.n_excluded_f_critical,
            500
        );
        assert_eq!(r.zero_fraction, Some(1.0));
    }

    #[test]
    fn coordinate_never_scans_to_zero() {
        let r = scan_subject(
            &oscillator(ObservableSpec::Coordinate { index: 0 }),
            &box_sampler(2000),
            None,
            &ScanTolerances::default(),
        )
        .unwrap();
        assert_eq!(r.n_obstruction_zero, 0);
        assert_eq!(r.n_nonexcluded() + r.n_excluded_equilibrium, 2000);
    }

    #[test]
    fn equilibria_are_excluded() {
        let samples = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let (r, out) = obstruction_scan(
            &Coordinate { dim: 2, index: 0 },
            &Oscillator,
            &samples,
            3,
            &ScanTolerances::default(),
        );
        assert_eq!(out[0], SampleOutcome::Equilibrium);
        assert_eq!((r.n_excluded_equilibrium, r.n_obstruction_nonzero), (1, 1));
    }

    #[test]
    fn unperturbed_experiment_keeps_energy_conserved() {
        let spec = PerturbationSpec {
            target: Target::ObservableF,
            degree: 2,
            epsilon: 0.0,
            seed: 3,
        };
        let r = genericity_experiment(
            &oscillator(ObservableSpec::Energy {}),
            &spec,
            3,
            &box_sampler(100),
            None,
            &ScanTolerances::default(),
        )
        .unwrap();
        assert_eq!(r.pooled_zero_fraction, Some(1.0));
        assert_eq!(r.label, "empirical");
    }

    #[test]
    fn lagrange_rotation_is_a_relative_equilibrium() {
        let sys = BodySystem::newtonian(vec![1.0; 3], 2).unwrap();
        let sol = releq_lagrange(&sys, 1.0).unwrap();
        let period = std::f64::consts::TAU / sol.omega;
        let times: Vec<f64> = (0..=200).map(|i| period * i as f64 / 200.0).collect();
        let states = times.iter().map(|&t| releq_trajectory(&sol, t)).collect();
        let traj =
            Trajectory::from_states(&HamiltonianField::new(sys.clone()), times, states).unwrap();
        let c = classify_trajectory(&traj, &sys, &ClassifyTolerances::default()).unwrap();
        assert_eq!(c.verdict, Verdict::RelativeEquilibrium, "{c:?}");
    }

    #[test]
    fn eccentric_kepler_orbit_is_not() {
        // Unit masses released at apocentre with a speed giving e = 0.5.
        let sys = BodySystem::newtonian(vec![1.0; 2], 2).unwrap();
        let (r, mtot, e): (f64, f64, f64) = (1.5, 2.0, 0.5);
        let v_rel = (mtot * (1.0 - e) / r).sqrt();
        let z0 = [
            -r / 2.0,
            0.0,
            r / 2.0,
            0.0,
            0.0,
            -v_rel / 2.0,
            0.0,
            v_rel / 2.0,
        ];
        let period = std::f64::consts::TAU * (1.0f64.powi(3) / mtot).sqrt();
        let x = HamiltonianField::new(sys.clone());
        let traj = integrate(&x, &z0, &IntegratorConfig::verlet(period / 1e4, period)).unwrap();
        let c = classify_trajectory(&traj, &sys, &ClassifyTolerances::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NonConstantF, "{c:?}");
        // I = r^2 / 2 swings between 1.125 at apocentre and 0.125 at pericentre.
        assert!(c.inertia_rel_variation > 1.0, "{c:?}");
    }

    #[test]
    fn short_trajectories_are_rejected() {
        let sys = BodySystem::newtonian(vec![1.0; 2], 2).unwrap();
        let x = HamiltonianField::new(sys.clone());
        let z0 = [-0.5, 0.0, 0.5, 0.0, 0.0, -0.7, 0.0, 0.7];
        let traj = integrate(&x, &z0, &IntegratorConfig::verlet(1e-3, 0.01)).unwrap();
        assert!(matches!(
            classify_trajectory(&traj, &sys, &ClassifyTolerances::default()),
            Err(Error::TrajectoryTooShort(_))
        ));
    }

    #[test]
    fn circular_samples_are_relative_equilibria() {
        let sys = BodySystem::newtonian(vec![1.0; 2], 2).unwrap();
        let s = Sampler::CircularOrbits {
            r_min: 0.5,
            r_max: 2.0,
            count: 4,
            seed: 5,
        };
        for i in 0..4 {
            let z = s.draw(0, i, 8, Some(&sys)).unwrap();
            assert!(
                (sys.moment_of_inertia(&z[..4]) - 0.5 * sys.mutual_distances(&z[..4])[0].powi(2))
                    .abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn reports_round_trip() {
        let r = scan_subject(
            &oscillator(ObservableSpec::Energy {}),
            &box_sampler(10),
            None,
            &ScanTolerances::default(),
        )
        .unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ScanReport>(&s).unwrap(), r);
    }
}
