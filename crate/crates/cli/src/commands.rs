//! The subcommands. Each returns its report; writing it out and choosing the
//! exit code is shared.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use saari_core::error::Error;
use saari_core::field::Observable;
use saari_core::flow::{integrate, Halt, IntegratorConfig, Trajectory};
use saari_core::genericity::{
    classify_trajectory, genericity_experiment, scan_subject, ExperimentReport,
    SaariClassification, ScanReport, Subject, Verdict,
};
use saari_core::lie::{
    default_tower_order, dpsi_wrt_f_with_threshold, dpsi_wrt_x_with, obstruction_at,
    FieldJacobianOptions, ObstructionSample, ObstructionTolerances, RankReport,
    DEFAULT_RANK_THRESHOLD,
};
use saari_core::mech::figure_eight::{self, FigureEight};
use saari_core::mech::releq::{
    central_configuration_defect, releq_euler, releq_lagrange, releq_newton, releq_two_body,
    rigid_rotation_defect, RelEqSolution,
};
use saari_core::mech::BodySystem;
use saari_core::model::Model;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RankTarget, ReleqBlock};
use crate::{CliError, Report, EXIT_NEGATIVE, EXIT_OK, EXIT_RUNTIME};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Tower,
    Rank,
    Simulate,
    Releq,
    Scan,
    PerturbExperiment,
    Classify,
    Figure8Demo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Tower => "tower",
            Command::Rank => "rank",
            Command::Simulate => "simulate",
            Command::Releq => "releq",
            Command::Scan => "scan",
            Command::PerturbExperiment => "perturb-experiment",
            Command::Classify => "classify",
            Command::Figure8Demo => "figure8-demo",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub expect_submersion: bool,
    pub expect: Option<Verdict>,
}

/// A finished command: the report text and the exit code it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: String,
    pub exit_code: i32,
    pub message: Option<String>,
}

impl Outcome {
    fn new<T: Serialize>(command: Command, result: T) -> Result<Self, CliError> {
        Ok(Self {
            json: Report::new(command.name(), result).to_json()?,
            exit_code: EXIT_OK,
            message: None,
        })
    }

    fn failing(mut self, code: i32, message: String) -> Self {
        self.exit_code = code;
        self.message = Some(message);
        self
    }
}

/// Runs `command` and writes its report to `--out` (or the configured report
/// path).
pub fn run(command: Command, opts: &Options) -> Result<Outcome, CliError> {
    if opts.expect_submersion && command != Command::Rank {
        return Err(CliError::Config(
            "--expect-submersion applies to `rank` only".into(),
        ));
    }
    if opts.expect.is_some() && !matches!(command, Command::Classify | Command::Figure8Demo) {
        return Err(CliError::Config(
            "--expect applies to `classify` and `figure8-demo` only".into(),
        ));
    }
    let cfg = match (&opts.config, command) {
        (Some(path), _) => ExperimentConfig::load(path, opts.seed)?,
        (None, Command::Figure8Demo) => ExperimentConfig::parse("{}")?,
        (None, _) => return Err(CliError::Config("--config is required".into())),
    };
    let outcome = match command {
        Command::Tower => tower(&cfg)?,
        Command::Rank => rank(&cfg, opts.expect_submersion)?,
        Command::Simulate => simulate(&cfg)?,
        Command::Releq => releq(&cfg)?,
        Command::Scan => scan(&cfg)?,
        Command::PerturbExperiment => perturb_experiment(&cfg)?,
        Command::Classify => classify(&cfg, opts.expect)?,
        Command::Figure8Demo => figure8_demo(&cfg, opts.expect)?,
    };
    if let Some(path) = opts.out.as_ref().or(cfg.output.report.as_ref()) {
        std::fs::write(path, &outcome.json)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(outcome)
}

/// Malformed or unsupported inputs are configuration errors; anything else
/// happened while evaluating.
fn classify_error(e: Error) -> CliError {
    match e {
        Error::InvalidInput(_) | Error::Unsupported(_) => CliError::config(e),
        _ => CliError::runtime(e),
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

struct Loaded {
    model: Model,
    observable: Option<Arc<dyn Observable>>,
}

fn load_model(cfg: &ExperimentConfig) -> Result<Loaded, CliError> {
    let spec = cfg
        .system
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `system`".into()))?;
    let model = spec.build().map_err(CliError::config)?;
    let observable = cfg
        .observable
        .as_ref()
        .map(|o| o.build(spec).map_err(CliError::config))
        .transpose()?;
    Ok(Loaded { model, observable })
}

fn observable(loaded: &Loaded) -> Result<&dyn Observable, CliError> {
    loaded
        .observable
        .as_deref()
        .ok_or_else(|| CliError::Config("missing `observable`".into()))
}

fn point(cfg: &ExperimentConfig, dim: usize) -> Result<&[f64], CliError> {
    let z = cfg
        .point
        .as_deref()
        .ok_or_else(|| CliError::Config("missing `point`".into()))?;
    if z.len() != dim {
        return Err(CliError::Config(format!(
            "`point` has {} coordinates, phase space has {dim}",
            z.len()
        )));
    }
    if !z.iter().all(|x| x.is_finite()) {
        return Err(CliError::Config(
            "`point` has non-finite coordinates".into(),
        ));
    }
    Ok(z)
}

fn tower_order(cfg: &ExperimentConfig, model: &Model) -> Result<usize, CliError> {
    match cfg.tower_order {
        Some(0) => Err(CliError::Config("`tower_order` must be at least 1".into())),
        Some(m) => Ok(m),
        None => Ok(default_tower_order(model.phase_dim())),
    }
}

fn subject(cfg: &ExperimentConfig) -> Result<Subject, CliError> {
    let loaded = load_model(cfg)?;
    observable(&loaded)?;
    Ok(Subject {
        system: cfg.system.clone().expect("checked by load_model"),
        observable: cfg.observable.clone().expect("checked above"),
    })
}

fn body_system(cfg: &ExperimentConfig) -> Result<BodySystem, CliError> {
    cfg.system
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `system`".into()))?
        .system()
        .cloned()
        .ok_or_else(|| CliError::Config("this command needs an N-body system".into()))
}

fn integrator(cfg: &ExperimentConfig) -> Result<&IntegratorConfig, CliError> {
    cfg.integrator
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `integrator`".into()))
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    traj.write_csv(BufWriter::new(file))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn tower(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let loaded = load_model(cfg)?;
    let f = observable(&loaded)?;
    let z = point(cfg, loaded.model.dim())?;
    let m = tower_order(cfg, &loaded.model)?;
    let sample: ObstructionSample = obstruction_at(
        f,
        loaded.model.field.as_ref(),
        z,
        m,
        &ObstructionTolerances::default(),
    )
    .map_err(CliError::runtime)?;
    Outcome::new(Command::Tower, sample)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub wrt: RankTarget,
    pub tower_order: usize,
    pub point: Vec<f64>,
    pub n_columns: usize,
    pub report: RankReport,
    pub field_norm: Option<f64>,
    pub gradient_norm: Option<f64>,
}

fn rank(cfg: &ExperimentConfig, expect_submersion: bool) -> Result<Outcome, CliError> {
    let loaded = load_model(cfg)?;
    let field = loaded.model.field.as_ref();
    let z = point(cfg, loaded.model.dim())?;
    let m = tower_order(cfg, &loaded.model)?;
    let block = cfg.rank.clone().unwrap_or_default();
    let threshold = block.threshold.unwrap_or(DEFAULT_RANK_THRESHOLD);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CliError::Config(format!(
            "rank threshold {threshold} must lie in (0, 1)"
        )));
    }
    let jac = match block.wrt {
        RankTarget::Observable => {
            let x = field.jet(z, m - 1).map_err(CliError::runtime)?;
            dpsi_wrt_f_with_threshold(&x, m, m, threshold)
        }
        RankTarget::Field => {
            let f = observable(&loaded)?.jet(z, m).map_err(CliError::runtime)?;
            let x = field.jet(z, m - 1).map_err(CliError::runtime)?;
            let opts = FieldJacobianOptions {
                threshold,
                ..FieldJacobianOptions::default()
            };
            dpsi_wrt_x_with(&f, &x, m, &opts)
        }
    }
    .map_err(CliError::runtime)?;
    let submersion = jac.report.submersion;
    let result = RankResult {
        wrt: block.wrt,
        tower_order: m,
        point: z.to_vec(),
        n_columns: jac.columns.len(),
        report: jac.report,
        field_norm: finite(jac.field_norm),
        gradient_norm: finite(jac.gradient_norm),
    };
    let outcome = Outcome::new(Command::Rank, result)?;
    Ok(if expect_submersion && !submersion {
        outcome.failing(
            EXIT_NEGATIVE,
            "the tower is not a submersion at this point".into(),
        )
    } else {
        outcome
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub n_states: usize,
    pub t_end: f64,
    pub final_state: Vec<f64>,
    pub halt: Option<Halt>,
    pub energy_drift: Option<f64>,
    pub ang_mom_drift: Option<f64>,
    pub inertia_rel_variation: Option<f64>,
    pub trajectory: Option<PathBuf>,
}

fn summarize(traj: &Trajectory, path: Option<&Path>) -> SimulationSummary {
    SimulationSummary {
        n_states: traj.len(),
        t_end: traj.t_end(),
        final_state: traj.final_state().to_vec(),
        halt: traj.halt.clone(),
        energy_drift: finite(traj.energy_drift()),
        ang_mom_drift: finite(traj.ang_mom_drift()),
        inertia_rel_variation: finite(traj.inertia_rel_variation()),
        trajectory: path.map(Path::to_path_buf),
    }
}

fn halt_message(halt: &Halt) -> String {
    match halt {
        Halt::Singularity { t_last, min_sep } => {
            format!(
                "integration halted at t = {t_last}: near collision (min separation {min_sep:e})"
            )
        }
        Halt::StepUnderflow { t_last, step } => {
            format!("integration halted at t = {t_last}: step size underflow ({step:e})")
        }
        Halt::StepLimit { t_last, steps } => {
            format!("integration halted at t = {t_last}: step budget of {steps} exhausted")
        }
        Halt::EvaluationFailure { t_last, message } => {
            format!("integration halted at t = {t_last}: {message}")
        }
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let loaded = load_model(cfg)?;
    let z = point(cfg, loaded.model.dim())?;
    let traj =
        integrate(loaded.model.field.as_ref(), z, integrator(cfg)?).map_err(classify_error)?;
    let path = cfg.output.trajectory.as_deref();
    if let Some(p) = path {
        write_trajectory(p, &traj)?;
    }
    let halt = traj.halt.clone();
    let outcome = Outcome::new(Command::Simulate, summarize(&traj, path))?;
    Ok(match halt {
        Some(h) => outcome.failing(EXIT_RUNTIME, halt_message(&h)),
        None => outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleqResult {
    pub solution: RelEqSolution,
    pub period: f64,
    /// `|grad V(q) - omega^2 M q|` relative to `|grad V(q)|`.
    pub central_configuration_defect: f64,
    /// Largest equation-of-motion defect of the rigid rotation over one period.
    pub rigid_rotation_defect: f64,
}

fn releq(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sys = body_system(cfg)?;
    let block = cfg
        .releq
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `releq` block".into()))?;
    let solution = match block {
        ReleqBlock::TwoBody { r } => releq_two_body(&sys, *r),
        ReleqBlock::Lagrange { side } => releq_lagrange(&sys, *side),
        ReleqBlock::Euler { order, spacing } => releq_euler(&sys, *order, *spacing),
        ReleqBlock::Newton { guess } => releq_newton(&sys, guess),
    }
    .map_err(classify_error)?;
    let period = TAU / solution.omega;
    let (_, cc_defect) =
        central_configuration_defect(&sys, &solution.configuration).map_err(CliError::runtime)?;
    let rigid = (0..=16)
        .map(|k| rigid_rotation_defect(&solution, period * k as f64 / 16.0))
        .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))
        .map_err(CliError::runtime)?;
    Outcome::new(
        Command::Releq,
        ReleqResult {
            solution,
            period,
            central_configuration_defect: cc_defect,
            rigid_rotation_defect: rigid,
        },
    )
}

fn scan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let subject = subject(cfg)?;
    let sampler = cfg.sampler()?;
    let report: ScanReport =
        scan_subject(&subject, &sampler, cfg.tower_order, &cfg.scan_tolerances())
            .map_err(classify_error)?;
    Outcome::new(Command::Scan, report)
}

fn perturb_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let subject = subject(cfg)?;
    let sampler = cfg.sampler()?;
    let (spec, trials) = cfg.perturbation_spec()?;
    let report: ExperimentReport = genericity_experiment(
        &subject,
        &spec,
        trials,
        &sampler,
        cfg.tower_order,
        &cfg.scan_tolerances(),
    )
    .map_err(classify_error)?;
    Outcome::new(Command::PerturbExperiment, report)
}

fn expectation(outcome: Outcome, expect: Option<Verdict>, got: Verdict) -> Outcome {
    match expect {
        Some(want) if want != got => outcome.failing(
            EXIT_NEGATIVE,
            format!("expected verdict {want:?}, got {got:?}"),
        ),
        _ => outcome,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResult {
    pub source: String,
    pub n_states: usize,
    pub classification: SaariClassification,
}

fn classify(cfg: &ExperimentConfig, expect: Option<Verdict>) -> Result<Outcome, CliError> {
    let sys = body_system(cfg)?;
    let loaded = load_model(cfg)?;
    let field = loaded.model.field.as_ref();
    let block = cfg.classify.clone().unwrap_or_default();
    let (traj, source) = match &block.trajectory {
        Some(path) => (
            crate::csv::read_trajectory(path, field)?,
            path.display().to_string(),
        ),
        None => {
            let z = point(cfg, loaded.model.dim())?;
            let traj = integrate(field, z, integrator(cfg)?).map_err(classify_error)?;
            if let Some(h) = &traj.halt {
                return Err(CliError::Runtime(halt_message(h)));
            }
            if let Some(p) = cfg.output.trajectory.as_deref() {
                write_trajectory(p, &traj)?;
            }
            (traj, "integrated".to_string())
        }
    };
    let classification = classify_trajectory(&traj, &sys, &block.tolerances.unwrap_or_default())
        .map_err(classify_error)?;
    let verdict = classification.verdict;
    let outcome = Outcome::new(
        Command::Classify,
        ClassifyResult {
            source,
            n_states: traj.len(),
            classification,
        },
    )?;
    Ok(expectation(outcome, expect, verdict))
}

/// Verlet steps per period in the figure-eight demonstration.
pub const FIGURE_EIGHT_STEPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEightResult {
    pub orbit: FigureEight,
    pub step: f64,
    pub closure_error: f64,
    pub classification: SaariClassification,
}

fn figure8_demo(cfg: &ExperimentConfig, expect: Option<Verdict>) -> Result<Outcome, CliError> {
    let orbit = figure_eight::refine().map_err(CliError::runtime)?;
    let step = orbit.period / FIGURE_EIGHT_STEPS as f64;
    let field = Model {
        field: Arc::new(saari_core::mech::HamiltonianField::new(
            orbit.system.clone(),
        )),
        system: Some(orbit.system.clone()),
    };
    let traj = integrate(
        field.field.as_ref(),
        &orbit.state,
        &IntegratorConfig::verlet(step, orbit.period),
    )
    .map_err(CliError::runtime)?;
    if let Some(h) = &traj.halt {
        return Err(CliError::Runtime(halt_message(h)));
    }
    if let Some(p) = cfg.output.trajectory.as_deref() {
        write_trajectory(p, &traj)?;
    }
    let closure_error = traj
        .final_state()
        .iter()
        .zip(&orbit.state)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let classification = classify_trajectory(
        &traj,
        &orbit.system,
        &cfg.classify
            .clone()
            .unwrap_or_default()
            .tolerances
            .unwrap_or_default(),
    )
    .map_err(CliError::runtime)?;
    let verdict = classification.verdict;
    let outcome = Outcome::new(
        Command::Figure8Demo,
        FigureEightResult {
            orbit,
            step,
            closure_error,
            classification,
        },
    )?;
    Ok(expectation(outcome, expect, verdict))
}
