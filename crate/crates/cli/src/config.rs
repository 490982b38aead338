//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use saari_core::flow::IntegratorConfig;
use saari_core::genericity::{
    ClassifyTolerances, PerturbationSpec, Sampler, ScanTolerances, Target,
};
use saari_core::model::{ObservableSpec, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub tower_order: Option<usize>,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub rank: Option<RankBlock>,
    #[serde(default)]
    pub releq: Option<ReleqBlock>,
    #[serde(default)]
    pub scan: Option<ScanBlock>,
    #[serde(default)]
    pub perturbation: Option<PerturbationBlock>,
    #[serde(default)]
    pub classify: Option<ClassifyBlock>,
    #[serde(default)]
    pub output: OutputPaths,
    /// Global seed; every stochastic block draws from named sub-streams of it.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankTarget {
    /// Jacobian with respect to the jet of the observable.
    #[default]
    Observable,
    /// Jacobian with respect to the jet of the vector field.
    Field,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankBlock {
    #[serde(default)]
    pub wrt: RankTarget,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReleqBlock {
    TwoBody { r: f64 },
    Lagrange { side: f64 },
    Euler { order: [usize; 3], spacing: f64 },
    Newton { guess: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub sampler: Sampler,
    #[serde(default)]
    pub tolerances: Option<ScanTolerances>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationBlock {
    pub target: Target,
    pub degree: usize,
    pub epsilon: f64,
    pub trials: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyBlock {
    /// Trajectory CSV to classify; without it the system is integrated from
    /// `point` with `integrator`.
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Option<ClassifyTolerances>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads and validates a config file; `seed` overrides the file's seed.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_with_seed(&text, seed).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::parse_with_seed(text, None)
    }

    pub fn parse_with_seed(text: &str, seed: Option<u64>) -> Result<Self, CliError> {
        let mut cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if seed.is_some() {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let stochastic_scan = self
            .scan
            .as_ref()
            .is_some_and(|s| s.sampler.seed().is_some());
        if (stochastic_scan || self.perturbation.is_some()) && self.seed.is_none() {
            return Err(CliError::Config(
                "a seed is required when sampling or perturbing".into(),
            ));
        }
        if let Some(i) = &self.integrator {
            i.validate().map_err(CliError::config)?;
        }
        Ok(())
    }

    /// The sampler with its seed taken from the global seed.
    pub fn sampler(&self) -> Result<Sampler, CliError> {
        let mut sampler = self
            .scan
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `scan` block".into()))?
            .sampler
            .clone();
        let global = self.seed.unwrap_or(0);
        match &mut sampler {
            Sampler::Box { seed, .. }
            | Sampler::Nbody { seed, .. }
            | Sampler::CircularOrbits { seed, .. } => *seed = global,
            Sampler::Points { .. } => {}
        }
        Ok(sampler)
    }

    pub fn scan_tolerances(&self) -> ScanTolerances {
        self.scan
            .as_ref()
            .and_then(|s| s.tolerances)
            .unwrap_or_default()
    }

    pub fn perturbation_spec(&self) -> Result<(PerturbationSpec, u32), CliError> {
        let p = self
            .perturbation
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `perturbation` block".into()))?;
        let spec = PerturbationSpec {
            target: p.target,
            degree: p.degree,
            epsilon: p.epsilon,
            seed: self.seed.unwrap_or(0),
        };
        spec.validate().map_err(CliError::config)?;
        Ok((spec, p.trials))
    }
}
