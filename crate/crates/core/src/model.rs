//! Serializable descriptions of the systems and observables that experiments
//! are run on.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    Coordinate, Linear1d, Observable, Oscillator, OscillatorEnergy, PolynomialField,
    PolynomialObservable, VectorField,
};
use crate::mech::{AngularMomentum, BodySystem, Energy, HamiltonianField, Inertia};
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `q' = p, p' = -q`.
    Oscillator {},
    /// `x' = x`.
    Linear1d {},
    Polynomial {
        components: Vec<Polynomial>,
    },
    Nbody {
        system: BodySystem,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    Energy {},
    Inertia {},
    AngularMomentum {},
    Coordinate { index: usize },
    Polynomial { polynomial: Polynomial },
}

#[derive(Clone)]
pub struct Model {
    pub field: Arc<dyn VectorField>,
    pub system: Option<BodySystem>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// Dimension of the phase space proper (centre-of-mass reduced for
    /// N-body systems that fix it).
    pub fn phase_dim(&self) -> usize {
        self.system
            .as_ref()
            .map_or(self.field.dim(), BodySystem::phase_dim)
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            SystemSpec::Oscillator {} => Model {
                field: Arc::new(Oscillator),
                system: None,
            },
            SystemSpec::Linear1d {} => Model {
                field: Arc::new(Linear1d),
                system: None,
            },
            SystemSpec::Polynomial { components } => Model {
                field: Arc::new(PolynomialField::new(components.clone())?),
                system: None,
            },
            SystemSpec::Nbody { system } => Model {
                field: Arc::new(HamiltonianField::new(system.clone())),
                system: Some(system.clone()),
            },
        })
    }

    pub fn system(&self) -> Option<&BodySystem> {
        match self {
            SystemSpec::Nbody { system } => Some(system),
            _ => None,
        }
    }
}

impl ObservableSpec {
    pub fn build(&self, spec: &SystemSpec) -> Result<Arc<dyn Observable>> {
        let dim = spec.build()?.dim();
        let need_bodies =
            |what: &str| Error::Unsupported(format!("{what} is defined for N-body systems"));
        Ok(match (self, spec) {
            (ObservableSpec::Energy {}, SystemSpec::Oscillator {}) => Arc::new(OscillatorEnergy),
            (ObservableSpec::Energy {}, SystemSpec::Nbody { system }) => {
                Arc::new(Energy(system.clone()))
            }
            (ObservableSpec::Energy {}, _) => {
                return Err(Error::Unsupported(
                    "energy is defined for the oscillator and N-body systems".into(),
                ))
            }
            (ObservableSpec::Inertia {}, SystemSpec::Nbody { system }) => {
                Arc::new(Inertia(system.clone()))
            }
            (ObservableSpec::Inertia {}, _) => return Err(need_bodies("moment of inertia")),
            (ObservableSpec::AngularMomentum {}, SystemSpec::Nbody { system }) => {
                Arc::new(AngularMomentum(system.clone()))
            }
            (ObservableSpec::AngularMomentum {}, _) => return Err(need_bodies("angular momentum")),
            (ObservableSpec::Coordinate { index }, _) => {
                if *index >= dim {
                    return Err(Error::InvalidInput(format!(
                        "coordinate {index} out of range for dimension {dim}"
                    )));
                }
                Arc::new(Coordinate { dim, index: *index })
            }
            (ObservableSpec::Polynomial { polynomial }, _) => {
                if polynomial.dim() != dim {
                    return Err(Error::InvalidInput(format!(
                        "observable has {} variables, phase space has {dim}",
                        polynomial.dim()
                    )));
                }
                Arc::new(PolynomialObservable(polynomial.clone()))
            }
        })
    }
}
