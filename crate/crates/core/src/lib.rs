pub mod dd;
pub mod error;
pub mod field;
pub mod flow;
pub mod genericity;
pub mod jet;
pub mod lie;
pub mod mech;
pub mod model;
pub mod poly;
pub mod rng;
pub mod scalar;
pub mod stencil;
pub mod submersion;

pub use error::{Error, Result};
pub use jet::{JetField, MonomialBasis, MultiIndex, TruncatedJet};
pub use lie::{psi_along_flow, psi_along_flow_extended, psi_tower, RankReport, SaariVector};
