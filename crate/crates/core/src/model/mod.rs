//! Parameters, variable transforms, constitutive laws, the stationary
//! profile and the initial-data generators.

mod initial;
mod params;
mod state;
mod stationary;
mod transform;

use thiserror::Error;

pub use initial::{build_initial_data, InitialDataSpec, ProfileKind};
pub use params::{
    validate_params, HardViolation, ModelParams, ParamError, RegimeViolation, ValidationReport,
};
pub use state::TransformedState;
pub use stationary::{stationary_cq, StationaryProfile};
pub use transform::{
    friction_coefficient, from_transformed, to_transformed, PhysicalState, TransformError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("mass coordinate x = {0} outside [0, 1]")]
    OutsideDomain(f64),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
}
