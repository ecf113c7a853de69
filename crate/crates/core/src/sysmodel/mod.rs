//! Sector-coupled capacity-expansion model of the electricity and hydrogen
//! systems.

mod build;
pub mod instance;
pub mod scenario;
pub mod tech;

use thiserror::Error;

use crate::scalar::Scalar;

pub use build::{
    build_lp, pipeline_cost_per_tph, predict_size, BuiltModel, CostCategory, CostTerm, EdgeColumns, ElectricityTerm,
    ElectricityUse, EmissionSector, EmissionTerm, ModelIndex, ModelSize, TechColumns,
};
pub use instance::{EdgeKind, ExistingCapacity, NetworkData, NetworkEdge, SystemInstance};
pub use scenario::{PresetFile, ScenarioConfig, ScenarioError};
pub use tech::{FuelSpec, Sector, TechnologySpec};

/// Every structural defect found in an instance or model.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("invalid model input:\n  {}", problems.join("\n  "))]
pub struct ValidationError {
    pub problems: Vec<String>,
}

/// Annual payment that repays `capex` over `lifetime` years at
/// `discount_rate`; a zero rate spreads it evenly.
pub fn annualize<T: Scalar>(capex: T, lifetime: T, discount_rate: T) -> T {
    if discount_rate == T::zero() {
        return capex / lifetime;
    }
    capex * discount_rate / (T::one() - (T::one() + discount_rate).powf(-lifetime))
}

/// Selects a preset and stores it, with its discount rate, on a copy of
/// the instance.
pub fn apply_scenario(
    instance: &SystemInstance,
    presets: &PresetFile,
    name: &str,
) -> Result<SystemInstance, ScenarioError> {
    let scenario = presets.preset(name)?;
    let mut out = instance.clone();
    out.discount_rate = scenario.discount_rate;
    out.scenario = scenario;
    Ok(out)
}
