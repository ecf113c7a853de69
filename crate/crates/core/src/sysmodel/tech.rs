//! Technology and fuel catalog.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::{self, DataError};

/// MWh of lower heating value per tonne of hydrogen.
pub const H2_LHV_MWH_PER_T: f64 = 33.333;
/// MWh of higher heating value per tonne of hydrogen.
pub const H2_HHV_MWH_PER_T: f64 = 39.41;
pub const MMBTU_PER_MWH: f64 = 3.412142;
/// Fuel name of gas-to-power plants that burn hydrogen from the gas balance.
pub const HYDROGEN_FUEL: &str = "hydrogen";
pub const NUCLEAR_FUEL: &str = "uranium";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Power,
    PowerStorage,
    H2Production,
    H2Storage,
    H2LiquidStorage,
    H2GasToPower,
    Liquefier,
    H2Pipeline,
    H2Truck,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Power => "power",
            Sector::PowerStorage => "power_storage",
            Sector::H2Production => "h2_production",
            Sector::H2Storage => "h2_storage",
            Sector::H2LiquidStorage => "h2_liquid_storage",
            Sector::H2GasToPower => "h2_gas_to_power",
            Sector::Liquefier => "liquefier",
            Sector::H2Pipeline => "h2_pipeline",
            Sector::H2Truck => "h2_truck",
        }
    }

    /// Sectors placed in zones, as opposed to pipelines and trucks that
    /// parameterise network edges.
    pub fn is_zonal(self) -> bool {
        !matches!(self, Sector::H2Pipeline | Sector::H2Truck)
    }

    pub fn is_liquid_chain(self) -> bool {
        matches!(self, Sector::Liquefier | Sector::H2LiquidStorage | Sector::H2Truck)
    }
}

/// One catalog row. Units follow the published cost tables and depend on
/// the sector; see `docs/config.md`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologySpec {
    pub name: String,
    pub sector: Sector,
    pub lifetime: f64,
    /// €/kW, €/kW of hydrogen output, €/km of pipeline or € per truck.
    pub capex: Option<f64>,
    /// €/kWh or €/t of storage energy.
    pub capex_energy: Option<f64>,
    /// €/MW-yr for power assets, €/kW of hydrogen-yr for production.
    pub fom: Option<f64>,
    /// €/t-yr of storage energy.
    pub fom_energy: Option<f64>,
    /// €/MWh of output.
    pub vom: Option<f64>,
    /// MMBTU/MWh.
    pub heat_rate: Option<f64>,
    /// Fraction: LHV efficiency for production, HHV for gas-to-power,
    /// round trip for power storage.
    pub efficiency: Option<f64>,
    pub fuel: Option<String>,
    /// t CO₂/MMBTU; overrides the fuel's intensity.
    pub co2_intensity: Option<f64>,
    pub capture_rate: Option<f64>,
    /// kWh per kg of hydrogen handled.
    pub electricity_use: Option<f64>,
    /// € per t/h of compression.
    pub compressor_capex: Option<f64>,
    pub compressor_lifetime: Option<f64>,
    /// € per t/h, once per pipeline.
    pub booster_capex: Option<f64>,
    /// €/km driven.
    pub opex_per_km: Option<f64>,
    pub fuel_use_kg_per_km: Option<f64>,
    /// t/h per pipe or tonnes per truck.
    pub unit_capacity: Option<f64>,
    pub speed_kmh: Option<f64>,
    /// Fraction lost: of liquefier output, or of liquid inventory per hour.
    pub boil_off: Option<f64>,
    /// Output bounded by an hourly capacity-factor series.
    #[serde(default)]
    pub variable: bool,
    pub expandable: bool,
    /// Space-separated zone ids; empty means every zone.
    #[serde(default)]
    pub zone_whitelist: String,
}

impl TechnologySpec {
    /// A row with only the identifying fields set.
    pub fn new(name: impl Into<String>, sector: Sector, lifetime: f64) -> Self {
        Self {
            name: name.into(),
            sector,
            lifetime,
            capex: None,
            capex_energy: None,
            fom: None,
            fom_energy: None,
            vom: None,
            heat_rate: None,
            efficiency: None,
            fuel: None,
            co2_intensity: None,
            capture_rate: None,
            electricity_use: None,
            compressor_capex: None,
            compressor_lifetime: None,
            booster_capex: None,
            opex_per_km: None,
            fuel_use_kg_per_km: None,
            unit_capacity: None,
            speed_kmh: None,
            boil_off: None,
            variable: false,
            expandable: true,
            zone_whitelist: String::new(),
        }
    }

    pub fn capture(&self) -> f64 {
        self.capture_rate.unwrap_or(0.0)
    }

    pub fn is_nuclear(&self) -> bool {
        self.fuel.as_deref() == Some(NUCLEAR_FUEL)
    }

    pub fn burns_hydrogen(&self) -> bool {
        self.fuel.as_deref() == Some(HYDROGEN_FUEL)
    }

    pub fn allowed_in(&self, zone: &str) -> bool {
        self.zone_whitelist.trim().is_empty() || self.zone_whitelist.split_whitespace().any(|z| z == zone)
    }

    /// Fossil fuel burnt per unit of activity, MMBTU per MWh of power or per
    /// tonne of hydrogen.
    pub fn fuel_per_unit(&self) -> f64 {
        match (self.sector, self.fuel.as_deref()) {
            (_, None) | (_, Some(HYDROGEN_FUEL)) => 0.0,
            (Sector::H2Production, Some(_)) => {
                H2_LHV_MWH_PER_T / self.efficiency.unwrap_or(1.0) * MMBTU_PER_MWH
            }
            _ => self.heat_rate.unwrap_or(0.0),
        }
    }

    /// Electricity drawn per tonne of hydrogen handled.
    pub fn electricity_per_t(&self) -> f64 {
        if let Some(kwh_per_kg) = self.electricity_use {
            return kwh_per_kg;
        }
        match (self.sector, &self.fuel) {
            (Sector::H2Production, None) => H2_LHV_MWH_PER_T / self.efficiency.unwrap_or(1.0),
            _ => 0.0,
        }
    }

    /// Hydrogen burnt per MWh of electricity from a gas-to-power plant.
    pub fn h2_per_mwh(&self) -> f64 {
        if self.burns_hydrogen() {
            1.0 / (self.efficiency.unwrap_or(1.0) * H2_HHV_MWH_PER_T)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelSpec {
    pub fuel: String,
    pub price_eur_per_mmbtu: f64,
    /// t CO₂/MMBTU before capture.
    pub co2_t_per_mmbtu: f64,
}

pub fn read_technologies(path: &Path) -> Result<Vec<TechnologySpec>, DataError> {
    io::read_records(path)
}

pub fn write_technologies(path: &Path, techs: &[TechnologySpec]) -> Result<(), DataError> {
    write_records(path, techs)
}

pub fn read_fuels(path: &Path) -> Result<Vec<FuelSpec>, DataError> {
    io::read_records(path)
}

pub fn write_fuels(path: &Path, fuels: &[FuelSpec]) -> Result<(), DataError> {
    write_records(path, fuels)
}

fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), DataError> {
    let mut w = io::csv_writer(path)?;
    let err = io::csv_error(path);
    for r in rows {
        w.serialize(r).map_err(&err)?;
    }
    w.flush().map_err(io::io_error(path))
}
