//! Small hand-made system instances.

use std::collections::BTreeMap;
use std::path::PathBuf;

use h2plan::demand::Zone;
use h2plan::sysmodel::tech::{read_fuels, read_technologies};
use h2plan::sysmodel::{
    EdgeKind, ExistingCapacity, FuelSpec, NetworkEdge, ScenarioConfig, Sector, SystemInstance, TechnologySpec,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn catalog() -> (Vec<TechnologySpec>, Vec<FuelSpec>) {
    let dir = data_dir().join("catalog");
    (read_technologies(&dir.join("technologies.csv")).unwrap(), read_fuels(&dir.join("fuels.csv")).unwrap())
}

pub fn pick(techs: &[TechnologySpec], names: &[&str]) -> Vec<TechnologySpec> {
    names.iter().map(|n| techs.iter().find(|t| t.name == *n).unwrap_or_else(|| panic!("{n}")).clone()).collect()
}

pub fn zone(id: &str) -> Zone {
    Zone { zone_id: id.into(), lat: 0.0, lon: 0.0, country: "XX".into() }
}

pub fn existing(zone: &str, tech: &str, capacity: f64) -> ExistingCapacity {
    ExistingCapacity { zone_id: zone.into(), technology: tech.into(), capacity, energy_capacity: None, max_new: None }
}

pub fn line(from: &str, to: &str, km: f64) -> NetworkEdge {
    NetworkEdge {
        kind: EdgeKind::Hvac,
        from_zone: from.into(),
        to_zone: to.into(),
        length_km: km,
        existing_capacity: 0.0,
        max_expansion: Some(10_000.0),
        cost_per_unit: Some(47.5),
        loss_or_fuel_use: Some(0.625),
    }
}

pub fn thermal(name: &str) -> TechnologySpec {
    let mut t = TechnologySpec::new(name, Sector::Power, 30.0);
    t.capex = Some(800.0);
    t.fom = Some(20000.0);
    t.vom = Some(2.65);
    t.heat_rate = Some(6.56);
    t.fuel = Some("natural_gas".into());
    t
}

pub fn gas() -> FuelSpec {
    FuelSpec { fuel: "natural_gas".into(), price_eur_per_mmbtu: 6.33, co2_t_per_mmbtu: 0.0531 }
}

/// Instance with `periods` equally weighted days and the given hourly
/// electricity demand per zone, repeated in every period.
pub fn instance(
    zones: &[&str],
    technologies: Vec<TechnologySpec>,
    fuels: Vec<FuelSpec>,
    existing: Vec<ExistingCapacity>,
    edges: Vec<NetworkEdge>,
    electricity: &[f64],
    periods: usize,
) -> SystemInstance {
    let t = periods * 24;
    SystemInstance {
        zones: zones.iter().map(|z| zone(z)).collect(),
        technologies,
        fuels,
        existing,
        edges,
        period_weights: vec![365.0 / periods as f64; periods],
        electricity_demand: electricity.iter().map(|&d| vec![d; t]).collect(),
        h2_gas_demand: vec![vec![0.0; t]; zones.len()],
        h2_liquid_demand: vec![vec![0.0; t]; zones.len()],
        capacity_factors: BTreeMap::new(),
        discount_rate: 0.04,
        aviation_jet_fuel_mj: 0.0,
        scenario: ScenarioConfig::default(),
    }
}
