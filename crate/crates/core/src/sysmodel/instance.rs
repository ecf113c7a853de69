//! Input data of the capacity-expansion model.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::ScenarioConfig;
use super::tech::{read_fuels, read_technologies, FuelSpec, Sector, TechnologySpec};
use super::ValidationError;
use crate::demand::{DemandSet, Zone};
use crate::io::{self, DataError, SeriesTable};
use crate::tdr::{Reduction, SeriesBundle, HOURS_PER_DAY};

pub const MAX_TRUCK_ROUTE_KM: f64 = 500.0;
pub const MAX_LINE_EXPANSION_MW: f64 = 10_000.0;
/// Group name of capacity-factor series in a reduction bundle.
pub const CF_GROUP: &str = "cf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Hvac,
    Hvdc,
    Pipeline,
    TruckRoute,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Hvac => "hvac",
            EdgeKind::Hvdc => "hvdc",
            EdgeKind::Pipeline => "pipeline",
            EdgeKind::TruckRoute => "truck_route",
        }
    }

    pub fn is_power_line(self) -> bool {
        matches!(self, EdgeKind::Hvac | EdgeKind::Hvdc)
    }
}

/// A candidate or existing connection between two zones.
///
/// Capacities are MW for lines, t/h for pipelines and trucks for routes.
/// `cost_per_unit` is the annualised €/MW-km-yr of lines; for pipelines
/// and trucks it overrides the catalog-derived annual cost per unit.
/// `loss_or_fuel_use` is a loss in % per 100 km for lines and pipelines and
/// a fuel use in kg H₂/km for trucks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub kind: EdgeKind,
    pub from_zone: String,
    pub to_zone: String,
    pub length_km: f64,
    pub existing_capacity: f64,
    /// Blank means unlimited.
    pub max_expansion: Option<f64>,
    pub cost_per_unit: Option<f64>,
    pub loss_or_fuel_use: Option<f64>,
}

impl NetworkEdge {
    pub fn name(&self) -> String {
        format!("{}_{}_{}", self.kind.as_str(), self.from_zone, self.to_zone)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistingCapacity {
    pub zone_id: String,
    pub technology: String,
    /// MW, or t/h for production, liquefaction and compression.
    pub capacity: f64,
    /// MWh or t of storage energy.
    #[serde(default)]
    pub energy_capacity: Option<f64>,
    /// Upper bound on new capacity in the same unit as `capacity`.
    #[serde(default)]
    pub max_new: Option<f64>,
}

/// Static network and catalog data read from a data directory.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkData {
    pub zones: Vec<Zone>,
    pub technologies: Vec<TechnologySpec>,
    pub fuels: Vec<FuelSpec>,
    pub existing: Vec<ExistingCapacity>,
    pub edges: Vec<NetworkEdge>,
}

impl NetworkData {
    /// Reads `zones.csv`, `technologies.csv`, `fuels.csv`,
    /// `existing_capacity.csv` and `edges.csv`.
    pub fn load(dir: &Path) -> Result<Self, DataError> {
        Ok(Self {
            zones: io::read_records(&dir.join("zones.csv"))?,
            technologies: read_technologies(&dir.join("technologies.csv"))?,
            fuels: read_fuels(&dir.join("fuels.csv"))?,
            existing: io::read_records(&dir.join("existing_capacity.csv"))?,
            edges: io::read_records(&dir.join("edges.csv"))?,
        })
    }
}

/// Reads `cf.csv`, whose columns are `zone:technology` capacity factors.
pub fn read_capacity_factors(dir: &Path) -> Result<SeriesTable, DataError> {
    io::read_series(&dir.join("cf.csv"))
}

/// Everything `build_lp` needs. Hourly series are indexed by
/// `period * 24 + hour`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemInstance {
    pub zones: Vec<Zone>,
    pub technologies: Vec<TechnologySpec>,
    pub fuels: Vec<FuelSpec>,
    pub existing: Vec<ExistingCapacity>,
    pub edges: Vec<NetworkEdge>,
    /// Days represented by each period.
    pub period_weights: Vec<f64>,
    /// `[zone][t]` MWh.
    pub electricity_demand: Vec<Vec<f64>>,
    /// `[zone][t]` t.
    pub h2_gas_demand: Vec<Vec<f64>>,
    /// `[zone][t]` t, aviation.
    pub h2_liquid_demand: Vec<Vec<f64>>,
    /// Keyed by `zone:technology`.
    pub capacity_factors: BTreeMap<String, Vec<f64>>,
    pub discount_rate: f64,
    /// Jet fuel displaced by the aviation demand, MJ/yr.
    pub aviation_jet_fuel_mj: f64,
    pub scenario: ScenarioConfig,
}

impl SystemInstance {
    pub fn num_periods(&self) -> usize {
        self.period_weights.len()
    }

    pub fn num_hours(&self) -> usize {
        self.period_weights.len() * HOURS_PER_DAY
    }

    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.zone_id == id)
    }

    pub fn tech_index(&self, name: &str) -> Option<usize> {
        self.technologies.iter().position(|t| t.name == name)
    }

    pub fn fuel(&self, name: &str) -> Option<&FuelSpec> {
        self.fuels.iter().find(|f| f.fuel == name)
    }

    pub fn existing_for(&self, zone: &str, tech: &str) -> Option<&ExistingCapacity> {
        self.existing.iter().find(|e| e.zone_id == zone && e.technology == tech)
    }

    pub fn capacity_factor(&self, zone: &str, tech: &str) -> Option<&[f64]> {
        self.capacity_factors.get(&format!("{zone}:{tech}")).map(Vec::as_slice)
    }

    /// Catalog entry used for edges of the given kind.
    pub fn edge_technology(&self, kind: EdgeKind) -> Option<&TechnologySpec> {
        let sector = match kind {
            EdgeKind::Pipeline => Sector::H2Pipeline,
            EdgeKind::TruckRoute => Sector::H2Truck,
            _ => return None,
        };
        self.technologies.iter().find(|t| t.sector == sector)
    }

    /// Assembles an instance from static data and a reduction whose bundle
    /// held the three demand groups (`electricity`, `h2_gas`, `h2_liquid`)
    /// and the capacity factors (`cf`).
    pub fn from_reduction(
        network: NetworkData,
        reduction: &Reduction,
        aviation_jet_fuel_mj: f64,
        scenario: ScenarioConfig,
    ) -> Result<Self, ValidationError> {
        let mut problems = Vec::new();
        let periods = reduction.periods.len();
        let series = |group: &str, zone: &str| -> Option<Vec<f64>> {
            let s = reduction.series_index(group, zone)?;
            Some(reduction.periods.iter().flat_map(|p| p.slices[s].iter().copied()).collect())
        };
        let mut demand = |group: &str| -> Vec<Vec<f64>> {
            network
                .zones
                .iter()
                .map(|z| {
                    series(group, &z.zone_id).unwrap_or_else(|| {
                        problems.push(format!("no {group} demand series for zone `{}`", z.zone_id));
                        vec![0.0; periods * HOURS_PER_DAY]
                    })
                })
                .collect()
        };
        let electricity_demand = demand("electricity");
        let h2_gas_demand = demand("h2_gas");
        let h2_liquid_demand = demand("h2_liquid");
        let capacity_factors = reduction
            .series
            .iter()
            .filter(|(g, _)| g == CF_GROUP)
            .map(|(_, c)| (c.clone(), series(CF_GROUP, c).expect("listed series exists")))
            .collect();
        if !problems.is_empty() {
            return Err(ValidationError { problems });
        }
        let instance = Self {
            zones: network.zones,
            technologies: network.technologies,
            fuels: network.fuels,
            existing: network.existing,
            edges: network.edges,
            period_weights: reduction.periods.iter().map(|p| p.weight as f64).collect(),
            electricity_demand,
            h2_gas_demand,
            h2_liquid_demand,
            capacity_factors,
            discount_rate: scenario.discount_rate,
            aviation_jet_fuel_mj,
            scenario,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Lists every structural defect.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut p = Vec::new();
        let t_len = self.num_hours();
        if self.period_weights.is_empty() {
            p.push("no representative periods".to_string());
        }
        if self.period_weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            p.push("period weights must be positive".into());
        }
        if !(self.discount_rate >= 0.0 && self.discount_rate.is_finite()) {
            p.push("discount rate must be non-negative".into());
        }
        let mut zone_ids = HashSet::new();
        for z in &self.zones {
            if !valid_id(&z.zone_id) {
                p.push(format!("zone id `{}` must be non-empty without whitespace or `:`", z.zone_id));
            }
            if !zone_ids.insert(z.zone_id.as_str()) {
                p.push(format!("duplicate zone `{}`", z.zone_id));
            }
        }
        if self.zones.is_empty() {
            p.push("no zones".into());
        }
        let mut tech_names = HashSet::new();
        for t in &self.technologies {
            check_technology(t, self, &mut p);
            if !tech_names.insert(t.name.as_str()) {
                p.push(format!("duplicate technology `{}`", t.name));
            }
        }
        for s in [Sector::H2Pipeline, Sector::H2Truck] {
            if self.technologies.iter().filter(|t| t.sector == s).count() > 1 {
                p.push(format!("at most one {} technology may be listed", s.as_str()));
            }
        }
        let mut seen = HashSet::new();
        for e in &self.existing {
            if !zone_ids.contains(e.zone_id.as_str()) {
                p.push(format!("existing capacity names unknown zone `{}`", e.zone_id));
            }
            match self.technologies.iter().find(|t| t.name == e.technology) {
                None => p.push(format!("existing capacity names unknown technology `{}`", e.technology)),
                Some(t) if !t.sector.is_zonal() => {
                    p.push(format!("`{}` is a network technology; list it in edges.csv", t.name))
                }
                _ => {}
            }
            let nums = [Some(e.capacity), e.energy_capacity, e.max_new];
            if nums.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
                p.push(format!("existing capacity of `{}` in `{}` must be finite and non-negative", e.technology, e.zone_id));
            }
            if !seen.insert((e.zone_id.as_str(), e.technology.as_str())) {
                p.push(format!("duplicate existing capacity for `{}` in `{}`", e.technology, e.zone_id));
            }
        }
        for e in &self.edges {
            let name = e.name();
            for z in [&e.from_zone, &e.to_zone] {
                if !zone_ids.contains(z.as_str()) {
                    p.push(format!("edge `{name}` names unknown zone `{z}`"));
                }
            }
            if e.from_zone == e.to_zone {
                p.push(format!("edge `{name}` connects a zone to itself"));
            }
            if !(e.length_km > 0.0 && e.length_km.is_finite()) {
                p.push(format!("edge `{name}` needs a positive length"));
            }
            if e.kind == EdgeKind::TruckRoute && e.length_km > MAX_TRUCK_ROUTE_KM {
                p.push(format!("truck route `{name}` exceeds {MAX_TRUCK_ROUTE_KM} km"));
            }
            if e.kind.is_power_line() && e.max_expansion.is_none_or(|m| m > MAX_LINE_EXPANSION_MW) {
                p.push(format!("line `{name}` needs a max_expansion of at most {MAX_LINE_EXPANSION_MW} MW"));
            }
            if e.kind.is_power_line() && e.cost_per_unit.is_none() && e.max_expansion.is_some_and(|m| m > 0.0) {
                p.push(format!("expandable line `{name}` needs cost_per_unit"));
            }
            if matches!(e.kind, EdgeKind::Pipeline | EdgeKind::TruckRoute) && self.edge_technology(e.kind).is_none() {
                p.push(format!("edge `{name}` needs a {} catalog entry", e.kind.as_str()));
            }
            let nums = [Some(e.existing_capacity), e.max_expansion, e.cost_per_unit, e.loss_or_fuel_use];
            if nums.iter().flatten().any(|v| !(*v >= 0.0) || v.is_nan()) {
                p.push(format!("edge `{name}` has a negative or undefined number"));
            }
            if e.kind != EdgeKind::TruckRoute && e.loss_or_fuel_use.is_some_and(|l| l * e.length_km / 100.0 >= 100.0) {
                p.push(format!("edge `{name}` loses all of its flow"));
            }
        }
        for (label, table) in [
            ("electricity", &self.electricity_demand),
            ("h2_gas", &self.h2_gas_demand),
            ("h2_liquid", &self.h2_liquid_demand),
        ] {
            if table.len() != self.zones.len() {
                p.push(format!("{label} demand has {} zones, expected {}", table.len(), self.zones.len()));
            }
            for (z, s) in table.iter().enumerate() {
                if s.len() != t_len {
                    p.push(format!("{label} demand of zone {z} has {} hours, expected {t_len}", s.len()));
                }
                if s.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    p.push(format!("{label} demand of zone {z} has negative or non-finite values"));
                }
            }
        }
        for (key, s) in &self.capacity_factors {
            if s.len() != t_len {
                p.push(format!("capacity factor `{key}` has {} hours, expected {t_len}", s.len()));
            }
            if s.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                p.push(format!("capacity factor `{key}` has negative or non-finite values"));
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { problems: p })
        }
    }
}

fn valid_id(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == ':')
}

fn check_technology(t: &TechnologySpec, inst: &SystemInstance, p: &mut Vec<String>) {
    let name = &t.name;
    if !valid_id(name) {
        p.push(format!("technology name `{name}` must be non-empty without whitespace or `:`"));
    }
    if !(t.lifetime > 0.0) {
        p.push(format!("technology `{name}` needs a positive lifetime"));
    }
    if !(0.0..=1.0).contains(&t.capture()) {
        p.push(format!("technology `{name}` has a capture rate outside [0, 1]"));
    }
    let numbers = [
        t.capex,
        t.capex_energy,
        t.fom,
        t.fom_energy,
        t.vom,
        t.heat_rate,
        t.co2_intensity,
        t.electricity_use,
        t.compressor_capex,
        t.booster_capex,
        t.opex_per_km,
        t.fuel_use_kg_per_km,
        t.boil_off,
    ];
    if numbers.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
        p.push(format!("technology `{name}` has a negative or non-finite parameter"));
    }
    if t.boil_off.is_some_and(|b| b >= 1.0) {
        p.push(format!("technology `{name}` boil-off must be below 1"));
    }
    let needs_eff = matches!(t.sector, Sector::PowerStorage | Sector::H2GasToPower)
        || (t.sector == Sector::H2Production && t.electricity_use.is_none());
    if needs_eff && !t.efficiency.is_some_and(|e| e > 0.0 && e <= 1.0) {
        p.push(format!("technology `{name}` needs an efficiency in (0, 1]"));
    }
    if let Some(fuel) = t.fuel.as_deref() {
        if fuel == super::tech::HYDROGEN_FUEL {
            if t.sector != Sector::H2GasToPower {
                p.push(format!("only gas-to-power plants burn hydrogen (`{name}`)"));
            }
        } else if inst.fuel(fuel).is_none() {
            p.push(format!("technology `{name}` uses unknown fuel `{fuel}`"));
        } else if t.sector == Sector::Power && t.heat_rate.is_none() {
            p.push(format!("fuelled technology `{name}` needs a heat rate"));
        }
    }
    if t.sector == Sector::H2GasToPower && !t.burns_hydrogen() {
        p.push(format!("gas-to-power technology `{name}` must use fuel `hydrogen`"));
    }
    match t.sector {
        Sector::H2Pipeline | Sector::H2Truck if !t.unit_capacity.is_some_and(|c| c > 0.0) => {
            p.push(format!("`{name}` needs a positive unit_capacity"));
        }
        Sector::H2Truck if !t.speed_kmh.is_some_and(|s| s > 0.0) => {
            p.push(format!("`{name}` needs a positive speed_kmh"));
        }
        _ => {}
    }
    for z in t.zone_whitelist.split_whitespace() {
        if inst.zone_index(z).is_none() {
            p.push(format!("technology `{name}` whitelists unknown zone `{z}`"));
        }
    }
}

/// Builds the bundle reduced by the time-domain reduction: the three
/// demand carriers plus capacity factors.
pub fn reduction_bundle(demand: &DemandSet, cf: &SeriesTable) -> SeriesBundle {
    let mut b = SeriesBundle::default();
    b.push("electricity", demand.electricity.clone());
    b.push("h2_gas", demand.h2_gas.clone());
    b.push("h2_liquid", demand.h2_liquid.clone());
    if !cf.columns.is_empty() {
        b.push(CF_GROUP, cf.clone());
    }
    b
}
