//! Reported quantities of a solved capacity-expansion model: the cost
//! ledger, levelized hydrogen cost, marginal electricity prices, abatement
//! cost and emissions accounting, plus the tabular summary written to disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::io::{self, DataError};
use crate::solver::{SolveResult, SolveStatus};
use crate::sysmodel::{BuiltModel, CostCategory, ElectricityUse, EmissionSector, Sector, SystemInstance};
use crate::tdr::HOURS_PER_DAY;

pub const MJ_PER_MMBTU: f64 = 1055.056;
/// Default jet fuel combustion intensity, t CO₂/MMBTU.
pub const JET_FUEL_CO2_T_PER_MMBTU: f64 = 0.0703;
/// Display-only distribution and refuelling adder for liquid hydrogen,
/// €/kg, low and high. Never enters the optimization.
pub const LAST_MILE_ADDER_EUR_PER_KG: (f64, f64) = (0.13, 0.27);

/// Primal values closer to zero than this are written as zero.
const NOISE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("{0} is zero, so the ratio is undefined")]
    DivisionDomain(&'static str),
    #[error("solution status is {0:?}, reports need an optimal solution")]
    NotOptimal(SolveStatus),
    #[error("solution has {got} columns but the model has {expected}")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn check(model: &BuiltModel, result: &SolveResult<f64>) -> Result<(), AnalyticsError> {
    if result.status != SolveStatus::Optimal {
        return Err(AnalyticsError::NotOptimal(result.status));
    }
    if result.primal.len() != model.lp.num_cols() || result.dual.len() != model.lp.num_rows() {
        return Err(AnalyticsError::Shape { expected: model.lp.num_cols(), got: result.primal.len() });
    }
    Ok(())
}

fn clean(v: f64) -> f64 {
    if v.abs() < NOISE {
        0.0
    } else {
        v
    }
}

/// Annual costs by objective category plus the electricity the hydrogen
/// chain buys at marginal prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    /// Objective contributions; they sum to the LP objective.
    pub categories: BTreeMap<CostCategory, f64>,
    /// Electricity bought by the hydrogen chain valued at the power-balance
    /// duals of the hour of use. A transfer between sectors, not an
    /// objective term.
    pub electricity_eur: BTreeMap<ElectricityUse, f64>,
    pub electricity_mwh: BTreeMap<ElectricityUse, f64>,
    pub total_h2_generated_t: f64,
    /// Liquid hydrogen leaving the liquefiers, after their boil-off.
    pub total_h2_liquefied_t: f64,
}

impl CostReport {
    pub fn from_solution(
        model: &BuiltModel,
        inst: &SystemInstance,
        result: &SolveResult<f64>,
    ) -> Result<Self, AnalyticsError> {
        check(model, result)?;
        let x = &result.primal;
        let idx = &model.index;
        let mut electricity_eur: BTreeMap<ElectricityUse, f64> = BTreeMap::new();
        let mut electricity_mwh: BTreeMap<ElectricityUse, f64> = BTreeMap::new();
        for kind in [ElectricityUse::Electrolysis, ElectricityUse::Compression, ElectricityUse::Liquefaction] {
            electricity_eur.insert(kind, 0.0);
            electricity_mwh.insert(kind, 0.0);
        }
        for term in &idx.electricity_terms {
            let used = term.mwh * x[term.col];
            let dual = idx.power_balance[term.zone][term.hour].map_or(0.0, |r| result.dual[r]);
            *electricity_eur.get_mut(&term.kind).expect("seeded") += dual * used;
            *electricity_mwh.get_mut(&term.kind).expect("seeded") += idx.weight_of_hour(term.hour) * used;
        }
        let mut generated = 0.0;
        let mut liquefied = 0.0;
        for tc in &idx.techs {
            let tech = &inst.technologies[tc.tech];
            match tech.sector {
                Sector::H2Production => generated += idx.annual(&tc.activity, x),
                Sector::Liquefier => liquefied += idx.annual(&tc.activity, x) * (1.0 - tech.boil_off.unwrap_or(0.0)),
                _ => {}
            }
        }
        Ok(Self {
            categories: idx.cost_by_category(x),
            electricity_eur,
            electricity_mwh,
            total_h2_generated_t: clean(generated),
            total_h2_liquefied_t: clean(liquefied),
        })
    }

    pub fn get(&self, c: CostCategory) -> f64 {
        self.categories.get(&c).copied().unwrap_or(0.0)
    }

    pub fn electricity(&self, kind: ElectricityUse) -> f64 {
        self.electricity_eur.get(&kind).copied().unwrap_or(0.0)
    }

    /// Sum of every objective category.
    pub fn total(&self) -> f64 {
        self.categories.values().sum()
    }
}

/// Numerator of the gaseous levelized cost, €/yr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaseousCosts {
    pub production_fixed: f64,
    pub storage_fixed: f64,
    /// Includes compressors and boosters.
    pub pipeline_fixed: f64,
    /// Electrolysis and compression electricity at marginal prices.
    pub variable_electricity: f64,
    /// Fuel plus variable O&M of production and storage.
    pub fuel: f64,
}

impl GaseousCosts {
    pub fn sum(&self) -> f64 {
        self.production_fixed + self.storage_fixed + self.pipeline_fixed + self.variable_electricity + self.fuel
    }
}

/// Numerator of the liquid adder, €/yr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiquidCosts {
    pub liquefaction_fixed: f64,
    /// Liquefier electricity at marginal prices plus liquefier VOM.
    pub liquefaction_variable: f64,
    pub truck_fixed: f64,
    pub truck_opex: f64,
}

impl LiquidCosts {
    pub fn sum(&self) -> f64 {
        self.liquefaction_fixed + self.liquefaction_variable + self.truck_fixed + self.truck_opex
    }
}

/// System-average levelized cost of hydrogen, €/kg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lcoh {
    pub gaseous: f64,
    /// `None` when nothing was liquefied.
    pub liquid: Option<f64>,
    pub gaseous_costs: GaseousCosts,
    pub liquid_costs: LiquidCosts,
    pub generated_t: f64,
    pub liquefied_t: f64,
}

impl Lcoh {
    pub fn liquid(&self) -> Result<f64, AnalyticsError> {
        self.liquid.ok_or(AnalyticsError::DivisionDomain("hydrogen liquefied"))
    }
}

/// Gaseous cost per kilogram generated; the liquid cost adds liquefaction
/// and trucking per kilogram liquefied on top.
pub fn lcoh(costs: &CostReport) -> Result<Lcoh, AnalyticsError> {
    if costs.total_h2_generated_t <= 0.0 {
        return Err(AnalyticsError::DivisionDomain("hydrogen generated"));
    }
    let gaseous_costs = GaseousCosts {
        production_fixed: costs.get(CostCategory::H2ProductionFixed),
        storage_fixed: costs.get(CostCategory::H2StorageFixed),
        pipeline_fixed: costs.get(CostCategory::H2PipelineFixed),
        variable_electricity: costs.electricity(ElectricityUse::Electrolysis)
            + costs.electricity(ElectricityUse::Compression),
        fuel: costs.get(CostCategory::H2Fuel) + costs.get(CostCategory::H2ProductionVariable),
    };
    let liquid_costs = LiquidCosts {
        liquefaction_fixed: costs.get(CostCategory::LiquefactionFixed),
        liquefaction_variable: costs.electricity(ElectricityUse::Liquefaction)
            + costs.get(CostCategory::LiquefactionVariable),
        truck_fixed: costs.get(CostCategory::TruckFixed),
        truck_opex: costs.get(CostCategory::TruckOpex),
    };
    // € per tonne is € per 1000 kg.
    let gaseous = gaseous_costs.sum() / costs.total_h2_generated_t / 1e3;
    let liquid = (costs.total_h2_liquefied_t > 0.0)
        .then(|| gaseous + liquid_costs.sum() / costs.total_h2_liquefied_t / 1e3);
    Ok(Lcoh {
        gaseous,
        liquid,
        gaseous_costs,
        liquid_costs,
        generated_t: costs.total_h2_generated_t,
        liquefied_t: costs.total_h2_liquefied_t,
    })
}

/// Marginal electricity price, €/MWh, by `[zone][t]`; `None` where a zone
/// has no power balance.
pub fn electricity_prices(model: &BuiltModel, result: &SolveResult<f64>) -> Vec<Vec<Option<f64>>> {
    let idx = &model.index;
    idx.power_balance
        .iter()
        .map(|rows| {
            rows.iter()
                .enumerate()
                .map(|(t, r)| r.map(|r| result.dual[r] / idx.weight_of_hour(t)))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbatementCost {
    /// €/t CO₂; zero when the cap does not bind.
    pub eur_per_t: f64,
    pub binding: bool,
}

/// Marginal abatement cost read off the emissions cap. A missing or slack
/// cap gives zero with `binding` unset.
pub fn abatement_cost(model: &BuiltModel, result: &SolveResult<f64>) -> AbatementCost {
    match model.index.emissions_cap.map(|r| result.dual[r]) {
        Some(d) if d > NOISE => AbatementCost { eur_per_t: d, binding: true },
        _ => AbatementCost { eur_per_t: 0.0, binding: false },
    }
}

/// Jet fuel combustion CO₂ in tonnes for `mj` of fuel energy.
pub fn jet_fuel_co2_t(mj: f64, t_per_mmbtu: f64) -> f64 {
    mj / MJ_PER_MMBTU * t_per_mmbtu
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionsReport {
    pub direct_by_sector: BTreeMap<EmissionSector, f64>,
    pub direct_by_zone: Vec<f64>,
    pub direct_total: f64,
    /// Average power-sector intensity per zone, t/MWh generated.
    pub zonal_power_intensity: Vec<f64>,
    /// Electrolyser consumption times the zonal average intensity.
    pub indirect_electrolysis: f64,
    /// Liquid (aviation) share of total hydrogen demand.
    pub aviation_share: f64,
    /// Aviation share of direct hydrogen-sector and indirect electrolysis
    /// emissions.
    pub aviation_attributed: f64,
    pub attribution_method: &'static str,
    pub counterfactual_jet_fuel: f64,
    pub cap: f64,
    pub cap_dual: f64,
    pub cap_binding: bool,
}

pub fn emissions_report(
    model: &BuiltModel,
    inst: &SystemInstance,
    result: &SolveResult<f64>,
) -> Result<EmissionsReport, AnalyticsError> {
    emissions_report_with(model, inst, result, JET_FUEL_CO2_T_PER_MMBTU)
}

pub fn emissions_report_with(
    model: &BuiltModel,
    inst: &SystemInstance,
    result: &SolveResult<f64>,
    jet_t_per_mmbtu: f64,
) -> Result<EmissionsReport, AnalyticsError> {
    check(model, result)?;
    let x = &result.primal;
    let idx = &model.index;
    let nz = inst.zones.len();
    let mut by_sector: BTreeMap<EmissionSector, f64> =
        [(EmissionSector::Power, 0.0), (EmissionSector::Hydrogen, 0.0)].into_iter().collect();
    let mut by_zone = vec![0.0; nz];
    let mut power_by_zone = vec![0.0; nz];
    for term in &idx.emission_terms {
        let t = term.coef * x[term.col];
        *by_sector.get_mut(&term.sector).expect("seeded") += t;
        by_zone[term.zone] += t;
        if term.sector == EmissionSector::Power {
            power_by_zone[term.zone] += t;
        }
    }
    let generation = zonal_generation(model, inst, x);
    let intensity: Vec<f64> = (0..nz)
        .map(|z| if generation[z] > 0.0 { power_by_zone[z] / generation[z] } else { 0.0 })
        .collect();
    let indirect: f64 = idx
        .electricity_terms
        .iter()
        .filter(|t| t.kind == ElectricityUse::Electrolysis)
        .map(|t| intensity[t.zone] * idx.weight_of_hour(t.hour) * t.mwh * x[t.col])
        .sum();

    let (gas, liquid) = annual_h2_demand(model, inst);
    let total_gas: f64 = gas.iter().sum();
    let total_liquid: f64 = liquid.iter().sum();
    let aviation_share =
        if total_gas + total_liquid > 0.0 { total_liquid / (total_gas + total_liquid) } else { 0.0 };
    let h2_system = by_sector[&EmissionSector::Hydrogen] + indirect;
    let abatement = abatement_cost(model, result);
    Ok(EmissionsReport {
        direct_total: clean(by_sector.values().sum()),
        direct_by_sector: by_sector.into_iter().map(|(k, v)| (k, clean(v))).collect(),
        direct_by_zone: by_zone.into_iter().map(clean).collect(),
        zonal_power_intensity: intensity,
        indirect_electrolysis: clean(indirect),
        aviation_share,
        aviation_attributed: clean(aviation_share * h2_system),
        attribution_method: "proportional_share",
        counterfactual_jet_fuel: if model.index.liquid_chain {
            jet_fuel_co2_t(inst.aviation_jet_fuel_mj, jet_t_per_mmbtu)
        } else {
            0.0
        },
        cap: inst.scenario.emissions_cap,
        cap_dual: abatement.eur_per_t,
        cap_binding: abatement.binding,
    })
}

/// Annual electricity generated per zone by power plants and hydrogen
/// turbines, MWh. Storage discharge is shifted energy and is left out.
fn zonal_generation(model: &BuiltModel, inst: &SystemInstance, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; inst.zones.len()];
    for tc in &model.index.techs {
        if matches!(inst.technologies[tc.tech].sector, Sector::Power | Sector::H2GasToPower) {
            out[tc.zone] += model.index.annual(&tc.activity, x);
        }
    }
    out
}

/// Annual gaseous and modelled liquid hydrogen demand per zone, t.
fn annual_h2_demand(model: &BuiltModel, inst: &SystemInstance) -> (Vec<f64>, Vec<f64>) {
    let idx = &model.index;
    let annual = |series: &[f64]| -> f64 { series.iter().enumerate().map(|(t, v)| idx.weight_of_hour(t) * v).sum() };
    let gas = inst.h2_gas_demand.iter().map(|s| annual(s)).collect();
    let liquid = inst
        .h2_liquid_demand
        .iter()
        .map(|s| if idx.liquid_chain { annual(s) } else { 0.0 })
        .collect();
    (gas, liquid)
}

/// Writes the report tables, the zone GeoJSON and the price table into
/// `out_dir`. Every table is written, with a header, even when it has no
/// rows. Returns the written paths in order.
pub fn summarize(
    model: &BuiltModel,
    inst: &SystemInstance,
    result: &SolveResult<f64>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, AnalyticsError> {
    check(model, result)?;
    fs::create_dir_all(out_dir).map_err(io::io_error(out_dir))?;
    let x = &result.primal;
    let idx = &model.index;
    let costs = CostReport::from_solution(model, inst, result)?;
    let emissions = emissions_report(model, inst, result)?;
    let prices = electricity_prices(model, result);
    let mut written = Vec::new();
    let mut table = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<(), AnalyticsError> {
        let path = out_dir.join(name);
        {
            let mut w = io::csv_writer(&path)?;
            let err = io::csv_error(&path);
            w.write_record(header).map_err(&err)?;
            for r in rows {
                w.write_record(&r).map_err(&err)?;
            }
            w.flush().map_err(io::io_error(&path))?;
        }
        written.push(path);
        Ok(())
    };
    let num = |v: f64| clean(v).to_string();

    let mut rows: Vec<Vec<String>> = costs
        .categories
        .iter()
        .map(|(c, v)| vec![c.as_str().to_string(), "objective".into(), num(*v)])
        .collect();
    for (kind, v) in &costs.electricity_eur {
        let name = match kind {
            ElectricityUse::Electrolysis => "electrolysis_electricity",
            ElectricityUse::Compression => "compression_electricity",
            ElectricityUse::Liquefaction => "liquefaction_electricity",
        };
        rows.push(vec![name.into(), "transfer".into(), num(*v)]);
    }
    rows.push(vec!["total".into(), "objective".into(), num(costs.total())]);
    table("costs.csv", &["item", "kind", "eur_per_yr"], rows)?;

    let mut rows = Vec::new();
    if let Ok(l) = lcoh(&costs) {
        rows.push(vec!["gaseous".into(), num(l.gaseous), num(l.gaseous_costs.sum()), num(l.generated_t)]);
        if let Some(liq) = l.liquid {
            rows.push(vec!["liquid".into(), num(liq), num(l.liquid_costs.sum()), num(l.liquefied_t)]);
        }
    }
    table("lcoh.csv", &["carrier", "eur_per_kg", "numerator_eur", "denominator_t"], rows)?;

    let sector = |s: EmissionSector| emissions.direct_by_sector.get(&s).copied().unwrap_or(0.0);
    let rows = vec![
        vec!["direct_power_t".into(), num(sector(EmissionSector::Power))],
        vec!["direct_hydrogen_t".into(), num(sector(EmissionSector::Hydrogen))],
        vec!["indirect_electrolysis_t".into(), num(emissions.indirect_electrolysis)],
        vec!["aviation_share".into(), num(emissions.aviation_share)],
        vec!["aviation_attributed_t".into(), num(emissions.aviation_attributed)],
        vec!["attribution_method".into(), emissions.attribution_method.into()],
        vec!["counterfactual_jet_fuel_t".into(), num(emissions.counterfactual_jet_fuel)],
        vec!["cap_t".into(), emissions.cap.to_string()],
        vec!["cap_dual_eur_per_t".into(), num(emissions.cap_dual)],
        vec!["cap_binding".into(), emissions.cap_binding.to_string()],
    ];
    table("emissions.csv", &["item", "value"], rows)?;

    let is_power = |s: Sector| matches!(s, Sector::Power | Sector::PowerStorage | Sector::H2GasToPower);
    let cap_header = ["zone", "technology", "sector", "unit", "existing", "new", "retired", "total", "energy_total"];
    let (mut power_cap, mut h2_cap) = (Vec::new(), Vec::new());
    let (mut power_gen, mut h2_prod) = (Vec::new(), Vec::new());
    let (mut power_sto, mut h2_sto) = (Vec::new(), Vec::new());
    for tc in &idx.techs {
        let tech = &inst.technologies[tc.tech];
        let zone = inst.zones[tc.zone].zone_id.clone();
        let power = is_power(tech.sector);
        let unit = if power { "MW" } else { "t/h" };
        let cap_row = vec![
            zone.clone(),
            tech.name.clone(),
            tech.sector.as_str().into(),
            unit.into(),
            num(tc.existing),
            num(tc.new.map_or(0.0, |c| x[c])),
            num(tc.retired.map_or(0.0, |c| x[c])),
            num(idx.capacity(tc, x)),
            num(idx.energy_capacity(tc, x)),
        ];
        let output = idx.annual(&tc.activity, x);
        let storage = matches!(tech.sector, Sector::PowerStorage | Sector::H2Storage | Sector::H2LiquidStorage);
        if power {
            power_cap.push(cap_row);
            power_gen.push(vec![zone.clone(), tech.name.clone(), num(output)]);
        } else {
            h2_cap.push(cap_row);
            if !storage {
                h2_prod.push(vec![zone.clone(), tech.name.clone(), tech.sector.as_str().into(), num(output)]);
            }
        }
        if storage {
            let peak = tc.state.iter().map(|&c| x[c]).fold(0.0, f64::max);
            let row = vec![zone, tech.name.clone(), num(idx.annual(&tc.charge, x)), num(output), num(peak)];
            if power {
                power_sto.push(row);
            } else {
                h2_sto.push(row);
            }
        }
    }
    table("power_capacity.csv", &cap_header, power_cap)?;
    table("power_generation.csv", &["zone", "technology", "annual_mwh"], power_gen)?;
    let sto_header = ["zone", "technology", "annual_charge", "annual_discharge", "peak_level"];
    table("power_storage.csv", &sto_header, power_sto)?;
    table("h2_capacity.csv", &cap_header, h2_cap)?;
    table("h2_production.csv", &["zone", "technology", "sector", "annual_t"], h2_prod)?;
    table("h2_storage.csv", &sto_header, h2_sto)?;

    let (mut lines, mut h2_links) = (Vec::new(), Vec::new());
    for ec in &idx.edges {
        let edge = &inst.edges[ec.edge];
        let new = ec.new.map_or(0.0, |c| x[c]);
        let row = vec![
            edge.name(),
            edge.kind.as_str().into(),
            edge.from_zone.clone(),
            edge.to_zone.clone(),
            num(edge.length_km),
            num(ec.existing),
            num(new),
            num(ec.existing + new),
            num(idx.annual(&ec.forward, x)),
            num(idx.annual(&ec.backward, x)),
        ];
        if edge.kind.is_power_line() {
            lines.push(row);
        } else {
            h2_links.push(row);
        }
    }
    let edge_header =
        ["edge", "kind", "from", "to", "length_km", "existing", "new", "total", "annual_forward", "annual_backward"];
    table("power_transmission.csv", &edge_header, lines)?;
    table("h2_transport.csv", &edge_header, h2_links)?;

    let mut rows = Vec::new();
    for (z, series) in prices.iter().enumerate() {
        for (t, p) in series.iter().enumerate() {
            if let Some(p) = p {
                rows.push(vec![
                    inst.zones[z].zone_id.clone(),
                    (t / HOURS_PER_DAY).to_string(),
                    (t % HOURS_PER_DAY).to_string(),
                    num(*p),
                ]);
            }
        }
    }
    table("prices.csv", &["zone", "period", "hour", "price_eur_mwh"], rows)?;

    let path = out_dir.join("zones.geojson");
    let doc = zones_geojson(model, inst, result);
    let text = serde_json::to_string_pretty(&doc).map_err(|source| AnalyticsError::Json { path: path.clone(), source })?;
    fs::write(&path, text + "\n").map_err(io::io_error(&path))?;
    written.push(path);
    Ok(written)
}

/// One point feature per zone with its hydrogen production and demand,
/// generation and load-weighted average electricity price.
pub fn zones_geojson(model: &BuiltModel, inst: &SystemInstance, result: &SolveResult<f64>) -> serde_json::Value {
    let x = &result.primal;
    let idx = &model.index;
    let generation = zonal_generation(model, inst, x);
    let (gas, liquid) = annual_h2_demand(model, inst);
    let prices = electricity_prices(model, result);
    let mut production = vec![0.0; inst.zones.len()];
    for tc in &idx.techs {
        if inst.technologies[tc.tech].sector == Sector::H2Production {
            production[tc.zone] += idx.annual(&tc.activity, x);
        }
    }
    let features: Vec<serde_json::Value> = inst
        .zones
        .iter()
        .enumerate()
        .map(|(z, zone)| {
            // Load-weighted where the zone has load, else time-weighted.
            let (mut num, mut den, mut tnum, mut tden) = (0.0, 0.0, 0.0, 0.0);
            for (t, p) in prices[z].iter().enumerate() {
                if let Some(p) = p {
                    let w = idx.weight_of_hour(t);
                    num += w * inst.electricity_demand[z][t] * p;
                    den += w * inst.electricity_demand[z][t];
                    tnum += w * p;
                    tden += w;
                }
            }
            let price = if den > 0.0 {
                num / den
            } else if tden > 0.0 {
                tnum / tden
            } else {
                0.0
            };
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [zone.lon, zone.lat] },
                "properties": {
                    "zone_id": zone.zone_id,
                    "h2_prod_t": clean(production[z]),
                    "h2_demand_t": clean(gas[z] + liquid[z]),
                    "elec_gen_mwh": clean(generation[z]),
                    "price_eur_mwh": clean(price),
                }
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}
