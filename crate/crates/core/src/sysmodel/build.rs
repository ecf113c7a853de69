//! LP assembly.
//!
//! Notation for the size formula: `T = 24 × periods`. A zone-technology pair
//! is *active* when the technology may sit in the zone under the scenario
//! and either has existing capacity or may expand; `x` is 1 when it may
//! expand and `e`, `e_E` are 1 when it has existing power or energy
//! capacity. The model then has
//!
//! | item | columns | rows |
//! |---|---|---|
//! | power, gas-to-power, production, liquefier | `x + e + T` | `T` |
//! | power storage | `2x + e + e_E + 3T` | `4T` |
//! | gas storage with compressor | `2x + e + e_E + 3T` | `3T` |
//! | gas storage without compressor, liquid storage | `x + e_E + 3T` | `2T` |
//! | line or pipeline | `n + 2T` | `2nT` |
//! | truck route | `n + 2T` | `T` |
//! | balances | | `T` per zone and carrier with participants |
//! | emissions cap | | 1 if finite and anything emits |
//!
//! where `n` is 1 when the edge may be expanded. Edges without capacity and
//! without expansion, and pairs that are not active, contribute nothing.

use std::collections::BTreeMap;

use serde::Serialize;

use super::instance::{EdgeKind, SystemInstance};
use super::scenario::ScenarioConfig;
use super::tech::{Sector, TechnologySpec, H2_LHV_MWH_PER_T};
use super::{annualize, ValidationError};
use crate::solver::{LinearProgram, RowSense, Sense};
use crate::tdr::HOURS_PER_DAY;

/// Objective categories. Every objective coefficient and constant carries
/// exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostCategory {
    PowerFixed,
    PowerVariable,
    PowerFuel,
    PowerStorageFixed,
    TransmissionFixed,
    GasToPowerFixed,
    GasToPowerVariable,
    H2ProductionFixed,
    H2ProductionVariable,
    H2Fuel,
    H2StorageFixed,
    H2PipelineFixed,
    LiquefactionFixed,
    LiquefactionVariable,
    TruckFixed,
    TruckOpex,
}

impl CostCategory {
    pub const ALL: [CostCategory; 16] = [
        CostCategory::PowerFixed,
        CostCategory::PowerVariable,
        CostCategory::PowerFuel,
        CostCategory::PowerStorageFixed,
        CostCategory::TransmissionFixed,
        CostCategory::GasToPowerFixed,
        CostCategory::GasToPowerVariable,
        CostCategory::H2ProductionFixed,
        CostCategory::H2ProductionVariable,
        CostCategory::H2Fuel,
        CostCategory::H2StorageFixed,
        CostCategory::H2PipelineFixed,
        CostCategory::LiquefactionFixed,
        CostCategory::LiquefactionVariable,
        CostCategory::TruckFixed,
        CostCategory::TruckOpex,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CostCategory::PowerFixed => "power_fixed",
            CostCategory::PowerVariable => "power_variable",
            CostCategory::PowerFuel => "power_fuel",
            CostCategory::PowerStorageFixed => "power_storage_fixed",
            CostCategory::TransmissionFixed => "transmission_fixed",
            CostCategory::GasToPowerFixed => "gas_to_power_fixed",
            CostCategory::GasToPowerVariable => "gas_to_power_variable",
            CostCategory::H2ProductionFixed => "h2_production_fixed",
            CostCategory::H2ProductionVariable => "h2_production_variable",
            CostCategory::H2Fuel => "h2_fuel",
            CostCategory::H2StorageFixed => "h2_storage_fixed",
            CostCategory::H2PipelineFixed => "h2_pipeline_fixed",
            CostCategory::LiquefactionFixed => "liquefaction_fixed",
            CostCategory::LiquefactionVariable => "liquefaction_variable",
            CostCategory::TruckFixed => "truck_fixed",
            CostCategory::TruckOpex => "truck_opex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionSector {
    Power,
    Hydrogen,
}

/// Electricity drawn by the hydrogen chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectricityUse {
    Electrolysis,
    Compression,
    Liquefaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTerm {
    /// `None` for a constant in the objective offset.
    pub col: Option<usize>,
    pub category: CostCategory,
    pub coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionTerm {
    pub col: usize,
    pub zone: usize,
    pub sector: EmissionSector,
    /// Tonnes per unit of the column, period weight included.
    pub coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectricityTerm {
    pub col: usize,
    pub zone: usize,
    pub hour: usize,
    pub kind: ElectricityUse,
    /// MWh per unit of the column in that hour.
    pub mwh: f64,
}

/// Columns of one active zone-technology pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TechColumns {
    pub zone: usize,
    pub tech: usize,
    pub existing: f64,
    pub existing_energy: f64,
    pub new: Option<usize>,
    pub retired: Option<usize>,
    pub new_energy: Option<usize>,
    pub retired_energy: Option<usize>,
    /// Output per hour: MWh, tonnes produced, tonnes fed to a liquefier, or
    /// storage discharge.
    pub activity: Vec<usize>,
    pub charge: Vec<usize>,
    pub state: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeColumns {
    pub edge: usize,
    pub from: usize,
    pub to: usize,
    pub existing: f64,
    pub new: Option<usize>,
    pub forward: Vec<usize>,
    pub backward: Vec<usize>,
    /// Fraction of what leaves that arrives.
    pub delivered: f64,
}

/// Maps model quantities to LP columns and rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelIndex {
    pub hours: usize,
    pub period_weights: Vec<f64>,
    pub techs: Vec<TechColumns>,
    pub edges: Vec<EdgeColumns>,
    /// `[zone][t]`.
    pub power_balance: Vec<Vec<Option<usize>>>,
    pub gas_balance: Vec<Vec<Option<usize>>>,
    pub liquid_balance: Vec<Vec<Option<usize>>>,
    pub emissions_cap: Option<usize>,
    pub cost_terms: Vec<CostTerm>,
    pub emission_terms: Vec<EmissionTerm>,
    pub electricity_terms: Vec<ElectricityTerm>,
    /// Liquid demand was modelled.
    pub liquid_chain: bool,
}

impl ModelIndex {
    pub fn weight_of_hour(&self, t: usize) -> f64 {
        self.period_weights[t / HOURS_PER_DAY]
    }

    /// Annual total of an hourly column set.
    pub fn annual(&self, cols: &[usize], x: &[f64]) -> f64 {
        cols.iter().enumerate().map(|(t, &c)| self.weight_of_hour(t) * x[c]).sum()
    }

    pub fn capacity(&self, tc: &TechColumns, x: &[f64]) -> f64 {
        tc.existing + tc.new.map_or(0.0, |c| x[c]) - tc.retired.map_or(0.0, |c| x[c])
    }

    pub fn energy_capacity(&self, tc: &TechColumns, x: &[f64]) -> f64 {
        tc.existing_energy + tc.new_energy.map_or(0.0, |c| x[c]) - tc.retired_energy.map_or(0.0, |c| x[c])
    }

    pub fn cost_by_category(&self, x: &[f64]) -> BTreeMap<CostCategory, f64> {
        let mut out: BTreeMap<CostCategory, f64> = CostCategory::ALL.iter().map(|&c| (c, 0.0)).collect();
        for t in &self.cost_terms {
            *out.get_mut(&t.category).expect("all categories present") += t.coef * t.col.map_or(1.0, |c| x[c]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltModel {
    pub lp: LinearProgram<f64>,
    pub index: ModelIndex,
}

/// Exact LP dimensions predicted from the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSize {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy)]
struct TechPlan {
    existing: f64,
    existing_energy: f64,
    max_new: f64,
    expand: bool,
}

fn liquid_chain_on(inst: &SystemInstance, sc: &ScenarioConfig) -> bool {
    sc.aviation_demand_on && inst.h2_liquid_demand.iter().flatten().any(|&v| v > 0.0)
}

fn plan_tech(inst: &SystemInstance, sc: &ScenarioConfig, zone: usize, tech: &TechnologySpec, liquid: bool) -> Option<TechPlan> {
    let zid = &inst.zones[zone].zone_id;
    if !tech.sector.is_zonal() || !tech.allowed_in(zid) {
        return None;
    }
    if tech.capture() > 0.0 && (!sc.ccs_allowed || !sc.ccs_zone_whitelist.iter().any(|z| z == zid)) {
        return None;
    }
    if tech.sector.is_liquid_chain() && !liquid {
        return None;
    }
    if tech.variable && !inst.capacity_factor(zid, &tech.name).is_some_and(|cf| cf.iter().any(|&v| v > 0.0)) {
        return None;
    }
    let ex = inst.existing_for(zid, &tech.name);
    let existing = ex.map_or(0.0, |e| e.capacity);
    let existing_energy = ex.and_then(|e| e.energy_capacity).unwrap_or(0.0);
    let max_new = ex.and_then(|e| e.max_new).unwrap_or(f64::INFINITY);
    let nuclear_ok = !tech.is_nuclear() || (sc.nuclear_expansion && existing > 0.0);
    let expand = tech.expandable && nuclear_ok && max_new > 0.0;
    let has_any = match tech.sector {
        Sector::H2LiquidStorage => existing_energy > 0.0,
        Sector::PowerStorage | Sector::H2Storage => existing > 0.0 || existing_energy > 0.0,
        _ => existing > 0.0,
    };
    (has_any || expand).then_some(TechPlan { existing, existing_energy, max_new, expand })
}

/// Whether a storage technology has a power or compressor capacity.
fn has_charge_capacity(tech: &TechnologySpec) -> bool {
    tech.sector == Sector::PowerStorage || (tech.sector == Sector::H2Storage && tech.compressor_capex.is_some())
}

#[derive(Debug, Clone, Copy)]
struct EdgePlan {
    expand: bool,
    max_new: f64,
}

fn plan_edge(inst: &SystemInstance, sc: &ScenarioConfig, e: usize, liquid: bool) -> Option<EdgePlan> {
    let edge = &inst.edges[e];
    let max = edge.max_expansion.unwrap_or(f64::INFINITY);
    let (allowed, max_new) = match edge.kind {
        EdgeKind::Hvac | EdgeKind::Hvdc => (true, max.min(sc.line_max_expansion_mw)),
        EdgeKind::Pipeline => (sc.pipelines_allowed, max),
        EdgeKind::TruckRoute => {
            if !(sc.trucks_allowed && liquid && edge.length_km <= sc.truck_max_route_km) {
                return None;
            }
            (true, max)
        }
    };
    let expand = allowed && max_new > 0.0;
    (expand || edge.existing_capacity > 0.0).then_some(EdgePlan { expand, max_new })
}

/// Row and column counts of the LP `build_lp` will return.
pub fn predict_size(inst: &SystemInstance, sc: &ScenarioConfig) -> ModelSize {
    let t = inst.num_hours();
    let liquid = liquid_chain_on(inst, sc);
    let (mut rows, mut cols) = (0, 0);
    let b = |v: bool| v as usize;
    let nz = inst.zones.len();
    let (mut power, mut gas, mut liq) = (vec![false; nz], vec![false; nz], vec![false; nz]);
    let mut emits = false;
    for z in 0..nz {
        power[z] |= inst.electricity_demand[z].iter().any(|&v| v > 0.0);
        gas[z] |= inst.h2_gas_demand[z].iter().any(|&v| v > 0.0);
        liq[z] |= liquid && inst.h2_liquid_demand[z].iter().any(|&v| v > 0.0);
        for tech in &inst.technologies {
            let Some(p) = plan_tech(inst, sc, z, tech, liquid) else { continue };
            let (x, e, e_energy) = (b(p.expand), b(p.existing > 0.0), b(p.existing_energy > 0.0));
            match tech.sector {
                Sector::PowerStorage => {
                    cols += 2 * x + e + e_energy + 3 * t;
                    rows += 4 * t;
                    power[z] = true;
                }
                Sector::H2Storage if has_charge_capacity(tech) => {
                    cols += 2 * x + e + e_energy + 3 * t;
                    rows += 3 * t;
                    gas[z] = true;
                    power[z] |= tech.electricity_use.is_some_and(|u| u > 0.0);
                }
                Sector::H2Storage | Sector::H2LiquidStorage => {
                    cols += x + e_energy + 3 * t;
                    rows += 2 * t;
                    if tech.sector == Sector::H2Storage {
                        gas[z] = true;
                        power[z] |= tech.electricity_use.is_some_and(|u| u > 0.0);
                    } else {
                        liq[z] = true;
                    }
                }
                _ => {
                    cols += x + e + t;
                    rows += t;
                    match tech.sector {
                        Sector::Power => power[z] = true,
                        Sector::H2GasToPower => {
                            power[z] = true;
                            gas[z] = true;
                        }
                        Sector::H2Production => {
                            gas[z] = true;
                            power[z] |= tech.electricity_per_t() > 0.0;
                        }
                        Sector::Liquefier => {
                            gas[z] = true;
                            liq[z] = true;
                            power[z] |= tech.electricity_per_t() > 0.0;
                        }
                        _ => {}
                    }
                    emits |= emission_rate(inst, tech) > 0.0;
                }
            }
        }
    }
    for (e, edge) in inst.edges.iter().enumerate() {
        let Some(p) = plan_edge(inst, sc, e, liquid) else { continue };
        let (f, to) = (inst.zone_index(&edge.from_zone).unwrap(), inst.zone_index(&edge.to_zone).unwrap());
        cols += b(p.expand) + 2 * t;
        match edge.kind {
            EdgeKind::TruckRoute => {
                rows += t;
                liq[f] = true;
                liq[to] = true;
            }
            kind => {
                rows += 2 * b(p.expand) * t;
                let flags = if kind == EdgeKind::Pipeline { &mut gas } else { &mut power };
                flags[f] = true;
                flags[to] = true;
                if kind == EdgeKind::Pipeline && pipeline_electricity(inst) > 0.0 {
                    power[f] = true;
                    power[to] = true;
                }
            }
        }
    }
    rows += t * (power.iter().filter(|&&v| v).count() + gas.iter().filter(|&&v| v).count() + liq.iter().filter(|&&v| v).count());
    rows += b(sc.emissions_cap.is_finite() && emits);
    ModelSize { rows, cols }
}

/// Tonnes of CO₂ per unit of activity.
fn emission_rate(inst: &SystemInstance, tech: &TechnologySpec) -> f64 {
    let burn = tech.fuel_per_unit();
    if burn == 0.0 {
        return 0.0;
    }
    let intensity = tech
        .co2_intensity
        .or_else(|| tech.fuel.as_deref().and_then(|f| inst.fuel(f)).map(|f| f.co2_t_per_mmbtu))
        .unwrap_or(0.0);
    burn * intensity * (1.0 - tech.capture())
}

fn fuel_cost(inst: &SystemInstance, tech: &TechnologySpec) -> f64 {
    let burn = tech.fuel_per_unit();
    if burn == 0.0 {
        return 0.0;
    }
    burn * tech.fuel.as_deref().and_then(|f| inst.fuel(f)).map_or(0.0, |f| f.price_eur_per_mmbtu)
}

fn pipeline_electricity(inst: &SystemInstance) -> f64 {
    inst.edge_technology(EdgeKind::Pipeline).and_then(|t| t.electricity_use).unwrap_or(0.0)
}

/// Annual cost of one t/h of pipeline capacity on an edge of `length_km`.
pub fn pipeline_cost_per_tph(tech: &TechnologySpec, length_km: f64, rate: f64) -> f64 {
    let unit = tech.unit_capacity.unwrap_or(1.0);
    let pipe = annualize(tech.capex.unwrap_or(0.0) * length_km / unit, tech.lifetime, rate);
    let comp_life = tech.compressor_lifetime.unwrap_or(tech.lifetime);
    let comp = annualize(tech.compressor_capex.unwrap_or(0.0), comp_life, rate);
    let booster = annualize(tech.booster_capex.unwrap_or(0.0), tech.lifetime, rate);
    pipe + comp + booster + tech.fom.unwrap_or(0.0)
}

struct PendingRow {
    name: String,
    sense: RowSense,
    rhs: f64,
    terms: Vec<(usize, f64)>,
}

struct Builder {
    lp: LinearProgram<f64>,
    rows: Vec<PendingRow>,
    index: ModelIndex,
}

impl Builder {
    fn col(&mut self, name: String, upper: f64) -> usize {
        self.lp.add_column(name, 0.0, 0.0, upper)
    }

    fn cost(&mut self, col: usize, category: CostCategory, coef: f64) {
        if coef != 0.0 {
            self.lp.columns[col].cost += coef;
            self.index.cost_terms.push(CostTerm { col: Some(col), category, coef });
        }
    }

    fn constant(&mut self, category: CostCategory, value: f64) {
        if value != 0.0 {
            self.lp.objective_offset += value;
            self.index.cost_terms.push(CostTerm { col: None, category, coef: value });
        }
    }

    fn row(&mut self, name: String, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(PendingRow { name, sense, rhs, terms: Vec::new() });
        self.rows.len() - 1
    }

    fn add(&mut self, row: usize, col: usize, v: f64) {
        if v != 0.0 {
            self.rows[row].terms.push((col, v));
        }
    }
}

/// Builds the capacity-expansion LP for `inst` under `sc`.
pub fn build_lp(inst: &SystemInstance, sc: &ScenarioConfig) -> Result<BuiltModel, ValidationError> {
    inst.validate()?;
    let mut problems = Vec::new();
    let t_len = inst.num_hours();
    let nz = inst.zones.len();
    let rate = inst.discount_rate;
    let liquid = liquid_chain_on(inst, sc);
    let mut b = Builder {
        lp: LinearProgram::new(format!("h2plan_{}", sanitize(&sc.name)), Sense::Minimize),
        rows: Vec::new(),
        index: ModelIndex { hours: t_len, period_weights: inst.period_weights.clone(), liquid_chain: liquid, ..Default::default() },
    };
    let hour_tag = |t: usize| format!("p{}_h{}", t / HOURS_PER_DAY, t % HOURS_PER_DAY);
    let weight = |t: usize| inst.period_weights[t / HOURS_PER_DAY];

    // Balance rows come first; empty ones are dropped at the end.
    let balance = |b: &mut Builder, prefix: &str, demand: &[Vec<f64>], on: bool| -> Vec<Vec<usize>> {
        (0..nz)
            .map(|z| {
                (0..t_len)
                    .map(|t| {
                        let rhs = if on { demand[z][t] } else { 0.0 };
                        b.row(format!("{prefix}_{}_{}", inst.zones[z].zone_id, hour_tag(t)), RowSense::Eq, rhs)
                    })
                    .collect()
            })
            .collect()
    };
    let power_rows = balance(&mut b, "power", &inst.electricity_demand, true);
    let gas_rows = balance(&mut b, "h2gas", &inst.h2_gas_demand, true);
    let liquid_rows = balance(&mut b, "h2liq", &inst.h2_liquid_demand, liquid);
    let mut emission_cols: Vec<(usize, f64)> = Vec::new();

    for z in 0..nz {
        let zid = inst.zones[z].zone_id.clone();
        for (ti, tech) in inst.technologies.iter().enumerate() {
            let Some(plan) = plan_tech(inst, sc, z, tech, liquid) else { continue };
            let tag = format!("{zid}_{}", tech.name);
            let mut tc = TechColumns {
                zone: z,
                tech: ti,
                existing: plan.existing,
                existing_energy: plan.existing_energy,
                ..Default::default()
            };
            let capex = tech.capex.unwrap_or(0.0);
            let fom = tech.fom.unwrap_or(0.0);
            let vom = tech.vom.unwrap_or(0.0);
            // Annual cost per unit of new capacity and FOM per unit of
            // existing capacity.
            let (unit_fixed, unit_fom, fixed_cat) = match tech.sector {
                Sector::Power => (annualize(capex * 1e3, tech.lifetime, rate) + fom, fom, CostCategory::PowerFixed),
                Sector::H2GasToPower => {
                    (annualize(capex * 1e3, tech.lifetime, rate) + fom, fom, CostCategory::GasToPowerFixed)
                }
                Sector::PowerStorage => {
                    (annualize(capex * 1e3, tech.lifetime, rate) + fom, fom, CostCategory::PowerStorageFixed)
                }
                Sector::H2Production | Sector::Liquefier => {
                    let per_tph = 1e3 * H2_LHV_MWH_PER_T;
                    let cat = if tech.sector == Sector::Liquefier {
                        CostCategory::LiquefactionFixed
                    } else {
                        CostCategory::H2ProductionFixed
                    };
                    ((annualize(capex, tech.lifetime, rate) + fom) * per_tph, fom * per_tph, cat)
                }
                Sector::H2Storage => {
                    let life = tech.compressor_lifetime.unwrap_or(tech.lifetime);
                    (annualize(tech.compressor_capex.unwrap_or(0.0), life, rate), 0.0, CostCategory::H2StorageFixed)
                }
                Sector::H2LiquidStorage => (0.0, 0.0, CostCategory::H2StorageFixed),
                Sector::H2Pipeline | Sector::H2Truck => unreachable!("not zonal"),
            };
            let is_storage = matches!(tech.sector, Sector::PowerStorage | Sector::H2Storage | Sector::H2LiquidStorage);
            let power_cap = !is_storage || has_charge_capacity(tech);

            if power_cap {
                if plan.expand {
                    let c = b.col(format!("new_{tag}"), plan.max_new);
                    b.cost(c, fixed_cat, unit_fixed);
                    tc.new = Some(c);
                }
                if plan.existing > 0.0 {
                    let c = b.col(format!("retire_{tag}"), plan.existing);
                    b.cost(c, fixed_cat, -unit_fom);
                    b.constant(fixed_cat, unit_fom * plan.existing);
                    tc.retired = Some(c);
                }
            }
            if is_storage {
                let per_unit = if tech.sector == Sector::PowerStorage { 1e3 } else { 1.0 };
                let fom_e = tech.fom_energy.unwrap_or(0.0);
                let unit_e = annualize(tech.capex_energy.unwrap_or(0.0) * per_unit, tech.lifetime, rate) + fom_e;
                if plan.expand {
                    let c = b.col(format!("newenergy_{tag}"), f64::INFINITY);
                    b.cost(c, fixed_cat, unit_e);
                    tc.new_energy = Some(c);
                }
                if plan.existing_energy > 0.0 {
                    let c = b.col(format!("retireenergy_{tag}"), plan.existing_energy);
                    b.cost(c, fixed_cat, -fom_e);
                    b.constant(fixed_cat, fom_e * plan.existing_energy);
                    tc.retired_energy = Some(c);
                }
            }

            let cf = inst.capacity_factor(&zid, &tech.name);
            if tech.variable && cf.is_none() {
                problems.push(format!("variable technology `{}` in zone `{zid}` has no capacity factors", tech.name));
                continue;
            }
            let emit = emission_rate(inst, tech);
            let fuel = fuel_cost(inst, tech);
            let e_use = tech.electricity_per_t();

            if is_storage {
                let (bal, eff, loss, use_kind) = match tech.sector {
                    Sector::PowerStorage => {
                        (&power_rows, tech.efficiency.unwrap_or(1.0).sqrt(), 0.0, None)
                    }
                    Sector::H2Storage => (&gas_rows, 1.0, tech.boil_off.unwrap_or(0.0), Some(ElectricityUse::Compression)),
                    _ => (&liquid_rows, 1.0, tech.boil_off.unwrap_or(0.0), None),
                };
                for t in 0..t_len {
                    let h = hour_tag(t);
                    let c = b.col(format!("charge_{tag}_{h}"), f64::INFINITY);
                    let d = b.col(format!("discharge_{tag}_{h}"), f64::INFINITY);
                    let s = b.col(format!("level_{tag}_{h}"), f64::INFINITY);
                    let var_cat = if tech.sector == Sector::PowerStorage {
                        CostCategory::PowerVariable
                    } else {
                        CostCategory::H2ProductionVariable
                    };
                    b.cost(d, var_cat, weight(t) * vom);
                    b.add(bal[z][t], d, 1.0);
                    b.add(bal[z][t], c, -1.0);
                    if let Some(kind) = use_kind {
                        let mwh = tech.electricity_use.unwrap_or(0.0);
                        b.add(power_rows[z][t], c, -mwh);
                        if mwh > 0.0 {
                            b.index.electricity_terms.push(ElectricityTerm { col: c, zone: z, hour: t, kind, mwh });
                        }
                    }
                    tc.charge.push(c);
                    tc.activity.push(d);
                    tc.state.push(s);
                }
                for t in 0..t_len {
                    let h = hour_tag(t);
                    let prev = if t % HOURS_PER_DAY == 0 { t + HOURS_PER_DAY - 1 } else { t - 1 };
                    let r = b.row(format!("level_{tag}_{h}"), RowSense::Eq, 0.0);
                    b.add(r, tc.state[t], 1.0);
                    b.add(r, tc.state[prev], -(1.0 - loss));
                    b.add(r, tc.charge[t], -eff);
                    b.add(r, tc.activity[t], 1.0 / eff);
                    let r = b.row(format!("maxlevel_{tag}_{h}"), RowSense::Le, plan.existing_energy);
                    b.add(r, tc.state[t], 1.0);
                    if let Some(c) = tc.new_energy {
                        b.add(r, c, -1.0);
                    }
                    if let Some(c) = tc.retired_energy {
                        b.add(r, c, 1.0);
                    }
                    if power_cap {
                        let limited: &[(&str, usize)] = if tech.sector == Sector::PowerStorage {
                            &[("maxcharge", tc.charge[t]), ("maxdischarge", tc.activity[t])]
                        } else {
                            &[("maxcharge", tc.charge[t])]
                        };
                        for &(label, col) in limited {
                            let r = b.row(format!("{label}_{tag}_{h}"), RowSense::Le, plan.existing);
                            b.add(r, col, 1.0);
                            if let Some(c) = tc.new {
                                b.add(r, c, -1.0);
                            }
                            if let Some(c) = tc.retired {
                                b.add(r, c, 1.0);
                            }
                        }
                    }
                }
            } else {
                for t in 0..t_len {
                    let h = hour_tag(t);
                    let a = b.col(format!("run_{tag}_{h}"), f64::INFINITY);
                    let w = weight(t);
                    match tech.sector {
                        Sector::Power => {
                            b.cost(a, CostCategory::PowerVariable, w * vom);
                            b.cost(a, CostCategory::PowerFuel, w * fuel);
                            b.add(power_rows[z][t], a, 1.0);
                        }
                        Sector::H2GasToPower => {
                            b.cost(a, CostCategory::GasToPowerVariable, w * vom);
                            b.add(power_rows[z][t], a, 1.0);
                            b.add(gas_rows[z][t], a, -tech.h2_per_mwh());
                        }
                        Sector::H2Production => {
                            b.cost(a, CostCategory::H2ProductionVariable, w * vom * H2_LHV_MWH_PER_T);
                            b.cost(a, CostCategory::H2Fuel, w * fuel);
                            b.add(gas_rows[z][t], a, 1.0);
                            b.add(power_rows[z][t], a, -e_use);
                            if e_use > 0.0 {
                                let kind = if tech.fuel.is_none() { ElectricityUse::Electrolysis } else { ElectricityUse::Compression };
                                b.index.electricity_terms.push(ElectricityTerm { col: a, zone: z, hour: t, kind, mwh: e_use });
                            }
                        }
                        Sector::Liquefier => {
                            b.cost(a, CostCategory::LiquefactionVariable, w * vom * H2_LHV_MWH_PER_T);
                            b.add(gas_rows[z][t], a, -1.0);
                            b.add(liquid_rows[z][t], a, 1.0 - tech.boil_off.unwrap_or(0.0));
                            b.add(power_rows[z][t], a, -e_use);
                            if e_use > 0.0 {
                                b.index.electricity_terms.push(ElectricityTerm {
                                    col: a,
                                    zone: z,
                                    hour: t,
                                    kind: ElectricityUse::Liquefaction,
                                    mwh: e_use,
                                });
                            }
                        }
                        _ => unreachable!("storage handled above"),
                    }
                    if emit > 0.0 {
                        let sector = if tech.sector == Sector::H2Production { EmissionSector::Hydrogen } else { EmissionSector::Power };
                        b.index.emission_terms.push(EmissionTerm { col: a, zone: z, sector, coef: w * emit });
                        emission_cols.push((a, w * emit));
                    }
                    let avail = cf.map_or(1.0, |s| s[t]);
                    let r = b.row(format!("maxrun_{tag}_{h}"), RowSense::Le, avail * plan.existing);
                    b.add(r, a, 1.0);
                    if let Some(c) = tc.new {
                        b.add(r, c, -avail);
                    }
                    if let Some(c) = tc.retired {
                        b.add(r, c, avail);
                    }
                    tc.activity.push(a);
                }
            }
            b.index.techs.push(tc);
        }
    }

    let pipe_elec = pipeline_electricity(inst);
    for (ei, edge) in inst.edges.iter().enumerate() {
        let Some(plan) = plan_edge(inst, sc, ei, liquid) else { continue };
        let from = inst.zone_index(&edge.from_zone).expect("validated");
        let to = inst.zone_index(&edge.to_zone).expect("validated");
        let tag = edge.name();
        let mut ec = EdgeColumns {
            edge: ei,
            from,
            to,
            existing: edge.existing_capacity,
            new: None,
            forward: Vec::new(),
            backward: Vec::new(),
            delivered: 1.0,
        };
        match edge.kind {
            EdgeKind::Hvac | EdgeKind::Hvdc | EdgeKind::Pipeline => {
                let is_line = edge.kind.is_power_line();
                ec.delivered = 1.0 - edge.loss_or_fuel_use.unwrap_or(0.0) / 100.0 * edge.length_km / 100.0;
                if plan.expand {
                    let c = b.col(format!("new_{tag}"), plan.max_new);
                    let (cat, unit) = if is_line {
                        (CostCategory::TransmissionFixed, edge.cost_per_unit.unwrap_or(0.0) * edge.length_km)
                    } else {
                        let tech = inst.edge_technology(EdgeKind::Pipeline).expect("validated");
                        (
                            CostCategory::H2PipelineFixed,
                            edge.cost_per_unit.unwrap_or_else(|| pipeline_cost_per_tph(tech, edge.length_km, rate)),
                        )
                    };
                    b.cost(c, cat, unit);
                    ec.new = Some(c);
                }
                let bal = if is_line { &power_rows } else { &gas_rows };
                let upper = if plan.expand { f64::INFINITY } else { edge.existing_capacity };
                for t in 0..t_len {
                    let h = hour_tag(t);
                    for (dir, (src, dst)) in [("fwd", (from, to)), ("bwd", (to, from))] {
                        let f = b.col(format!("flow_{tag}_{dir}_{h}"), upper);
                        b.add(bal[src][t], f, -1.0);
                        b.add(bal[dst][t], f, ec.delivered);
                        if !is_line && pipe_elec > 0.0 {
                            b.add(power_rows[src][t], f, -pipe_elec);
                            b.index.electricity_terms.push(ElectricityTerm {
                                col: f,
                                zone: src,
                                hour: t,
                                kind: ElectricityUse::Compression,
                                mwh: pipe_elec,
                            });
                        }
                        if let Some(c) = ec.new {
                            let r = b.row(format!("maxflow_{tag}_{dir}_{h}"), RowSense::Le, edge.existing_capacity);
                            b.add(r, f, 1.0);
                            b.add(r, c, -1.0);
                        }
                        if dir == "fwd" {
                            ec.forward.push(f);
                        } else {
                            ec.backward.push(f);
                        }
                    }
                }
            }
            EdgeKind::TruckRoute => {
                let tech = inst.edge_technology(EdgeKind::TruckRoute).expect("validated");
                let cap = tech.unit_capacity.expect("validated");
                let trip_km = 2.0 * edge.length_km;
                let trip_hours = trip_km / tech.speed_kmh.expect("validated");
                let fuel_kg_km = edge.loss_or_fuel_use.or(tech.fuel_use_kg_per_km).unwrap_or(0.0);
                ec.delivered = 1.0 - fuel_kg_km * trip_km / (cap * 1e3);
                if ec.delivered <= 0.0 {
                    problems.push(format!("truck route `{tag}` burns its whole load"));
                    continue;
                }
                if plan.expand {
                    let c = b.col(format!("new_{tag}"), plan.max_new);
                    let unit = edge.cost_per_unit.unwrap_or_else(|| {
                        annualize(tech.capex.unwrap_or(0.0), tech.lifetime, rate) + tech.fom.unwrap_or(0.0)
                    });
                    b.cost(c, CostCategory::TruckFixed, unit);
                    ec.new = Some(c);
                }
                let opex_per_t = tech.opex_per_km.unwrap_or(0.0) * trip_km / cap;
                for t in 0..t_len {
                    let h = hour_tag(t);
                    let r = b.row(format!("fleet_{tag}_{h}"), RowSense::Le, cap * edge.existing_capacity);
                    for (dir, (src, dst)) in [("fwd", (from, to)), ("bwd", (to, from))] {
                        let f = b.col(format!("haul_{tag}_{dir}_{h}"), f64::INFINITY);
                        b.cost(f, CostCategory::TruckOpex, weight(t) * opex_per_t);
                        b.add(liquid_rows[src][t], f, -1.0);
                        b.add(liquid_rows[dst][t], f, ec.delivered);
                        b.add(r, f, trip_hours);
                        if dir == "fwd" {
                            ec.forward.push(f);
                        } else {
                            ec.backward.push(f);
                        }
                    }
                    if let Some(c) = ec.new {
                        b.add(r, c, -cap);
                    }
                }
            }
        }
        b.index.edges.push(ec);
    }

    let cap_row = if sc.emissions_cap.is_finite() && !emission_cols.is_empty() {
        let r = b.row("co2_cap".into(), RowSense::Le, sc.emissions_cap);
        for &(c, v) in &emission_cols {
            b.add(r, c, v);
        }
        Some(r)
    } else {
        None
    };

    // Drop empty rows; an empty row that cannot hold is a data defect.
    let mut final_row = vec![None; b.rows.len()];
    let mut entries = Vec::new();
    for (i, row) in std::mem::take(&mut b.rows).into_iter().enumerate() {
        let mut terms = row.terms;
        terms.sort_by_key(|&(c, _)| c);
        terms.dedup_by(|a, keep| {
            if a.0 == keep.0 {
                keep.1 += a.1;
                true
            } else {
                false
            }
        });
        terms.retain(|&(_, v)| v != 0.0);
        if terms.is_empty() {
            let holds = match row.sense {
                RowSense::Eq => row.rhs == 0.0,
                RowSense::Le => row.rhs >= 0.0,
                RowSense::Ge => row.rhs <= 0.0,
            };
            if !holds {
                problems.push(format!("row `{}` needs {} but nothing can serve it", row.name, row.rhs));
            }
            continue;
        }
        let r = b.lp.add_row(row.name, row.sense, row.rhs);
        final_row[i] = Some(r);
        entries.extend(terms.into_iter().map(|(c, v)| (r, c, v)));
    }
    b.lp.entries = entries;

    let mut used = vec![false; b.lp.num_cols()];
    for &(_, c, _) in &b.lp.entries {
        used[c] = true;
    }
    for (c, u) in used.iter().enumerate() {
        if !u {
            problems.push(format!("column `{}` has no constraint entries", b.lp.columns[c].name));
        }
    }
    if let Err(e) = b.lp.validate() {
        problems.push(e.to_string());
    }
    if !problems.is_empty() {
        return Err(ValidationError { problems });
    }

    let remap = |rows: &[Vec<usize>]| -> Vec<Vec<Option<usize>>> {
        rows.iter().map(|zr| zr.iter().map(|&r| final_row[r]).collect()).collect()
    };
    b.index.power_balance = remap(&power_rows);
    b.index.gas_balance = remap(&gas_rows);
    b.index.liquid_balance = remap(&liquid_rows);
    b.index.emissions_cap = cap_row.and_then(|r| final_row[r]);
    Ok(BuiltModel { lp: b.lp, index: b.index })
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}
