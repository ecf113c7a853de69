//! Aviation and base hydrogen demand plus electricity load, as zonal hourly
//! profiles over a 365-day year.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{self, DataError, SeriesTable, DAYS_PER_YEAR, HOURS_PER_YEAR};

pub const JET_FUEL_MJ_PER_KG: f64 = 44.0;
pub const H2_MJ_PER_KG: f64 = 120.0;
/// Extra hydrogen for heavier hydrogen aircraft.
pub const HEAVIER_AIRCRAFT_ALLOWANCE: f64 = 1.10;
pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const ALLOCATION_CUTOFF_KM: f64 = 231.0;
/// Flights must be strictly shorter than this.
pub const MAX_FLIGHT_DISTANCE_NMI: f64 = 1000.0;
pub const MAX_SEATS: u32 = 220;

#[derive(Debug, Error)]
pub enum DemandError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("airport `{airport}` used by a flight has no allocation")]
    MissingAllocation { airport: String },
    #[error("no demand data for country `{country}`")]
    MissingCountry { country: String },
    #[error("zone `{zone}` has no electricity load column")]
    MissingLoad { zone: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub origin_airport: String,
    pub dest_airport: String,
    pub distance_nmi: f64,
    pub seats: u32,
    pub departures_per_day: f64,
    pub fuel_burn_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Airport {
    pub code: String,
    pub lat: f64,
    pub lon: f64,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub zone_id: String,
    pub lat: f64,
    pub lon: f64,
    pub country: String,
}

/// National loads and hydrogen demand, in the units of the published
/// country tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryDemand {
    pub country: String,
    pub current_load_twh: f64,
    /// Target-year electricity load.
    pub load_2040_twh: f64,
    pub base_h2_mt: f64,
    /// Published aviation demand, kept for comparison only.
    #[serde(default)]
    pub aviation_h2_mt: Option<f64>,
}

impl CountryDemand {
    pub fn new(country: impl Into<String>, electricity_mwh: f64, base_h2_t: f64) -> Self {
        Self {
            country: country.into(),
            current_load_twh: electricity_mwh / 1e6,
            load_2040_twh: electricity_mwh / 1e6,
            base_h2_mt: base_h2_t / 1e6,
            aviation_h2_mt: None,
        }
    }

    pub fn electricity_mwh(&self) -> f64 {
        self.load_2040_twh * 1e6
    }

    pub fn base_h2_t(&self) -> f64 {
        self.base_h2_mt * 1e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carrier {
    Electricity,
    H2Gas,
    H2Liquid,
}

impl Carrier {
    pub const ALL: [Carrier; 3] = [Carrier::Electricity, Carrier::H2Gas, Carrier::H2Liquid];

    pub fn as_str(self) -> &'static str {
        match self {
            Carrier::Electricity => "electricity",
            Carrier::H2Gas => "h2_gas",
            Carrier::H2Liquid => "h2_liquid",
        }
    }
}

/// Hourly demand of one carrier in one zone: MWh for electricity, tonnes
/// for hydrogen.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    pub zone_id: String,
    pub carrier: Carrier,
    pub series: Vec<f64>,
}

/// Seasonal split of base hydrogen demand. Day indices are zero-based in a
/// 365-day year and inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonSplit {
    pub summer_first_day: usize,
    pub summer_last_day: usize,
    pub summer_share: f64,
}

impl Default for SeasonSplit {
    /// May to October carry 45% of the annual mass.
    fn default() -> Self {
        Self { summer_first_day: 120, summer_last_day: 303, summer_share: 0.45 }
    }
}

impl SeasonSplit {
    pub fn is_summer_day(&self, day: usize) -> bool {
        (self.summer_first_day..=self.summer_last_day).contains(&day)
    }

    pub fn summer_hours(&self) -> usize {
        (0..DAYS_PER_YEAR).filter(|&d| self.is_summer_day(d)).count() * 24
    }

    fn validate(&self) -> Result<(), DemandError> {
        let hs = self.summer_hours();
        if hs == 0 || hs == HOURS_PER_YEAR || !(0.0..=1.0).contains(&self.summer_share) {
            return Err(DemandError::Invalid("season split needs days in both seasons and a share in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Keeps flights shorter than 1000 nmi, with at most 220 seats, departing
/// from one of `countries`. Order is preserved.
pub fn filter_flights(records: &[FlightRecord], airports: &[Airport], countries: &[String]) -> Vec<FlightRecord> {
    let country_of: HashMap<&str, &str> = airports.iter().map(|a| (a.code.as_str(), a.country.as_str())).collect();
    records
        .iter()
        .filter(|r| {
            r.distance_nmi < MAX_FLIGHT_DISTANCE_NMI
                && r.seats <= MAX_SEATS
                && country_of
                    .get(r.origin_airport.as_str())
                    .is_some_and(|c| countries.iter().any(|k| k == c))
        })
        .cloned()
        .collect()
}

/// Hydrogen mass (kg) carrying the same energy as `fuel_energy_mj` of jet
/// fuel, plus the heavier-aircraft allowance.
pub fn jet_fuel_to_h2(fuel_energy_mj: f64) -> f64 {
    fuel_energy_mj / H2_MJ_PER_KG * HEAVIER_AIRCRAFT_ALLOWANCE
}

pub fn jet_fuel_energy_mj(fuel_kg: f64) -> f64 {
    fuel_kg * JET_FUEL_MJ_PER_KG
}

/// Synthetic fuel burn for fixtures without measured burn data:
/// `distance × seats × kg_per_seat_nmi`.
pub fn synthetic_fuel_burn_kg(distance_nmi: f64, seats: u32, kg_per_seat_nmi: f64) -> f64 {
    distance_nmi * seats as f64 * kg_per_seat_nmi
}

/// Great-circle distance on a sphere of radius 6371 km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationEntry {
    pub airport: String,
    /// Nearest zone, reported even when out of scope.
    pub zone: String,
    pub km: f64,
    pub in_scope: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub entries: Vec<AllocationEntry>,
}

impl Allocation {
    pub fn get(&self, airport: &str) -> Option<&AllocationEntry> {
        self.entries.iter().find(|e| e.airport == airport)
    }

    /// Distance quantile (nearest rank) over in-scope airports.
    pub fn distance_quantile(&self, q: f64) -> Option<f64> {
        let mut d: Vec<f64> = self.entries.iter().filter(|e| e.in_scope).map(|e| e.km).collect();
        if d.is_empty() {
            return None;
        }
        d.sort_by(f64::total_cmp);
        let rank = ((q * d.len() as f64).ceil() as usize).clamp(1, d.len());
        Some(d[rank - 1])
    }

    pub fn out_of_scope(&self) -> impl Iterator<Item = &AllocationEntry> {
        self.entries.iter().filter(|e| !e.in_scope)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        let mut w = io::csv_writer(path)?;
        let err = io::csv_error(path);
        w.write_record(["airport", "zone", "km", "in_scope"]).map_err(&err)?;
        for e in &self.entries {
            w.write_record([e.airport.as_str(), &e.zone, &e.km.to_string(), &e.in_scope.to_string()])
                .map_err(&err)?;
        }
        w.flush().map_err(io::io_error(path))
    }
}

/// Assigns every airport to its nearest zone centroid; ties go to the
/// lowest zone id. Airports beyond 231 km of every zone are out of scope.
pub fn allocate_airports(airports: &[Airport], zones: &[Zone]) -> Allocation {
    let entries = airports
        .iter()
        .map(|a| {
            let mut best: Option<(&Zone, f64)> = None;
            for z in zones {
                let km = haversine_km(a.lat, a.lon, z.lat, z.lon);
                best = match best {
                    Some((bz, bk)) if bk < km || (bk == km && bz.zone_id <= z.zone_id) => Some((bz, bk)),
                    _ => Some((z, km)),
                };
            }
            let (zone, km) = best.map(|(z, k)| (z.zone_id.clone(), k)).unwrap_or_default();
            AllocationEntry { airport: a.code.clone(), zone, km, in_scope: km <= ALLOCATION_CUTOFF_KM }
        })
        .collect();
    Allocation { entries }
}

/// Zonal profiles for all three carriers.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSet {
    pub zones: Vec<String>,
    pub electricity: SeriesTable,
    pub h2_gas: SeriesTable,
    pub h2_liquid: SeriesTable,
    /// Aviation hydrogen of flights from out-of-scope airports, t/yr.
    pub out_of_scope_h2_t: f64,
    /// Aviation hydrogen inside the modelled zones, t/yr.
    pub aviation_h2_t: f64,
    /// Jet fuel energy of the in-scope flights, MJ/yr.
    pub aviation_jet_fuel_mj: f64,
}

impl DemandSet {
    pub fn table(&self, carrier: Carrier) -> &SeriesTable {
        match carrier {
            Carrier::Electricity => &self.electricity,
            Carrier::H2Gas => &self.h2_gas,
            Carrier::H2Liquid => &self.h2_liquid,
        }
    }

    pub fn profiles(&self) -> Vec<DemandProfile> {
        Carrier::ALL
            .iter()
            .flat_map(|&carrier| {
                let t = self.table(carrier);
                t.columns
                    .iter()
                    .zip(&t.values)
                    .map(move |(z, s)| DemandProfile { zone_id: z.clone(), carrier, series: s.clone() })
            })
            .collect()
    }

    /// Writes `demand_<carrier>.csv` for each carrier into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), DataError> {
        for carrier in Carrier::ALL {
            io::write_series(&dir.join(format!("demand_{}.csv", carrier.as_str())), self.table(carrier))?;
        }
        Ok(())
    }
}

/// Builds zonal hourly demand:
/// aviation hydrogen spread evenly over each day's hours at the origin
/// airport's zone; base hydrogen split by zonal load share within each
/// country and spread uniformly within each season; electricity load scaled
/// so each country's zones sum to its annual total.
pub fn build_profiles(
    flights: &[FlightRecord],
    allocation: &Allocation,
    countries: &[CountryDemand],
    zones: &[Zone],
    raw_load: &SeriesTable,
    season: SeasonSplit,
) -> Result<DemandSet, DemandError> {
    season.validate()?;
    let zone_ids: Vec<String> = zones.iter().map(|z| z.zone_id.clone()).collect();
    let zone_pos: HashMap<&str, usize> = zone_ids.iter().enumerate().map(|(i, z)| (z.as_str(), i)).collect();
    let demand_of: HashMap<&str, &CountryDemand> = countries.iter().map(|c| (c.country.as_str(), c)).collect();

    let mut loads = Vec::with_capacity(zones.len());
    for z in zones {
        let s = raw_load.column(&z.zone_id).ok_or_else(|| DemandError::MissingLoad { zone: z.zone_id.clone() })?;
        if s.iter().any(|&v| v < 0.0) {
            return Err(DemandError::Invalid(format!("negative load in zone `{}`", z.zone_id)));
        }
        loads.push(s.to_vec());
    }
    let annual: Vec<f64> = loads.iter().map(|s| s.iter().sum()).collect();
    let mut country_raw: BTreeMap<&str, f64> = BTreeMap::new();
    for (z, &a) in zones.iter().zip(&annual) {
        *country_raw.entry(z.country.as_str()).or_default() += a;
    }

    let hs = season.summer_hours() as f64;
    let hw = (HOURS_PER_YEAR as f64) - hs;
    let mut electricity = Vec::with_capacity(zones.len());
    let mut h2_gas = Vec::with_capacity(zones.len());
    for (i, z) in zones.iter().enumerate() {
        let cd = demand_of
            .get(z.country.as_str())
            .ok_or_else(|| DemandError::MissingCountry { country: z.country.clone() })?;
        let total_raw = country_raw[z.country.as_str()];
        if total_raw <= 0.0 {
            return Err(DemandError::Invalid(format!("country `{}` has zero raw load", z.country)));
        }
        let factor = cd.electricity_mwh() / total_raw;
        electricity.push(loads[i].iter().map(|&v| v * factor).collect::<Vec<f64>>());
        let base = cd.base_h2_t() * annual[i] / total_raw;
        let summer_rate = base * season.summer_share / hs;
        let winter_rate = base * (1.0 - season.summer_share) / hw;
        h2_gas.push(
            (0..HOURS_PER_YEAR)
                .map(|t| if season.is_summer_day(t / 24) { summer_rate } else { winter_rate })
                .collect::<Vec<f64>>(),
        );
    }

    let mut daily_t = vec![0.0f64; zones.len()];
    let mut out_of_scope_t = 0.0;
    let mut jet_mj = 0.0;
    for f in flights {
        if !(f.fuel_burn_kg > 0.0 && f.departures_per_day >= 0.0) {
            return Err(DemandError::Invalid(format!("flight {}-{} has no fuel burn", f.origin_airport, f.dest_airport)));
        }
        let entry = allocation
            .get(&f.origin_airport)
            .ok_or_else(|| DemandError::MissingAllocation { airport: f.origin_airport.clone() })?;
        let mj = jet_fuel_energy_mj(f.fuel_burn_kg * f.departures_per_day);
        let tonnes = jet_fuel_to_h2(mj) / 1000.0;
        if entry.in_scope {
            let &z = zone_pos
                .get(entry.zone.as_str())
                .ok_or_else(|| DemandError::Invalid(format!("allocation names unknown zone `{}`", entry.zone)))?;
            daily_t[z] += tonnes;
            jet_mj += mj * DAYS_PER_YEAR as f64;
        } else {
            out_of_scope_t += tonnes * DAYS_PER_YEAR as f64;
        }
    }
    let h2_liquid: Vec<Vec<f64>> = daily_t.iter().map(|&d| vec![d / 24.0; HOURS_PER_YEAR]).collect();
    let aviation_h2_t = daily_t.iter().sum::<f64>() * DAYS_PER_YEAR as f64;

    let table = |values| SeriesTable { columns: zone_ids.clone(), values };
    Ok(DemandSet {
        zones: zone_ids.clone(),
        electricity: table(electricity),
        h2_gas: table(h2_gas),
        h2_liquid: table(h2_liquid),
        out_of_scope_h2_t: out_of_scope_t,
        aviation_h2_t,
        aviation_jet_fuel_mj: jet_mj,
    })
}

/// Raw demand inputs as read from a data directory.
#[derive(Debug, Clone)]
pub struct DemandInputs {
    pub flights: Vec<FlightRecord>,
    pub airports: Vec<Airport>,
    pub zones: Vec<Zone>,
    pub countries: Vec<CountryDemand>,
    pub load: SeriesTable,
}

impl DemandInputs {
    /// Reads `flights.csv`, `airports.csv`, `zones.csv`,
    /// `country_demand.csv` and `load.csv` from `dir`.
    pub fn load(dir: &Path) -> Result<Self, DemandError> {
        let inputs = Self {
            flights: io::read_records(&dir.join("flights.csv"))?,
            airports: io::read_records(&dir.join("airports.csv"))?,
            zones: io::read_records(&dir.join("zones.csv"))?,
            countries: io::read_records(&dir.join("country_demand.csv"))?,
            load: io::read_series(&dir.join("load.csv"))?,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        let bad = |m: String| Err(DemandError::Invalid(m));
        for a in &self.airports {
            if !(-90.0..=90.0).contains(&a.lat) || !(-180.0..=180.0).contains(&a.lon) {
                return bad(format!("airport `{}` has invalid coordinates", a.code));
            }
        }
        let mut seen = HashSet::new();
        for z in &self.zones {
            if !seen.insert(z.zone_id.as_str()) {
                return bad(format!("duplicate zone `{}`", z.zone_id));
            }
        }
        if self.zones.is_empty() {
            return bad("no zones".into());
        }
        for f in &self.flights {
            if !(f.distance_nmi > 0.0) || f.seats == 0 || !(f.fuel_burn_kg > 0.0) {
                return bad(format!("flight {}-{} needs positive distance, seats and fuel burn", f.origin_airport, f.dest_airport));
            }
        }
        Ok(())
    }

    /// Countries that host at least one zone, in zone order.
    pub fn zone_countries(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for z in &self.zones {
            if !out.contains(&z.country) {
                out.push(z.country.clone());
            }
        }
        out
    }

    /// Runs filtering, allocation and profile construction.
    pub fn build(&self, season: SeasonSplit) -> Result<(Allocation, DemandSet), DemandError> {
        let flights = filter_flights(&self.flights, &self.airports, &self.zone_countries());
        let allocation = allocate_airports(&self.airports, &self.zones);
        let set = build_profiles(&flights, &allocation, &self.countries, &self.zones, &self.load, season)?;
        Ok((allocation, set))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flight(origin: &str, nmi: f64, seats: u32) -> FlightRecord {
        FlightRecord {
            origin_airport: origin.into(),
            dest_airport: "X".into(),
            distance_nmi: nmi,
            seats,
            departures_per_day: 1.0,
            fuel_burn_kg: 1000.0,
        }
    }

    fn airport(code: &str, lat: f64, lon: f64, country: &str) -> Airport {
        Airport { code: code.into(), lat, lon, country: country.into() }
    }

    fn zone(id: &str, lat: f64, lon: f64, country: &str) -> Zone {
        Zone { zone_id: id.into(), lat, lon, country: country.into() }
    }

    #[test]
    fn filter_boundaries() {
        let airports = vec![airport("CDG", 49.0, 2.5, "FR"), airport("JFK", 40.6, -73.8, "US")];
        let fr = vec!["FR".to_string()];
        let recs = vec![
            flight("CDG", 1000.0, 100),
            flight("CDG", 999.0, 220),
            flight("CDG", 500.0, 221),
            flight("JFK", 500.0, 100),
            flight("CDG", 10.0, 1),
            flight("ZZZ", 10.0, 1),
        ];
        let kept = filter_flights(&recs, &airports, &fr);
        assert_eq!(kept, vec![recs[1].clone(), recs[4].clone()]);
        assert_eq!(filter_flights(&kept, &airports, &fr), kept);
    }

    #[test]
    fn fuel_conversion() {
        assert_eq!(jet_fuel_to_h2(0.0), 0.0);
        assert!((jet_fuel_to_h2(1200.0) - 11.0).abs() < 1e-12);
        // 0.5 EJ of jet fuel.
        let mt = jet_fuel_to_h2(0.5e12) / 1e9;
        assert!((4.3..=4.6 * 1.08).contains(&mt), "{mt}");
    }

    #[test]
    fn haversine_known_distance() {
        // One degree of latitude.
        let d = haversine_km(0.0, 0.0, 1.0, 0.0);
        assert!((d - EARTH_RADIUS_KM * std::f64::consts::PI / 180.0).abs() < 1e-9);
        assert_eq!(haversine_km(10.0, 20.0, 10.0, 20.0), 0.0);
    }

    #[test]
    fn allocation_cutoff_and_ties() {
        let km_per_deg = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
        let zones = vec![zone("B", 0.0, 1.0, "X"), zone("A", 0.0, -1.0, "X")];
        let airports = vec![
            airport("MID", 0.0, 0.0, "X"),
            airport("ATB", 0.0, 1.0, "X"),
            airport("FAR", 0.0, 1.0 + 232.0 / km_per_deg, "X"),
            airport("EDGE", 0.0, 1.0 + 230.999 / km_per_deg, "X"),
        ];
        let alloc = allocate_airports(&airports, &zones);
        assert_eq!(alloc.entries[0].zone, "A");
        assert_eq!(alloc.entries[1].zone, "B");
        assert_eq!(alloc.entries[1].km, 0.0);
        assert!(!alloc.entries[2].in_scope);
        assert!(alloc.entries[3].in_scope);
        assert_eq!(alloc.out_of_scope().count(), 1);
    }

    fn flat_load(zones: &[&str]) -> SeriesTable {
        SeriesTable { columns: zones.iter().map(|z| z.to_string()).collect(), values: vec![vec![1.0; HOURS_PER_YEAR]; zones.len()] }
    }

    #[test]
    fn aviation_spreads_evenly_over_the_day() {
        let zones = vec![zone("Z", 0.0, 0.0, "X")];
        let airports = vec![airport("AAA", 0.0, 0.0, "X")];
        let alloc = allocate_airports(&airports, &zones);
        // 24 kg of hydrogen per day.
        let mut f = flight("AAA", 300.0, 50);
        f.fuel_burn_kg = 24.0 * H2_MJ_PER_KG / HEAVIER_AIRCRAFT_ALLOWANCE / JET_FUEL_MJ_PER_KG;
        let countries = vec![CountryDemand::new("X", 8760.0, 0.0)];
        let set = build_profiles(&[f], &alloc, &countries, &zones, &flat_load(&["Z"]), SeasonSplit::default()).unwrap();
        for &v in &set.h2_liquid.values[0] {
            assert!((v - 0.001).abs() < 1e-15);
        }
        let total: f64 = set.h2_liquid.values[0].iter().sum();
        assert!((total - set.aviation_h2_t).abs() <= 1e-9 * total);
    }

    #[test]
    fn base_demand_follows_load_share_and_seasons() {
        let zones = vec![zone("Z1", 0.0, 0.0, "X"), zone("Z2", 1.0, 0.0, "X")];
        let countries = vec![CountryDemand::new("X", 1000.0, 100.0)];
        let season = SeasonSplit::default();
        let set = build_profiles(&[], &Allocation { entries: vec![] }, &countries, &zones, &flat_load(&["Z1", "Z2"]), season)
            .unwrap();
        let hs = 184.0 * 24.0;
        let hw = 8760.0 - hs;
        for z in 0..2 {
            let s = &set.h2_gas.values[z];
            assert!((s.iter().sum::<f64>() - 50.0).abs() < 1e-9);
            let summer = s[150 * 24];
            let winter = s[10 * 24];
            assert!((summer / winter - (0.45 / hs) / (0.55 / hw)).abs() < 1e-12);
            assert!((set.electricity.values[z].iter().sum::<f64>() - 500.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unallocated_airport_is_an_error() {
        let zones = vec![zone("Z", 0.0, 0.0, "X")];
        let countries = vec![CountryDemand::new("X", 1.0, 0.0)];
        let err = build_profiles(
            &[flight("NOPE", 100.0, 10)],
            &Allocation { entries: vec![] },
            &countries,
            &zones,
            &flat_load(&["Z"]),
            SeasonSplit::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DemandError::MissingAllocation { .. }));
    }
}
