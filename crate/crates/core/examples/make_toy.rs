//! Writes the bundled three-zone toy data set.
//!
//! ```text
//! cargo run -p h2plan-core --example make_toy -- data/toy3
//! ```
//!
//! The output is a pure function of this file, so rerunning it reproduces
//! the committed fixture byte for byte.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use h2plan::demand::{Airport, CountryDemand, FlightRecord, Zone};
use h2plan::io::{write_series, SeriesTable, HOURS_PER_YEAR};
use h2plan::sysmodel::tech::{read_fuels, read_technologies, write_fuels, write_technologies};
use h2plan::sysmodel::{EdgeKind, ExistingCapacity, NetworkEdge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const TECHS: [&str; 17] = [
    "onwind",
    "offwind",
    "solar",
    "ocgt",
    "ccgt",
    "nuclear",
    "coal",
    "ccgt_ccs90",
    "battery",
    "pem",
    "smr",
    "atr_ccs94",
    "liquefier",
    "gas_tank",
    "liquid_tank",
    "pipeline",
    "truck",
];

const SCENARIOS: &str = "\
# Toy presets: same names and switches as the standard file, with a cap
# scaled to the toy system and few representative days.
[defaults]
emissions_cap = 450000
discount_rate = 0.04
representative_days = 2
line_max_expansion_mw = 10000
truck_max_route_km = 500
nuclear_expansion = false
ccs_allowed = true
ccs_zones = north
pipelines_allowed = true
trucks_allowed = false
aviation_demand = true

[Base]
aviation_demand = false

[Base + Aviation]

[With Nuclear Expansion]
nuclear_expansion = true

[No Carbon Capture]
ccs_allowed = false

[No CCS with Nuclear Exp.]
ccs_allowed = false
nuclear_expansion = true

[Liquid Trucking]
trucks_allowed = true

[No Pipelines]
pipelines_allowed = false
";

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) {
    let mut w = csv::Writer::from_path(path).expect("create csv");
    for r in rows {
        w.serialize(r).expect("write row");
    }
    w.flush().expect("flush");
}

fn round(v: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (v * s).round() / s
}

fn zone(id: &str, lat: f64, lon: f64, country: &str) -> Zone {
    Zone { zone_id: id.into(), lat, lon, country: country.into() }
}

fn airport(code: &str, lat: f64, lon: f64, country: &str) -> Airport {
    Airport { code: code.into(), lat, lon, country: country.into() }
}

fn flight(origin: &str, dest: &str, nmi: f64, seats: u32, per_day: f64, kg: f64) -> FlightRecord {
    FlightRecord {
        origin_airport: origin.into(),
        dest_airport: dest.into(),
        distance_nmi: nmi,
        seats,
        departures_per_day: per_day,
        fuel_burn_kg: kg,
    }
}

fn existing(z: &str, tech: &str, mw: f64, energy: Option<f64>) -> ExistingCapacity {
    ExistingCapacity { zone_id: z.into(), technology: tech.into(), capacity: mw, energy_capacity: energy, max_new: None }
}

fn edge(kind: EdgeKind, from: &str, to: &str, km: f64, existing: f64) -> NetworkEdge {
    let line = kind.is_power_line();
    NetworkEdge {
        kind,
        from_zone: from.into(),
        to_zone: to.into(),
        length_km: km,
        existing_capacity: existing,
        max_expansion: if line { Some(10_000.0) } else { None },
        cost_per_unit: if line { Some(47.5) } else { None },
        loss_or_fuel_use: if kind == EdgeKind::TruckRoute { None } else { Some(0.625) },
    }
}

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/toy3".into()));
    let catalog = std::env::args().nth(2).map(PathBuf::from).unwrap_or_else(|| out.join("../catalog"));
    fs::create_dir_all(&out).expect("create output directory");
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let zones = vec![
        zone("hub", 48.86, 2.35, "BB"),
        zone("north", 50.63, 3.06, "AA"),
        zone("west", 47.22, -1.55, "CC"),
    ];
    write_csv(&out.join("zones.csv"), &zones);

    let airports = vec![
        airport("CDG", 49.01, 2.55, "BB"),
        airport("ORY", 48.72, 2.38, "BB"),
        airport("BVA", 49.45, 2.11, "BB"),
        airport("LIL", 50.57, 3.10, "AA"),
        airport("CRL", 50.46, 4.45, "AA"),
        airport("NTE", 47.15, -1.61, "CC"),
        airport("RNS", 48.07, -1.73, "CC"),
        airport("LRH", 46.18, -1.20, "CC"),
        airport("BOD", 44.83, -0.72, "CC"),
        airport("JFK", 40.64, -73.78, "US"),
    ];
    write_csv(&out.join("airports.csv"), &airports);

    let flights = vec![
        flight("CDG", "NCE", 370.0, 180, 12.0, 3900.0),
        flight("CDG", "BCN", 460.0, 180, 6.0, 4600.0),
        flight("CDG", "LIS", 780.0, 174, 3.0, 7200.0),
        flight("CDG", "ATH", 1130.0, 180, 2.0, 10400.0),
        flight("ORY", "TLS", 310.0, 186, 10.0, 3300.0),
        flight("ORY", "MRS", 350.0, 150, 6.0, 3200.0),
        flight("BVA", "DUB", 430.0, 189, 3.0, 4300.0),
        flight("LIL", "NCE", 470.0, 150, 2.0, 4200.0),
        flight("LIL", "MRS", 440.0, 78, 2.0, 2200.0),
        flight("CRL", "FAO", 930.0, 189, 2.0, 8700.0),
        flight("CRL", "LHR", 190.0, 360, 1.0, 5200.0),
        flight("NTE", "AJA", 560.0, 174, 2.0, 5400.0),
        flight("NTE", "LYS", 300.0, 100, 4.0, 2200.0),
        flight("RNS", "MRS", 480.0, 78, 2.0, 2300.0),
        flight("LRH", "LGW", 340.0, 186, 1.0, 3300.0),
        flight("BOD", "ORY", 270.0, 186, 6.0, 3000.0),
        flight("JFK", "CDG", 3150.0, 350, 3.0, 62000.0),
    ];
    write_csv(&out.join("flights.csv"), &flights);

    let countries = vec![
        CountryDemand {
            country: "AA".into(),
            current_load_twh: 1.2,
            load_2040_twh: 1.5,
            base_h2_mt: 0.006,
            aviation_h2_mt: None,
        },
        CountryDemand {
            country: "BB".into(),
            current_load_twh: 2.4,
            load_2040_twh: 3.0,
            base_h2_mt: 0.012,
            aviation_h2_mt: None,
        },
        CountryDemand {
            country: "CC".into(),
            current_load_twh: 1.0,
            load_2040_twh: 1.2,
            base_h2_mt: 0.004,
            aviation_h2_mt: None,
        },
    ];
    write_csv(&out.join("country_demand.csv"), &countries);

    // Raw load: daily and seasonal swings plus noise; only the shape
    // matters because countries rescale it.
    let mut load = SeriesTable { columns: zones.iter().map(|z| z.zone_id.clone()).collect(), values: Vec::new() };
    for z in 0..zones.len() {
        let series = (0..HOURS_PER_YEAR)
            .map(|t| {
                let day = (t / 24) as f64;
                let hour = (t % 24) as f64;
                let daily = 1.0 + 0.25 * ((hour - 8.0 - z as f64) / 24.0 * 2.0 * PI).sin();
                let season = 1.0 + 0.15 * (day / 365.0 * 2.0 * PI).cos();
                round(100.0 * daily * season * (1.0 + 0.05 * rng.gen::<f64>()), 3)
            })
            .collect();
        load.values.push(series);
    }
    write_series(&out.join("load.csv"), &load).expect("write load");

    // Capacity factors: windy north, sunny west.
    let mut cf = SeriesTable { columns: Vec::new(), values: Vec::new() };
    let mut wind_state = [0.4f64; 3];
    for (z, zn) in zones.iter().enumerate() {
        let (wind_mean, sun_peak) = [(0.28, 0.55), (0.38, 0.45), (0.30, 0.7)][z];
        let mut wind = Vec::with_capacity(HOURS_PER_YEAR);
        let mut sun = Vec::with_capacity(HOURS_PER_YEAR);
        for t in 0..HOURS_PER_YEAR {
            let day = (t / 24) as f64;
            let hour = (t % 24) as f64;
            let winter = 1.0 + 0.3 * (day / 365.0 * 2.0 * PI).cos();
            // Mean-reverting weather.
            wind_state[z] += 0.08 * (wind_mean * winter - wind_state[z]) + 0.06 * (rng.gen::<f64>() - 0.5);
            wind.push(round(wind_state[z].clamp(0.0, 1.0), 4));
            let summer = 1.0 - 0.4 * (day / 365.0 * 2.0 * PI).cos();
            let elevation = ((hour - 6.0) / 12.0 * PI).sin().max(0.0);
            let cloud = 0.6 + 0.4 * rng.gen::<f64>();
            sun.push(round((sun_peak * summer * elevation * cloud).clamp(0.0, 1.0), 4));
        }
        if zn.zone_id == "north" {
            cf.columns.push("north:offwind".into());
            cf.values.push(wind.iter().map(|w| round((w * 1.4).min(1.0), 4)).collect());
        }
        cf.columns.push(format!("{}:onwind", zn.zone_id));
        cf.values.push(wind);
        cf.columns.push(format!("{}:solar", zn.zone_id));
        cf.values.push(sun);
    }
    write_series(&out.join("cf.csv"), &cf).expect("write cf");

    let mut techs = read_technologies(&catalog.join("technologies.csv")).expect("catalog technologies");
    techs.retain(|t| TECHS.contains(&t.name.as_str()));
    for t in &mut techs {
        if t.name == "offwind" {
            t.zone_whitelist = "north".into();
        }
    }
    write_technologies(&out.join("technologies.csv"), &techs).expect("write technologies");
    let fuels = read_fuels(&catalog.join("fuels.csv")).expect("catalog fuels");
    write_fuels(&out.join("fuels.csv"), &fuels).expect("write fuels");

    let existing = vec![
        existing("hub", "ccgt", 250.0, None),
        existing("hub", "nuclear", 150.0, None),
        existing("hub", "ocgt", 100.0, None),
        existing("north", "coal", 150.0, None),
        existing("north", "onwind", 100.0, None),
        existing("west", "ccgt", 100.0, None),
        existing("west", "solar", 50.0, None),
        existing("hub", "smr", 0.5, None),
    ];
    write_csv(&out.join("existing_capacity.csv"), &existing);

    let edges = vec![
        edge(EdgeKind::Hvac, "hub", "north", 204.0, 300.0),
        edge(EdgeKind::Hvac, "hub", "west", 342.0, 200.0),
        edge(EdgeKind::Hvac, "north", "west", 520.0, 0.0),
        edge(EdgeKind::Pipeline, "hub", "north", 204.0, 0.0),
        edge(EdgeKind::Pipeline, "hub", "west", 342.0, 0.0),
        edge(EdgeKind::Pipeline, "north", "west", 520.0, 0.0),
        edge(EdgeKind::TruckRoute, "hub", "north", 204.0, 0.0),
        edge(EdgeKind::TruckRoute, "hub", "west", 342.0, 0.0),
    ];
    write_csv(&out.join("edges.csv"), &edges);

    fs::write(out.join("scenarios.txt"), SCENARIOS).expect("write scenarios");
}
