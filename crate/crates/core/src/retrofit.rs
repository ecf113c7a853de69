//! Weight-constrained hydrogen fuel-cell retrofit of a regional turboprop.
//!
//! The retrofit keeps the aircraft's maximum take-off weight fixed: the mass
//! of the original maximum usable fuel plus the engines forms a weight
//! envelope that the electric motors, the fuel-cell system, the full
//! hydrogen tank and any payload reduction must exactly fill.
//!
//! Mission energy scales linearly with range, which holds between 500 nmi
//! and the aircraft's maximum range; shorter ranges are rejected.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

/// Shortest mission range for which the linear energy/range relation holds.
pub const MIN_VALID_RANGE_NMI: f64 = 500.0;

/// Header of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str =
    "range_nmi,gi,sp_kw_per_kg,h2_kg,tank_kg,fc_kg,motor_kg,payload_red_kg,payload_red_frac,feasible";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrofitError {
    #[error("range {range} nmi outside model validity [{min}, {max}] nmi")]
    RangeOutOfModelValidity { range: f64, min: f64, max: f64 },
    #[error("infeasible retrofit: tank and motors alone ({used} kg) exceed the weight envelope ({envelope} kg)")]
    InfeasibleRetrofit { used: f64, envelope: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

/// Conventional aircraft characteristics that bound the retrofit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftSpec<T> {
    /// Maximum mission range including reserves, nmi.
    pub max_range: T,
    /// Jet-fuel energy stored on board with full tanks, kWh.
    pub full_tank_energy: T,
    pub engine_thermal_efficiency: T,
    /// Combined rated power of the engines, kW.
    pub engine_rated_power: T,
    /// kW/kg
    pub engine_specific_power: T,
    /// kg
    pub max_fuel_weight: T,
    /// Maximum fuel plus engine mass, kg.
    pub weight_envelope: T,
    /// Maximum payload, kg.
    pub payload_max: T,
}

impl<T: Scalar> AircraftSpec<T> {
    /// De Havilland Dash 8-400.
    ///
    /// The 6,800 kg envelope and 7,562 kW rated power are published values;
    /// fuel mass is the envelope minus the engine mass at 5 kW/kg. The
    /// maximum payload (8,480 kg) is back-derived so that the 500 nmi
    /// baseline needs a 34% payload reduction.
    pub fn dash8_400() -> Self {
        let rated = T::lit(7562.0);
        let sp = T::lit(5.0);
        let envelope = T::lit(6800.0);
        Self {
            max_range: T::lit(1100.0),
            full_tank_energy: T::lit(65_600.0),
            engine_thermal_efficiency: T::lit(0.35),
            engine_rated_power: rated,
            engine_specific_power: sp,
            max_fuel_weight: envelope - rated / sp,
            weight_envelope: envelope,
            payload_max: T::lit(8480.0),
        }
    }

    pub fn engine_mass(&self) -> T {
        self.engine_rated_power / self.engine_specific_power
    }

    pub fn validate(&self) -> Result<(), RetrofitError> {
        let positive = [
            ("max_range", self.max_range),
            ("full_tank_energy", self.full_tank_energy),
            ("engine_thermal_efficiency", self.engine_thermal_efficiency),
            ("engine_rated_power", self.engine_rated_power),
            ("engine_specific_power", self.engine_specific_power),
            ("max_fuel_weight", self.max_fuel_weight),
            ("weight_envelope", self.weight_envelope),
            ("payload_max", self.payload_max),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.engine_thermal_efficiency > T::one() {
            return Err(invalid("engine_thermal_efficiency", "must be <= 1".into()));
        }
        let implied = self.max_fuel_weight + self.engine_mass();
        if (implied - self.weight_envelope).abs() > T::lit(1e-3) * self.weight_envelope {
            return Err(invalid(
                "weight_envelope",
                format!("{} differs from max fuel + engine mass {implied} by more than 0.1%", self.weight_envelope),
            ));
        }
        Ok(())
    }
}

/// Technology assumptions for the hydrogen powertrain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowertrainAssumptions<T> {
    /// Trip-average fuel-cell efficiency.
    pub fc_efficiency_avg: T,
    /// Fuel-cell system specific power at maximum power, kW/kg.
    pub fc_specific_power: T,
    /// Hydrogen mass over full-tank mass.
    pub tank_gravimetric_index: T,
    /// kW/kg
    pub motor_specific_power: T,
    /// Lower heating value of hydrogen, kWh/kg.
    pub h2_lhv: T,
}

impl<T: Scalar> PowertrainAssumptions<T> {
    /// 60% fuel-cell efficiency, 1 kW/kg fuel-cell system, 35% tank GI,
    /// 12 kW/kg superconducting motors, 120 MJ/kg LHV.
    pub fn baseline() -> Self {
        Self {
            fc_efficiency_avg: T::lit(0.60),
            fc_specific_power: T::lit(1.0),
            tank_gravimetric_index: T::lit(0.35),
            motor_specific_power: T::lit(12.0),
            h2_lhv: T::lit(33.333),
        }
    }

    pub fn with_gi(mut self, gi: T) -> Self {
        self.tank_gravimetric_index = gi;
        self
    }

    pub fn with_specific_power(mut self, sp: T) -> Self {
        self.fc_specific_power = sp;
        self
    }

    pub fn validate(&self) -> Result<(), RetrofitError> {
        let eff = self.fc_efficiency_avg;
        if !(eff > T::zero() && eff < T::one()) {
            return Err(invalid("fc_efficiency_avg", format!("must lie in (0, 1), got {eff}")));
        }
        let gi = self.tank_gravimetric_index;
        if !(gi > T::zero() && gi <= T::one()) {
            return Err(invalid("tank_gravimetric_index", format!("must lie in (0, 1], got {gi}")));
        }
        for (name, v) in [
            ("fc_specific_power", self.fc_specific_power),
            ("motor_specific_power", self.motor_specific_power),
            ("h2_lhv", self.h2_lhv),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Mass allocation of the retrofit powertrain at one range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrofitBreakdown<T> {
    pub range: T,
    pub energy_required: T,
    pub hydrogen_mass: T,
    pub tank_mass_full: T,
    pub fuel_cell_mass: T,
    pub motor_mass: T,
    /// Payload that must be given up to close the weight balance. Negative
    /// values mean spare payload capacity.
    pub payload_reduction_mass: T,
    /// `payload_reduction_mass / payload_max`.
    pub payload_reduction_fraction: T,
}

impl<T: Scalar> RetrofitBreakdown<T> {
    /// Signed mismatch of the weight balance: envelope plus payload given up
    /// minus the new powertrain masses.
    pub fn weight_balance_residual(&self, spec: &AircraftSpec<T>) -> T {
        // Same association as the solve, so an exact breakdown gives exactly 0.
        let envelope = spec.max_fuel_weight + spec.engine_mass();
        self.payload_reduction_mass - (self.motor_mass + self.fuel_cell_mass + self.tank_mass_full - envelope)
    }
}

fn invalid(name: &'static str, reason: String) -> RetrofitError {
    RetrofitError::InvalidParameter { name, reason }
}

fn check_range<T: Scalar>(range: T, spec: &AircraftSpec<T>) -> Result<(), RetrofitError> {
    let min = T::lit(MIN_VALID_RANGE_NMI);
    if !(range >= min && range <= spec.max_range) {
        return Err(RetrofitError::RangeOutOfModelValidity {
            range: range.to_f64_lossless(),
            min: MIN_VALID_RANGE_NMI,
            max: spec.max_range.to_f64_lossless(),
        });
    }
    Ok(())
}

/// Useful (shaft) energy needed to fly `range` nmi, kWh.
pub fn mission_energy<T: Scalar>(range: T, spec: &AircraftSpec<T>) -> Result<T, RetrofitError> {
    check_range(range, spec)?;
    Ok(range / spec.max_range * spec.full_tank_energy * spec.engine_thermal_efficiency)
}

/// Hydrogen, tank, fuel-cell and motor masses at `range` and the payload
/// reduction that closes the weight balance.
pub fn solve_retrofit<T: Scalar>(
    range: T,
    spec: &AircraftSpec<T>,
    pa: &PowertrainAssumptions<T>,
) -> Result<RetrofitBreakdown<T>, RetrofitError> {
    pa.validate()?;
    let energy_required = mission_energy(range, spec)?;
    let hydrogen_mass = energy_required / (pa.h2_lhv * pa.fc_efficiency_avg);
    let tank_mass_full = hydrogen_mass / pa.tank_gravimetric_index;
    let fuel_cell_mass = spec.engine_rated_power / pa.fc_specific_power;
    let motor_mass = spec.engine_rated_power / pa.motor_specific_power;
    let payload_reduction_mass = motor_mass + fuel_cell_mass + tank_mass_full
        - (spec.max_fuel_weight + spec.engine_mass());
    Ok(RetrofitBreakdown {
        range,
        energy_required,
        hydrogen_mass,
        tank_mass_full,
        fuel_cell_mass,
        motor_mass,
        payload_reduction_mass,
        payload_reduction_fraction: payload_reduction_mass / spec.payload_max,
    })
}

/// Fuel-cell system specific power at which the retrofit needs no payload
/// reduction, kW/kg.
pub fn required_specific_power_zero_payload<T: Scalar>(
    range: T,
    gi: T,
    spec: &AircraftSpec<T>,
    pa: &PowertrainAssumptions<T>,
) -> Result<T, RetrofitError> {
    let probe = solve_retrofit(range, spec, &pa.with_gi(gi))?;
    let envelope = spec.max_fuel_weight + spec.engine_mass();
    let used = probe.tank_mass_full + probe.motor_mass;
    let budget = envelope - used;
    if !(budget > T::zero()) {
        return Err(RetrofitError::InfeasibleRetrofit {
            used: used.to_f64_lossless(),
            envelope: envelope.to_f64_lossless(),
        });
    }
    Ok(spec.engine_rated_power / budget)
}

/// Longest range with zero payload reduction for the given assumptions.
///
/// Returns `None` when even the shortest valid range needs a payload
/// reduction; clamps to the maximum range when no reduction is ever needed.
pub fn zero_payload_range<T: Scalar>(spec: &AircraftSpec<T>, pa: &PowertrainAssumptions<T>) -> Option<T> {
    let at_min = solve_retrofit(T::lit(MIN_VALID_RANGE_NMI), spec, pa).ok()?;
    if at_min.payload_reduction_mass > T::zero() {
        return None;
    }
    // Payload reduction is affine in range: tank mass grows linearly.
    let tank_per_nmi = at_min.tank_mass_full / at_min.range;
    let fixed = at_min.payload_reduction_mass - at_min.tank_mass_full;
    Some((-fixed / tank_per_nmi).min(spec.max_range))
}

/// One cell of a (range, GI, specific power) design sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub range: T,
    pub gi: T,
    pub sp: T,
    pub breakdown: Option<RetrofitBreakdown<T>>,
    /// False when the cell is outside model validity or would need more
    /// payload reduction than the aircraft carries.
    pub feasible: bool,
}

/// Evaluates every (range, gi, sp) cell, ordered range-major, then GI, then
/// specific power.
pub fn sweep_grid<T: Scalar>(
    ranges: &[T],
    gis: &[T],
    sps: &[T],
    spec: &AircraftSpec<T>,
    pa: &PowertrainAssumptions<T>,
) -> Vec<SweepRow<T>> {
    let cells: Vec<(T, T, T)> = ranges
        .iter()
        .flat_map(|&r| gis.iter().flat_map(move |&g| sps.iter().map(move |&s| (r, g, s))))
        .collect();
    cells
        .par_iter()
        .map(|&(range, gi, sp)| {
            let assumptions = pa.with_gi(gi).with_specific_power(sp);
            let breakdown = solve_retrofit(range, spec, &assumptions).ok();
            let feasible = breakdown
                .map(|b| b.payload_reduction_mass <= spec.payload_max)
                .unwrap_or(false);
            SweepRow { range, gi, sp, breakdown, feasible }
        })
        .collect()
}

/// Writes sweep rows as CSV. Cells without a breakdown leave the mass
/// columns empty.
pub fn write_sweep_csv<T: Scalar, W: Write>(rows: &[SweepRow<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        write!(out, "{},{},{}", row.range, row.gi, row.sp)?;
        match &row.breakdown {
            Some(b) => write!(
                out,
                ",{},{},{},{},{},{}",
                b.hydrogen_mass,
                b.tank_mass_full,
                b.fuel_cell_mass,
                b.motor_mass,
                b.payload_reduction_mass,
                b.payload_reduction_fraction
            )?,
            None => write!(out, ",,,,,,")?,
        }
        writeln!(out, ",{}", row.feasible)?;
    }
    Ok(())
}
