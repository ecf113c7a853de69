//! Scenario presets kept in a plain-text file of `key = value` lines under
//! `[section]` headers. `[defaults]` applies to every preset; each other
//! section is a named preset that overrides it.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("preset `{preset}`: key `{key}`: {message}")]
    BadValue { preset: String, key: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub aviation_demand_on: bool,
    /// New nuclear only in zones with existing nuclear capacity.
    pub nuclear_expansion: bool,
    pub ccs_allowed: bool,
    pub ccs_zone_whitelist: Vec<String>,
    /// Construction of new pipelines; existing pipelines always operate.
    pub pipelines_allowed: bool,
    pub trucks_allowed: bool,
    pub truck_max_route_km: f64,
    pub line_max_expansion_mw: f64,
    /// t CO₂/yr; infinite means no cap row.
    pub emissions_cap: f64,
    pub discount_rate: f64,
    pub representative_days: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            aviation_demand_on: true,
            nuclear_expansion: false,
            ccs_allowed: false,
            ccs_zone_whitelist: Vec::new(),
            pipelines_allowed: true,
            trucks_allowed: false,
            truck_max_route_km: 500.0,
            line_max_expansion_mw: 10_000.0,
            emissions_cap: f64::INFINITY,
            discount_rate: 0.04,
            representative_days: 50,
        }
    }
}

pub const KEYS: [&str; 11] = [
    "aviation_demand",
    "nuclear_expansion",
    "ccs_allowed",
    "ccs_zones",
    "pipelines_allowed",
    "trucks_allowed",
    "truck_max_route_km",
    "line_max_expansion_mw",
    "emissions_cap",
    "discount_rate",
    "representative_days",
];

/// Parsed preset file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresetFile {
    pub defaults: BTreeMap<String, String>,
    /// Presets in file order.
    pub presets: Vec<(String, BTreeMap<String, String>)>,
}

impl PresetFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut file = PresetFile::default();
        let mut current: Option<usize> = None;
        let mut in_defaults = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| ScenarioError::Syntax { line: i + 1, message: message.into() };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| syntax("unterminated section header"))?.trim();
                if name.is_empty() {
                    return Err(syntax("empty section name"));
                }
                if name == "defaults" {
                    in_defaults = true;
                    current = None;
                } else {
                    if file.presets.iter().any(|(n, _)| n == name) {
                        return Err(syntax("duplicate preset"));
                    }
                    in_defaults = false;
                    file.presets.push((name.to_string(), BTreeMap::new()));
                    current = Some(file.presets.len() - 1);
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value`"))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(syntax(&format!("unknown key `{key}`")));
            }
            let map = if in_defaults {
                &mut file.defaults
            } else if let Some(c) = current {
                &mut file.presets[c].1
            } else {
                return Err(syntax("key outside a section"));
            };
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn names(&self) -> Vec<&str> {
        self.presets.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Resolves a preset by name, applying `[defaults]` first.
    pub fn preset(&self, name: &str) -> Result<ScenarioConfig, ScenarioError> {
        let Some((_, overrides)) = self.presets.iter().find(|(n, _)| n == name) else {
            return Err(ScenarioError::UnknownPreset { name: name.into(), available: self.names().join(", ") });
        };
        let mut cfg = ScenarioConfig { name: name.into(), ..Default::default() };
        for (key, value) in self.defaults.iter().chain(overrides) {
            apply_key(&mut cfg, key, value)
                .map_err(|message| ScenarioError::BadValue { preset: name.into(), key: key.clone(), message })?;
        }
        if cfg.ccs_allowed && cfg.ccs_zone_whitelist.is_empty() {
            return Err(ScenarioError::BadValue {
                preset: name.into(),
                key: "ccs_zones".into(),
                message: "must list at least one zone when ccs_allowed".into(),
            });
        }
        Ok(cfg)
    }
}

fn apply_key(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), String> {
    let flag = || match value {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    };
    let number = || -> Result<f64, String> {
        let v: f64 = value.parse().map_err(|_| format!("expected a number, got `{value}`"))?;
        if v.is_nan() || v < 0.0 {
            return Err("must be a non-negative number".into());
        }
        Ok(v)
    };
    match key {
        "aviation_demand" => cfg.aviation_demand_on = flag()?,
        "nuclear_expansion" => cfg.nuclear_expansion = flag()?,
        "ccs_allowed" => cfg.ccs_allowed = flag()?,
        "ccs_zones" => cfg.ccs_zone_whitelist = value.split_whitespace().map(str::to_string).collect(),
        "pipelines_allowed" => cfg.pipelines_allowed = flag()?,
        "trucks_allowed" => cfg.trucks_allowed = flag()?,
        "truck_max_route_km" => cfg.truck_max_route_km = number()?,
        "line_max_expansion_mw" => cfg.line_max_expansion_mw = number()?,
        "emissions_cap" => cfg.emissions_cap = number()?,
        "discount_rate" => cfg.discount_rate = number()?,
        "representative_days" => {
            let k: usize = value.parse().map_err(|_| format!("expected a day count, got `{value}`"))?;
            if !(1..=365).contains(&k) {
                return Err("must be between 1 and 365".into());
            }
            cfg.representative_days = k;
        }
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// The seven standard presets. Region-specific values (cap, CCS zones,
/// representative days) belong in `[defaults]` of the data set's own file.
pub const STANDARD_PRESETS: &str = include_str!("presets.txt");

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> PresetFile {
        let mut f = PresetFile::parse(STANDARD_PRESETS).unwrap();
        f.defaults.insert("ccs_zones".into(), "NS1".into());
        f
    }

    #[test]
    fn standard_presets_match_the_scenario_table() {
        let f = standard();
        assert_eq!(
            f.names(),
            [
                "Base",
                "Base + Aviation",
                "With Nuclear Expansion",
                "No Carbon Capture",
                "No CCS with Nuclear Exp.",
                "Liquid Trucking",
                "No Pipelines"
            ]
        );
        // (aviation, nuclear, ccs, pipelines, trucks)
        let rows = [
            (false, false, true, true, false),
            (true, false, true, true, false),
            (true, true, true, true, false),
            (true, false, false, true, false),
            (true, true, false, true, false),
            (true, false, true, true, true),
            (true, false, true, false, false),
        ];
        for (name, want) in f.names().into_iter().zip(rows) {
            let c = f.preset(name).unwrap();
            assert_eq!(
                (c.aviation_demand_on, c.nuclear_expansion, c.ccs_allowed, c.pipelines_allowed, c.trucks_allowed),
                want,
                "{name}"
            );
            assert_eq!(c.line_max_expansion_mw, 10_000.0);
            assert_eq!(c.truck_max_route_km, 500.0);
            assert_eq!(c.emissions_cap, 38e6);
            assert_eq!(c.discount_rate, 0.04);
        }
    }

    #[test]
    fn unknown_preset_is_reported() {
        let err = standard().preset("Fusion").unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownPreset { .. }));
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        assert_eq!(
            PresetFile::parse("[A]\nbogus = 1\n").unwrap_err(),
            ScenarioError::Syntax { line: 2, message: "unknown key `bogus`".into() }
        );
        assert!(PresetFile::parse("x = 1").is_err());
        assert!(PresetFile::parse("[A\n").is_err());
    }

    #[test]
    fn ccs_needs_zones() {
        let f = PresetFile::parse("[A]\nccs_allowed = true\n").unwrap();
        assert!(matches!(f.preset("A"), Err(ScenarioError::BadValue { .. })));
    }

    #[test]
    fn infinite_cap_parses() {
        let f = PresetFile::parse("[A]\nemissions_cap = inf\n").unwrap();
        assert!(f.preset("A").unwrap().emissions_cap.is_infinite());
    }
}
