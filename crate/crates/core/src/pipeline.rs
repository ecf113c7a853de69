//! End-to-end scenario run: demand, time-domain reduction, model assembly,
//! solve and reports, recorded in a tamper-evident manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytics::{self, AnalyticsError};
use crate::demand::{DemandError, DemandInputs, SeasonSplit};
use crate::io::DataError;
use crate::solver::solution_io::{write_solution, SolutionIoError};
use crate::solver::verify::{check_farkas, verify_solution};
use crate::solver::{solve, Certificate, SolveStatus, SolverError, SolverOptions};
use crate::sysmodel::instance::{read_capacity_factors, reduction_bundle};
use crate::sysmodel::{build_lp, NetworkData, PresetFile, ScenarioError, SystemInstance, ValidationError};
use crate::tdr::{reduce, TdrError};

pub const DEFAULT_SEED: u64 = 42;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".h2plan.lock";
/// Files read from the data directory.
pub const INPUT_FILES: [&str; 10] = [
    "flights.csv",
    "airports.csv",
    "zones.csv",
    "country_demand.csv",
    "load.csv",
    "cf.csv",
    "technologies.csv",
    "fuels.csv",
    "existing_capacity.csv",
    "edges.csv",
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Tdr(#[from] TdrError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    SolutionIo(#[from] SolutionIoError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("{} is locked by another run; remove the lock file if that run died", .0.display())]
    Locked(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl PipelineError {
    /// Whether the inputs, rather than the run, are at fault.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Self::Scenario(_) | Self::Demand(_) | Self::Data(_) | Self::Tdr(_) | Self::Validation(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Scenario(ScenarioError::UnknownPreset { .. }) => "unknown_preset",
            Self::Scenario(_) => "scenario",
            Self::Demand(_) => "demand",
            Self::Data(_) => "data",
            Self::Tdr(_) => "time_reduction",
            Self::Validation(_) => "validation",
            Self::Solver(_) => "solver",
            Self::SolutionIo(_) => "solution_io",
            Self::Analytics(_) => "analytics",
            Self::Locked(_) => "locked",
            Self::Io { .. } => "io",
            Self::Json { .. } => "json",
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub data_dir: PathBuf,
    pub scenario_file: PathBuf,
    pub scenario: String,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub solver: SolverOptions<f64>,
    /// Overrides the preset's number of representative days.
    pub representative_days: Option<usize>,
    /// Wall-clock timings in the manifest. Off by default because they
    /// break byte-identical reruns.
    pub record_timing: bool,
}

impl RunOptions {
    pub fn new(data_dir: impl Into<PathBuf>, scenario_file: impl Into<PathBuf>, scenario: &str, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            scenario_file: scenario_file.into(),
            scenario: scenario.to_string(),
            out_dir: out_dir.into(),
            seed: DEFAULT_SEED,
            solver: SolverOptions::default(),
            representative_days: None,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub seed: u64,
    pub data_dir: String,
    pub scenario_file: String,
    pub options: BTreeMap<String, String>,
    /// SHA-256 of each input, keyed by file name; the preset file is keyed
    /// `scenario_file`.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every output file, keyed by path relative to the output
    /// directory.
    pub outputs: BTreeMap<String, String>,
    pub status: String,
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_s: Option<BTreeMap<String, f64>>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.to_path_buf(), source })
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|source| PipelineError::Json { path: path.to_path_buf(), source })?;
        fs::write(path, text + "\n").map_err(io_err(path))
    }

    /// Recomputes every recorded digest and lists the files that are
    /// missing or differ. Inputs are checked against the recorded data
    /// directory and preset file.
    pub fn verify(&self, out_dir: &Path) -> Result<Vec<String>, PipelineError> {
        let mut bad = Vec::new();
        let mut check = |label: &str, path: &Path, want: &str| {
            match sha256_file(path) {
                Ok(got) if got == want => {}
                Ok(_) => bad.push(format!("{label}: digest mismatch")),
                Err(_) => bad.push(format!("{label}: missing")),
            }
        };
        for (name, want) in &self.inputs {
            let path = if name == "scenario_file" {
                PathBuf::from(&self.scenario_file)
            } else {
                Path::new(&self.data_dir).join(name)
            };
            check(&format!("input {name}"), &path, want);
        }
        for (name, want) in &self.outputs {
            check(&format!("output {name}"), &out_dir.join(name), want);
        }
        let now = output_digests(out_dir)?;
        for name in now.keys() {
            if !self.outputs.contains_key(name) {
                bad.push(format!("output {name}: not in manifest"));
            }
        }
        Ok(bad)
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Digests of every file under `dir` except the manifest and lock file.
pub fn output_digests(dir: &Path) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(io_err(&d))? {
            let path = entry.map_err(io_err(&d))?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(dir).expect("under dir");
            let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            if key == MANIFEST_FILE || key == LOCK_FILE {
                continue;
            }
            out.insert(key, sha256_file(&path).map_err(io_err(&path))?);
        }
    }
    Ok(out)
}

/// Exclusive claim on an output directory, released on drop.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(PipelineError::Locked(dir.to_path_buf())),
            Err(e) => Err(PipelineError::Io { path, source: e }),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub manifest: RunManifest,
}

/// Loads everything up to the solve: the preset, demand profiles, the
/// reduction and the model instance. Writes the intermediate tables into
/// `out_dir` when one is given.
pub fn prepare(opts: &RunOptions, out_dir: Option<&Path>) -> Result<SystemInstance, PipelineError> {
    let presets = PresetFile::load(&opts.scenario_file)?;
    let scenario = presets.preset(&opts.scenario)?;
    let inputs = DemandInputs::load(&opts.data_dir)?;
    let (allocation, demand) = inputs.build(SeasonSplit::default())?;
    let cf = read_capacity_factors(&opts.data_dir)?;
    let k = opts.representative_days.unwrap_or(scenario.representative_days);
    let reduction = reduce(&reduction_bundle(&demand, &cf), k, opts.seed)?;
    let network = NetworkData::load(&opts.data_dir)?;
    if let Some(dir) = out_dir {
        allocation.write_csv(&dir.join("allocation.csv"))?;
        let tdr_dir = dir.join("tdr");
        fs::create_dir_all(&tdr_dir).map_err(io_err(&tdr_dir))?;
        reduction.write(&tdr_dir)?;
    }
    Ok(SystemInstance::from_reduction(network, &reduction, demand.aviation_jet_fuel_mj, scenario)?)
}

/// Runs one scenario into `opts.out_dir`. An infeasible model is a normal
/// outcome with a Farkas report; errors mean no solve took place.
pub fn run(opts: &RunOptions) -> Result<RunReport, PipelineError> {
    let _lock = DirLock::acquire(&opts.out_dir)?;
    let out = opts.out_dir.as_path();
    let mut timing = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timing: &mut BTreeMap<String, f64>| {
        timing.insert(name.to_string(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };

    let inst = prepare(opts, Some(out))?;
    lap("prepare", &mut timing);
    let model = build_lp(&inst, &inst.scenario)?;
    lap("build", &mut timing);
    let result = solve(&model.lp, &opts.solver)?;
    lap("solve", &mut timing);

    let objective = (result.status == SolveStatus::Optimal).then_some(result.objective);
    match result.status {
        SolveStatus::Optimal => {
            let sol_dir = out.join("solution");
            fs::create_dir_all(&sol_dir).map_err(io_err(&sol_dir))?;
            write_solution(&model.lp, &result, &sol_dir)?;
            let check = verify_solution(&model.lp, &result);
            let path = out.join("verification.txt");
            let mut text = format!(
                "primal_residual {:e}\ndual_residual {:e}\nviolations {}\n",
                check.primal_residual,
                check.dual_residual,
                check.violations.len()
            );
            for v in &check.violations {
                text.push_str(&format!("{v}\n"));
            }
            fs::write(&path, text).map_err(io_err(&path))?;
            analytics::summarize(&model, &inst, &result, &out.join("report"))?;
        }
        SolveStatus::Infeasible | SolveStatus::Unbounded => {
            let path = out.join("certificate.json");
            let doc = certificate_report(&model.lp, &result);
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|source| PipelineError::Json { path: path.clone(), source })?;
            fs::write(&path, text + "\n").map_err(io_err(&path))?;
        }
    }
    lap("report", &mut timing);

    let mut inputs = BTreeMap::new();
    for name in INPUT_FILES {
        let path = opts.data_dir.join(name);
        inputs.insert(name.to_string(), sha256_file(&path).map_err(io_err(&path))?);
    }
    inputs.insert(
        "scenario_file".to_string(),
        sha256_file(&opts.scenario_file).map_err(io_err(&opts.scenario_file))?,
    );
    let s = &opts.solver;
    let options: BTreeMap<String, String> = [
        ("max_iters", s.max_iters.to_string()),
        ("tol_feas", s.tol_feas.to_string()),
        ("tol_opt", s.tol_opt.to_string()),
        ("pivot", format!("{:?}", s.pivot).to_lowercase()),
        ("presolve", s.presolve.to_string()),
        ("scaling", s.scaling.to_string()),
        ("representative_days", inst.num_periods().to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let manifest = RunManifest {
        scenario: opts.scenario.clone(),
        seed: opts.seed,
        data_dir: opts.data_dir.display().to_string(),
        scenario_file: opts.scenario_file.display().to_string(),
        options,
        inputs,
        outputs: output_digests(out)?,
        status: result.status.to_string(),
        objective,
        timing_s: opts.record_timing.then_some(timing),
    };
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(RunReport { status: result.status, objective, manifest })
}

/// Names the rows (Farkas) or columns (unbounded ray) of a certificate,
/// largest weights first.
pub fn certificate_report(lp: &crate::LinearProgram, result: &crate::SolveResult) -> serde_json::Value {
    let listed = |names: Vec<&str>, values: &[f64]| -> Vec<serde_json::Value> {
        let mut v: Vec<(&str, f64)> = names.into_iter().zip(values.iter().copied()).filter(|(_, x)| x.abs() > 1e-9).collect();
        v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(b.0)));
        v.into_iter().map(|(n, x)| serde_json::json!({ "name": n, "weight": x })).collect()
    };
    match &result.certificate {
        Some(Certificate::Farkas { row_multipliers }) => serde_json::json!({
            "status": "infeasible",
            "certificate": "farkas",
            "verified": check_farkas(lp, row_multipliers, 1e-6),
            "rows": listed(lp.rows.iter().map(|r| r.name.as_str()).collect(), row_multipliers),
        }),
        Some(Certificate::Ray { direction }) => serde_json::json!({
            "status": "unbounded",
            "certificate": "ray",
            "columns": listed(lp.columns.iter().map(|c| c.name.as_str()).collect(), direction),
        }),
        None => serde_json::json!({ "status": result.status.to_string() }),
    }
}
