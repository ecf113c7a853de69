//! `h2plan` command-line runner.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 infeasible model (a Farkas
//! report is written), 3 invalid input or arguments.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use h2plan::analytics;
use h2plan::demand::{DemandInputs, SeasonSplit};
use h2plan::pipeline::{self, PipelineError, RunManifest, RunOptions, DEFAULT_SEED, MANIFEST_FILE};
use h2plan::retrofit::{self, RetrofitError};
use h2plan::solver::mps::export_model;
use h2plan::solver::solution_io::{read_solution, DualConvention};
use h2plan::solver::verify::verify_solution;
use h2plan::solver::{PivotRule, SolveStatus, SolverOptions};
use h2plan::sysmodel::instance::{read_capacity_factors, reduction_bundle};
use h2plan::sysmodel::build_lp;
use h2plan::tdr::{reduce, DEFAULT_PERIODS};
use h2plan::{AircraftSpec, PowertrainAssumptions};
use serde_json::json;

const EXIT_FAILURE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "h2plan", version, about = "Hydrogen aviation retrofit and energy system planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario end to end: demand, reduction, model, solve, reports.
    Run(RunArgs),
    /// Sweep the aircraft retrofit over range, tank index and specific power.
    Retrofit(RetrofitArgs),
    /// Build zonal demand profiles and the airport allocation.
    Demand(DemandArgs),
    /// Reduce the hourly year to weighted representative days.
    Reduce(ReduceArgs),
    /// Write a scenario's linear program as fixed-layout MPS.
    ExportLp(ExportArgs),
    /// Report on an externally solved model, or check a run manifest.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Data directory with the documented CSV set.
    #[arg(long, env = "H2PLAN_DATA")]
    data_dir: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Preset name from the scenario file.
    #[arg(long)]
    scenario: String,
    /// Preset file; defaults to `scenarios.txt` in the data directory.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Seed for the time-domain reduction.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Overrides the preset's number of representative days.
    #[arg(long)]
    days: Option<usize>,
}

impl ScenarioArgs {
    fn options(&self, out_dir: PathBuf, solver: SolverOptions<f64>) -> RunOptions {
        let file = self.scenario_file.clone().unwrap_or_else(|| self.data.data_dir.join("scenarios.txt"));
        let mut o = RunOptions::new(&self.data.data_dir, file, &self.scenario, out_dir);
        o.seed = self.seed;
        o.representative_days = self.days;
        o.solver = solver;
        o
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Simplex iteration limit.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Primal feasibility tolerance.
    #[arg(long)]
    tol_feas: Option<f64>,
    /// Reduced-cost optimality tolerance.
    #[arg(long)]
    tol_opt: Option<f64>,
    /// Pricing rule: devex, dantzig or bland.
    #[arg(long)]
    pivot: Option<PivotRule>,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions<f64> {
        let mut o = SolverOptions::default();
        if let Some(v) = self.max_iters {
            o.max_iters = v;
        }
        if let Some(v) = self.tol_feas {
            o.tol_feas = v;
        }
        if let Some(v) = self.tol_opt {
            o.tol_opt = v;
        }
        if let Some(v) = self.pivot {
            o.pivot = v;
        }
        o
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Record wall-clock timings in the manifest (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RetrofitArgs {
    /// Mission ranges, nmi.
    #[arg(long, value_delimiter = ',', required = true)]
    range: Vec<f64>,
    /// Tank gravimetric indices.
    #[arg(long, value_delimiter = ',')]
    gi: Vec<f64>,
    /// Fuel-cell system specific powers, kW/kg.
    #[arg(long, value_delimiter = ',')]
    sp: Vec<f64>,
    /// Print the specific power needed for zero payload reduction instead.
    #[arg(long)]
    zero_payload: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemandArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Directory for the demand profiles and allocation.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Directory for the periods, day map and reduced series.
    #[arg(long)]
    out: PathBuf,
    /// Number of representative days.
    #[arg(long, default_value_t = DEFAULT_PERIODS)]
    days: usize,
    /// Seed for the clustering.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// MPS file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Check a finished run's manifest against the files on disk.
    #[arg(long, conflicts_with_all = ["solution", "duals", "out"])]
    check: Option<PathBuf>,
    /// Data directory with the documented CSV set.
    #[arg(long, env = "H2PLAN_DATA")]
    data_dir: Option<PathBuf>,
    /// Preset name from the scenario file.
    #[arg(long)]
    scenario: Option<String>,
    /// Preset file; defaults to `scenarios.txt` in the data directory.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Seed for the time-domain reduction.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Overrides the preset's number of representative days.
    #[arg(long)]
    days: Option<usize>,
    /// `name,value` primal values from an external solver.
    #[arg(long, requires = "duals")]
    solution: Option<PathBuf>,
    /// `name,dual` row duals from an external solver.
    #[arg(long, requires = "solution")]
    duals: Option<PathBuf>,
    /// The duals are plain right-hand-side sensitivities.
    #[arg(long)]
    rhs_duals: bool,
    /// Directory for the report tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code and machine-readable tag.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn invalid(kind: &'static str, message: impl ToString) -> Self {
        Self { code: EXIT_INVALID, kind, message: message.to_string() }
    }

    fn runtime(kind: &'static str, message: impl ToString) -> Self {
        Self { code: EXIT_FAILURE, kind, message: message.to_string() }
    }

    fn json(&self) -> serde_json::Value {
        json!({ "error": self.kind, "exit_code": self.code, "message": self.message })
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = if e.is_invalid_input() { EXIT_INVALID } else { EXIT_FAILURE };
        Self { code, kind: e.kind(), message: e.to_string() }
    }
}

impl From<RetrofitError> for Failure {
    fn from(e: RetrofitError) -> Self {
        let kind = match e {
            RetrofitError::RangeOutOfModelValidity { .. } => "range_out_of_model_validity",
            RetrofitError::InfeasibleRetrofit { .. } => "infeasible_retrofit",
            RetrofitError::InvalidParameter { .. } => "invalid_parameter",
        };
        Self::invalid(kind, e)
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::runtime("io", format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out_dir = match &cli.command {
        Command::Run(a) => Some(a.out.clone()),
        _ => None,
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let doc = f.json();
            eprintln!("{doc}");
            if let Some(dir) = out_dir.filter(|d| d.is_dir()) {
                let _ = fs::write(dir.join("error.json"), format!("{doc:#}\n"));
            }
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Run(a) => run(a),
        Command::Retrofit(a) => retrofit_cmd(a),
        Command::Demand(a) => demand_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::ExportLp(a) => export_cmd(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn run(a: RunArgs) -> Result<u8, Failure> {
    let mut opts = a.scenario.options(a.out.clone(), a.solver.options());
    opts.record_timing = a.timing;
    let _ = fs::remove_file(a.out.join("error.json"));
    let report = pipeline::run(&opts)?;
    let summary = json!({
        "scenario": report.manifest.scenario,
        "status": report.manifest.status,
        "objective": report.objective,
        "out": a.out.display().to_string(),
    });
    println!("{summary}");
    Ok(match report.status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Unbounded => EXIT_FAILURE,
    })
}

fn retrofit_cmd(a: RetrofitArgs) -> Result<u8, Failure> {
    let spec = AircraftSpec::dash8_400();
    let base = PowertrainAssumptions::baseline();
    let gis = if a.gi.is_empty() { vec![base.tank_gravimetric_index] } else { a.gi };
    let sps = if a.sp.is_empty() { vec![base.fc_specific_power] } else { a.sp };
    for &r in &a.range {
        retrofit::mission_energy(r, &spec)?;
    }
    let mut buf = Vec::new();
    if a.zero_payload {
        writeln!(buf, "range_nmi,gi,sp_required_kw_per_kg").expect("in memory");
        for &r in &a.range {
            for &g in &gis {
                let sp = retrofit::required_specific_power_zero_payload(r, g, &spec, &base)?;
                writeln!(buf, "{r},{g},{sp}").expect("in memory");
            }
        }
    } else {
        for &g in &gis {
            base.with_gi(g).validate()?;
        }
        for &s in &sps {
            base.with_specific_power(s).validate()?;
        }
        let rows = retrofit::sweep_grid(&a.range, &gis, &sps, &spec, &base);
        retrofit::write_sweep_csv(&rows, &mut buf).expect("in memory");
    }
    match a.out {
        Some(path) => fs::write(&path, buf).map_err(|e| io_failure(&path, e))?,
        None => io::stdout().write_all(&buf).map_err(|e| io_failure(Path::new("<stdout>"), e))?,
    }
    Ok(0)
}

fn demand_cmd(a: DemandArgs) -> Result<u8, Failure> {
    let inputs = DemandInputs::load(&a.data.data_dir).map_err(|e| Failure::invalid("demand", e))?;
    let (allocation, set) = inputs.build(SeasonSplit::default()).map_err(|e| Failure::invalid("demand", e))?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    allocation.write_csv(&a.out.join("allocation.csv")).map_err(|e| Failure::runtime("io", e))?;
    set.write(&a.out).map_err(|e| Failure::runtime("io", e))?;
    println!(
        "{}",
        json!({
            "aviation_h2_t": set.aviation_h2_t,
            "out_of_scope_h2_t": set.out_of_scope_h2_t,
            "aviation_jet_fuel_mj": set.aviation_jet_fuel_mj,
        })
    );
    Ok(0)
}

fn reduce_cmd(a: ReduceArgs) -> Result<u8, Failure> {
    let inputs = DemandInputs::load(&a.data.data_dir).map_err(|e| Failure::invalid("demand", e))?;
    let (_, set) = inputs.build(SeasonSplit::default()).map_err(|e| Failure::invalid("demand", e))?;
    let cf = read_capacity_factors(&a.data.data_dir).map_err(|e| Failure::invalid("data", e))?;
    let reduction = reduce(&reduction_bundle(&set, &cf), a.days, a.seed).map_err(|e| Failure::invalid("time_reduction", e))?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    reduction.write(&a.out).map_err(|e| Failure::runtime("io", e))?;
    Ok(0)
}

fn export_cmd(a: ExportArgs) -> Result<u8, Failure> {
    let opts = a.scenario.options(PathBuf::new(), SolverOptions::default());
    let inst = pipeline::prepare(&opts, None)?;
    let model = build_lp(&inst, &inst.scenario).map_err(PipelineError::from)?;
    export_model(&model.lp, &a.out).map_err(|e| io_failure(&a.out, e))?;
    Ok(0)
}

fn report_cmd(a: ReportArgs) -> Result<u8, Failure> {
    if let Some(dir) = a.check {
        let manifest = RunManifest::read(&dir.join(MANIFEST_FILE))?;
        let problems = manifest.verify(&dir)?;
        println!("{}", json!({ "manifest": dir.display().to_string(), "problems": problems }));
        return Ok(if problems.is_empty() { 0 } else { EXIT_INVALID });
    }
    let (Some(data_dir), Some(scenario), Some(solution), Some(duals), Some(out)) =
        (a.data_dir, a.scenario, a.solution, a.duals, a.out)
    else {
        return Err(Failure::invalid(
            "arguments",
            "report needs either --check DIR or --scenario, --data-dir, --solution, --duals and --out",
        ));
    };
    let scenario = ScenarioArgs {
        data: DataArgs { data_dir },
        scenario,
        scenario_file: a.scenario_file,
        seed: a.seed,
        days: a.days,
    };
    let opts = scenario.options(out.clone(), SolverOptions::default());
    let inst = pipeline::prepare(&opts, None)?;
    let model = build_lp(&inst, &inst.scenario).map_err(PipelineError::from)?;
    let convention = if a.rhs_duals { DualConvention::RhsSensitivity } else { DualConvention::Native };
    let result = read_solution(&model.lp, &solution, &duals, convention).map_err(|e| Failure::invalid("solution_io", e))?;
    let check = verify_solution(&model.lp, &result);
    analytics::summarize(&model, &inst, &result, &out).map_err(|e| Failure::runtime("analytics", e))?;
    println!(
        "{}",
        json!({
            "objective": result.objective,
            "primal_residual": check.primal_residual,
            "dual_residual": check.dual_residual,
            "relative_gap": check.relative_gap,
            "clean": check.is_clean(),
        })
    );
    Ok(0)
}
