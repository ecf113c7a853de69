//! Fixture comparisons. Set `H2PLAN_BLESS=1` to rewrite the fixtures after
//! an intended format change, then review the diff by hand.

mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::instances::{data_dir, gas, instance, line, thermal};
use h2plan::analytics::summarize;
use h2plan::pipeline::{prepare, RunOptions};
use h2plan::solver::mps::{parse_mps, to_mps_string};
use h2plan::solver::{solve, LinearProgram, Sense, SolveStatus, SolverOptions};
use h2plan::sysmodel::{build_lp, SystemInstance};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check_text(path: &Path, actual: &str) {
    if std::env::var_os("H2PLAN_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{} differs from the fixture", path.display());
}

/// Generator in zone A only, all demand in zone B across one line.
fn two_zone() -> SystemInstance {
    let mut gen = thermal("ccgt");
    gen.zone_whitelist = "A".into();
    let mut inst = instance(&["A", "B"], vec![gen], vec![gas()], vec![], vec![line("A", "B", 400.0)], &[20.0, 60.0], 1);
    for (t, v) in inst.electricity_demand[1].iter_mut().enumerate() {
        *v += 10.0 * (t % 6) as f64;
    }
    inst
}

#[test]
fn empty_model_export() {
    let mut lp = LinearProgram::<f64>::new("empty", Sense::Minimize);
    lp.add_column("x", 1.0, 0.0, 4.0);
    check_text(&golden_dir().join("empty.mps"), &to_mps_string(&lp));
}

#[test]
fn two_zone_model_export() {
    let inst = two_zone();
    let model = build_lp(&inst, &inst.scenario).unwrap();
    check_text(&golden_dir().join("two_zone.mps"), &to_mps_string(&model.lp));
}

#[test]
fn two_zone_report_tables() {
    let inst = two_zone();
    let model = build_lp(&inst, &inst.scenario).unwrap();
    let r = solve(&model.lp, &SolverOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let out = tempfile::tempdir().unwrap();
    let written = summarize(&model, &inst, &r, out.path()).unwrap();
    let fixtures = golden_dir().join("two_zone_report");
    for path in written {
        let name = path.file_name().unwrap();
        check_text(&fixtures.join(name), &fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn toy_model_export_round_trips() {
    let dir = data_dir().join("toy3");
    for scenario in ["Base", "Liquid Trucking"] {
        let opts = RunOptions::new(&dir, dir.join("scenarios.txt"), scenario, std::env::temp_dir());
        let inst = prepare(&opts, None).unwrap();
        let lp = build_lp(&inst, &inst.scenario).unwrap().lp;
        let text = to_mps_string(&lp);
        let again = to_mps_string(&parse_mps::<f64>(&text).unwrap());
        assert!(text == again, "{scenario}: re-export differs");
    }
}
