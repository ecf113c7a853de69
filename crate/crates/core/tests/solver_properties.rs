mod common;

use common::{enumerate, random_lp, Oracle};
use h2plan::solver::verify::verify_solution;
use h2plan::solver::{dual_orientation, solve, PivotRule, SolveStatus, SolverOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_lp(seed: u64) -> h2plan::LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 1 + (seed % 6) as usize;
    let n = 1 + (seed / 7 % 7) as usize;
    random_lp(&mut rng, m, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn matches_vertex_enumeration(seed in any::<u64>()) {
        let lp = small_lp(seed);
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        match enumerate(&lp) {
            Oracle::Infeasible => prop_assert_eq!(r.status, SolveStatus::Infeasible),
            Oracle::Optimal { objective, rhs_sensitivity, nondegenerate } => {
                prop_assert_eq!(r.status, SolveStatus::Optimal);
                prop_assert!((r.objective - objective).abs() <= 1e-8 * (1.0 + objective.abs()),
                    "solver {} oracle {}", r.objective, objective);
                let rep = verify_solution(&lp, &r);
                prop_assert!(rep.is_clean(), "{:?}", rep.violations);
                if nondegenerate {
                    for (i, row) in lp.rows.iter().enumerate() {
                        let pi = r.dual[i] * dual_orientation::<f64>(lp.sense, row.sense);
                        prop_assert!((pi - rhs_sensitivity[i]).abs() <= 1e-6 * (1.0 + rhs_sensitivity[i].abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn bland_and_dantzig_agree(seed in any::<u64>()) {
        let lp = small_lp(seed);
        let a = solve(&lp, &SolverOptions::default()).unwrap();
        let b = solve(&lp, &SolverOptions { pivot: PivotRule::Bland, ..Default::default() }).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == SolveStatus::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-8 * (1.0 + a.objective.abs()));
        }
    }

    #[test]
    fn presolve_and_scaling_do_not_change_the_optimum(seed in any::<u64>()) {
        let lp = small_lp(seed);
        let a = solve(&lp, &SolverOptions::default()).unwrap();
        let b = solve(&lp, &SolverOptions { presolve: false, scaling: false, ..Default::default() }).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == SolveStatus::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-8 * (1.0 + a.objective.abs()));
        }
    }

    #[test]
    fn objective_scaling_keeps_the_basis(seed in any::<u64>(), exp in -3i32..=3) {
        let lp = small_lp(seed);
        let lambda = 2f64.powi(exp);
        let mut scaled = lp.clone();
        for c in &mut scaled.columns {
            c.cost *= lambda;
        }
        let a = solve(&lp, &SolverOptions::default()).unwrap();
        let b = solve(&scaled, &SolverOptions::default()).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == SolveStatus::Optimal {
            prop_assert!((b.objective - lambda * a.objective).abs() <= 1e-8 * (1.0 + b.objective.abs()));
            prop_assert_eq!(a.column_status, b.column_status);
            prop_assert_eq!(a.row_status, b.row_status);
        }
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>()) {
        let lp = small_lp(seed);
        let a = solve(&lp, &SolverOptions::default()).unwrap();
        let b = solve(&lp, &SolverOptions::default()).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn single_precision_tracks_double_precision() {
    for seed in 0..40u64 {
        let lp = small_lp(seed);
        let r64 = solve(&lp, &SolverOptions::default()).unwrap();
        let lp32 = h2plan::solver::LinearProgram::<f32> {
            name: lp.name.clone(),
            sense: lp.sense,
            objective_offset: 0.0,
            columns: lp
                .columns
                .iter()
                .map(|c| h2plan::solver::Column { name: c.name.clone(), cost: c.cost as f32, lower: c.lower as f32, upper: c.upper as f32 })
                .collect(),
            rows: lp
                .rows
                .iter()
                .map(|r| h2plan::solver::Row { name: r.name.clone(), sense: r.sense, rhs: r.rhs as f32 })
                .collect(),
            entries: lp.entries.iter().map(|&(r, c, v)| (r, c, v as f32)).collect(),
        };
        let r32 = solve(&lp32, &SolverOptions::default()).unwrap();
        assert_eq!(r32.status, r64.status, "seed {seed}");
        if r64.status == SolveStatus::Optimal {
            let rel = (r32.objective as f64 - r64.objective).abs() / (1.0 + r64.objective.abs());
            assert!(rel < 1e-3, "seed {seed}: {} vs {}", r32.objective, r64.objective);
        }
    }
}
