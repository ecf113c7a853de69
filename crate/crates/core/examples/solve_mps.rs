//! Solves an MPS file with the built-in simplex and prints status,
//! objective, iteration count and wall time.
//!
//! ```text
//! cargo run -p h2plan-core --example solve_mps -- model.mps
//! ```

use std::path::PathBuf;
use std::time::Instant;

use h2plan::solver::mps::import_model;
use h2plan::solver::{solve, SolverOptions};

fn main() {
    let path = PathBuf::from(std::env::args().nth(1).expect("usage: solve_mps FILE"));
    let lp = import_model::<f64>(&path).expect("read MPS");
    let start = Instant::now();
    let r = solve(&lp, &SolverOptions::default()).expect("solve");
    println!(
        "{} rows {} cols: {} objective {} after {} iterations in {:.3} s",
        lp.num_rows(),
        lp.num_cols(),
        r.status,
        r.objective,
        r.iterations,
        start.elapsed().as_secs_f64()
    );
}
