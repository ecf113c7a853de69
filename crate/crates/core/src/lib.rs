//! Planning toolkit for hydrogen-fuelled regional aviation and the coupled
//! electricity and hydrogen supply system that would serve it.

pub mod analytics;
pub mod demand;
pub mod io;
pub mod pipeline;
pub mod retrofit;
pub mod scalar;
pub mod solver;
pub mod sysmodel;
pub mod tdr;

pub use scalar::Scalar;

pub type AircraftSpec = retrofit::AircraftSpec<f64>;
pub type PowertrainAssumptions = retrofit::PowertrainAssumptions<f64>;
pub type RetrofitBreakdown = retrofit::RetrofitBreakdown<f64>;
pub type LinearProgram = solver::LinearProgram<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type SolverOptions = solver::SolverOptions<f64>;
