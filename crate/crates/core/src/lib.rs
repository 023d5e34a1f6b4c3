//! Optimal control of tuberculosis transmission models.
//!
//! A catalog of controlled compartmental models, the Pontryagin optimality
//! system for each, a forward-backward sweep solver, and an independent
//! direct-method oracle for cross-checking solutions.
//!
//! ```no_run
//! use tbopt::{builtin_scenario, solve_fbs};
//!
//! let scenario = builtin_scenario("seirs-fig1").unwrap();
//! let solution = solve_fbs(&scenario).unwrap();
//! println!("cost {} after {} iterations", solution.cost, solution.report.iterations);
//! ```

pub mod costs;
pub mod error;
pub mod grid;
pub mod models;
pub mod oracle;
pub mod params;
pub mod pmp;
pub mod scenario;
pub mod solver;
pub mod trajectory;

pub use costs::{total_cost, CostKind, CostWeights, Objective};
pub use error::{Error, Result};
pub use grid::{make_time_grid, TimeGrid};
pub use models::{
    default_parameters, validate_objective, validate_params, Model, ModelDefinition, ModelId,
    ValidationReport,
};
pub use oracle::{best_constant_control, solve_direct, DirectSolution};
pub use params::{ParamValue, ParameterSet, Table};
pub use pmp::{
    hamiltonian, verify_adjoint_consistency, verify_control_stationarity, ConsistencyReport,
};
pub use scenario::{builtin_scenario, builtin_scenarios, load_scenario, ScenarioConfig};
pub use solver::{
    integrate_adjoint_backward, integrate_forward, reduced_gradient, simulate, solve, solve_fbs,
    FbsSettings, InitialControl, Solution, SolveReport,
};
pub use trajectory::{interpolate_state, Series, Trajectory};
