//! WebAssembly bindings for the browser demo. Each exported function takes
//! plain numbers and returns a JSON string; the `*_json` functions behind
//! them are ordinary Rust and are tested natively.

use serde::Serialize;
use tbopt::pmp::{DEFAULT_FD_STEP, DEFAULT_SEED};
use tbopt::{
    builtin_scenario, builtin_scenarios, simulate, solve_fbs, verify_adjoint_consistency,
    verify_control_stationarity, ModelId, ScenarioConfig, Series, Trajectory,
};
use wasm_bindgen::prelude::*;

/// Points sent to the page per curve.
const PLOT_POINTS: usize = 501;

#[derive(Debug, Serialize)]
pub struct Curves {
    pub t: Vec<f64>,
    /// Infectious fraction `I1/N`.
    pub infectious: Vec<f64>,
    pub control: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct OptimizeResult {
    pub optimal: Curves,
    pub baseline: Curves,
    pub cost: f64,
    pub baseline_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct ConstantResult {
    pub constant: Curves,
    pub optimal: Curves,
    pub cost: f64,
    pub optimal_cost: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub model: ModelId,
    pub title: &'static str,
    pub adjoint_residual: f64,
    pub stationarity_residual: f64,
    pub passed: bool,
}

fn curves(traj: &Trajectory) -> Curves {
    let n = traj.grid.len();
    let stride = n.div_ceil(PLOT_POINTS).max(1);
    let idx: Vec<usize> = (0..n)
        .step_by(stride)
        .chain((!(n - 1).is_multiple_of(stride)).then_some(n - 1))
        .collect();
    Curves {
        t: idx.iter().map(|&i| traj.grid.node(i)).collect(),
        infectious: idx
            .iter()
            .map(|&i| {
                let x = traj.state.row(i);
                x[2] / x.iter().sum::<f64>()
            })
            .collect(),
        control: idx.iter().map(|&i| traj.control.row(i)[0]).collect(),
    }
}

/// Flagship SEIRS scenario with the four interactive knobs applied.
pub fn flagship(
    k1: f64,
    population: f64,
    a: f64,
    b: f64,
    n_steps: usize,
) -> Result<ScenarioConfig, String> {
    let mut s = builtin_scenario("seirs-fig1").ok_or("flagship scenario missing")?;
    s.grid.n_steps = n_steps;
    for (name, v) in [("k1", k1), ("N", population), ("A1", a), ("B", b)] {
        s = s.with_value(name, v).map_err(|e| e.to_string())?;
    }
    s.validate().map_err(|e| e.to_string())?;
    Ok(s)
}

fn run_constant(s: &ScenarioConfig, u: f64) -> Result<(Trajectory, f64), String> {
    let model = s.model().map_err(|e| e.to_string())?;
    let grid = s.time_grid().map_err(|e| e.to_string())?;
    let x0 = s.initial_state().map_err(|e| e.to_string())?;
    simulate(
        &model,
        &s.objective(),
        &x0,
        Series::constant(grid.len(), &[u]),
        &grid,
    )
    .map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("demo results serialise")
}

pub fn optimize_json(
    k1: f64,
    population: f64,
    a: f64,
    b: f64,
    n_steps: usize,
) -> Result<String, String> {
    let s = flagship(k1, population, a, b, n_steps)?;
    let sol = solve_fbs(&s).map_err(|e| e.to_string())?;
    let (base, base_cost) = run_constant(&s, 0.0)?;
    Ok(to_json(&OptimizeResult {
        optimal: curves(&sol.trajectory),
        baseline: curves(&base),
        cost: sol.cost,
        baseline_cost: base_cost,
        iterations: sol.report.iterations,
        converged: sol.report.converged,
    }))
}

pub fn compare_constant_json(
    u: f64,
    k1: f64,
    population: f64,
    a: f64,
    b: f64,
    n_steps: usize,
) -> Result<String, String> {
    if !(0.0..=1.0).contains(&u) {
        return Err(format!("control must lie in [0, 1], got {u}"));
    }
    let s = flagship(k1, population, a, b, n_steps)?;
    let (traj, cost) = run_constant(&s, u)?;
    let sol = solve_fbs(&s).map_err(|e| e.to_string())?;
    Ok(to_json(&ConstantResult {
        constant: curves(&traj),
        optimal: curves(&sol.trajectory),
        cost,
        optimal_cost: sol.cost,
    }))
}

pub fn verify_json(model: &str, samples: usize) -> Result<String, String> {
    let ids: Vec<ModelId> = if model == "all" {
        ModelId::ALL.to_vec()
    } else {
        vec![model.parse().map_err(|e: tbopt::Error| e.to_string())?]
    };
    let mut out = Vec::new();
    for id in ids {
        let s = builtin_scenarios()
            .into_iter()
            .find(|s| s.model == id)
            .ok_or("no scenario for model")?;
        let m = s.model().map_err(|e| e.to_string())?;
        let obj = s.objective();
        let adj = verify_adjoint_consistency(&m, &obj, samples, DEFAULT_FD_STEP, DEFAULT_SEED)
            .map_err(|e| e.to_string())?;
        let sta = verify_control_stationarity(&m, &obj, samples.min(5), DEFAULT_SEED)
            .map_err(|e| e.to_string())?;
        out.push(VerifyResult {
            model: id,
            title: id.definition().title,
            adjoint_residual: adj.max_adjoint_residual,
            stationarity_residual: sta.max_stationarity_residual,
            passed: adj.max_adjoint_residual < 1e-6 && sta.max_stationarity_residual <= 1e-10,
        });
    }
    Ok(to_json(&out))
}

/// Optimal and uncontrolled SEIRS runs as JSON.
#[wasm_bindgen]
pub fn optimize(
    k1: f64,
    population: f64,
    a: f64,
    b: f64,
    n_steps: usize,
) -> Result<String, JsError> {
    optimize_json(k1, population, a, b, n_steps).map_err(|e| JsError::new(&e))
}

/// A constant control against the optimal one, as JSON.
#[wasm_bindgen(js_name = compareConstant)]
pub fn compare_constant(
    u: f64,
    k1: f64,
    population: f64,
    a: f64,
    b: f64,
    n_steps: usize,
) -> Result<String, JsError> {
    compare_constant_json(u, k1, population, a, b, n_steps).map_err(|e| JsError::new(&e))
}

/// Costate and control-law residuals for one model slug or `all`.
#[wasm_bindgen]
pub fn verify(model: &str, samples: usize) -> Result<String, JsError> {
    verify_json(model, samples).map_err(|e| JsError::new(&e))
}
