use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use tbopt::models::baseline::{neutral_control, uncontrolled_rhs};
use tbopt::pmp::{verify_adjoint_with, DEFAULT_FD_STEP};
use tbopt::{
    builtin_scenario, load_scenario, simulate, solve_fbs, verify_control_stationarity,
    ConsistencyReport, Model, ModelId, ScenarioConfig, Series, Solution, Trajectory,
};

use crate::error::{CliError, CliResult};
use crate::output::{
    ensure_dir, fmt_f64, read_control, write_control, write_json, write_table, write_trajectory,
};

pub const SCENARIO_DIR_ENV: &str = "TBOPT_SCENARIO_DIR";

/// Adjoint residual above which `verify` fails.
pub const ADJOINT_THRESHOLD: f64 = 1e-6;
/// Relative Hamiltonian excess above which `verify` fails.
pub const STATIONARITY_THRESHOLD: f64 = 1e-10;

/// Grid and solver settings that override the scenario file.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub n_steps: Option<usize>,
    pub tolerance: Option<f64>,
}

/// Resolves a scenario argument: an existing path, then `<dir>/<arg>` or
/// `<dir>/<arg>.json` under the scenario directory, then a built-in name.
pub fn resolve_scenario(arg: &str, dir: Option<&Path>, ov: Overrides) -> CliResult<ScenarioConfig> {
    let mut candidates = vec![PathBuf::from(arg)];
    if let Some(d) = dir {
        candidates.push(d.join(arg));
        candidates.push(d.join(format!("{arg}.json")));
    }
    let mut scenario = match candidates.iter().find(|p| p.is_file()) {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            load_scenario(&text)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        None => builtin_scenario(arg).ok_or_else(|| CliError::ScenarioNotFound(arg.into()))?,
    };
    if let Some(n) = ov.n_steps {
        scenario.grid.n_steps = n;
    }
    if let Some(tol) = ov.tolerance {
        scenario.solver.tolerance = tol;
    }
    scenario.validate()?;
    Ok(scenario)
}

pub fn list_models() -> String {
    let mut out = String::new();
    for id in ModelId::ALL {
        let d = id.definition();
        out.push_str(&format!(
            "{:<22} states={} controls={} cost={} [{}] {} ({})\n",
            d.slug,
            d.state_dim(),
            d.control_dim(),
            d.default_cost,
            d.state_labels.join(","),
            d.title,
            d.source
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlMode {
    Off,
    Constant(Vec<f64>),
    File(PathBuf),
}

impl FromStr for ControlMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "off" {
            return Ok(Self::Off);
        }
        if let Some(v) = s.strip_prefix("constant:") {
            return v
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(Self::Constant);
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(Self::File(p.into()));
        }
        Err(format!(
            "expected off, constant:<v>[,<v>...] or file:<path>, got `{s}`"
        ))
    }
}

impl ControlMode {
    fn series(&self, scenario: &ScenarioConfig, model: &Model) -> CliResult<Series> {
        let nodes = scenario.grid.n_steps + 1;
        let m = model.control_dim();
        let w = scenario.objective().weights;
        match self {
            Self::Off => Ok(Series::constant(nodes, &neutral_control(model.id()))),
            Self::Constant(v) => {
                let v = match v.len() {
                    1 => vec![v[0]; m],
                    n if n == m => v.clone(),
                    n => {
                        return Err(CliError::Invalid(format!(
                            "constant control has {n} values, model has {m} controls"
                        )))
                    }
                };
                if let Some(bad) = v.iter().find(|x| !(w.lower..=w.upper).contains(*x)) {
                    return Err(CliError::Invalid(format!(
                        "constant control {bad} outside [{}, {}]",
                        w.lower, w.upper
                    )));
                }
                Ok(Series::constant(nodes, &v))
            }
            Self::File(path) => {
                let rows = read_control(path, m)?;
                if rows.len() != nodes {
                    return Err(CliError::Invalid(format!(
                        "{}: {} rows, grid has {nodes} nodes",
                        path.display(),
                        rows.len()
                    )));
                }
                Ok(Series::from_rows(&rows)?)
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    scenario: String,
    model: ModelId,
    n_steps: usize,
    cost: f64,
    terminal_time: f64,
    terminal_state: BTreeMap<String, f64>,
    terminal_population: f64,
    terminal_infectious_fraction: f64,
    nonnegative: bool,
}

fn terminal_state(model: &Model, traj: &Trajectory) -> BTreeMap<String, f64> {
    let last = traj.state.row(traj.grid.len() - 1);
    model
        .definition()
        .state_labels
        .iter()
        .zip(last)
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

fn terminal_infectious_fraction(model: &Model, traj: &Trajectory) -> f64 {
    let last = traj.state.row(traj.grid.len() - 1);
    model.infectious(last) / last.iter().sum::<f64>()
}

pub fn cmd_simulate(scenario: &ScenarioConfig, mode: &ControlMode, out: &Path) -> CliResult<()> {
    let model = scenario.model()?;
    let u = mode.series(scenario, &model)?;
    let (traj, cost) = simulate(
        &model,
        &scenario.objective(),
        &scenario.initial_state()?,
        u,
        &scenario.time_grid()?,
    )?;
    ensure_dir(out)?;
    write_trajectory(&out.join("trajectory.csv"), &model, &traj)?;
    let summary = SimulateSummary {
        scenario: scenario.name.clone(),
        model: model.id(),
        n_steps: scenario.grid.n_steps,
        cost,
        terminal_time: traj.grid.tf(),
        terminal_state: terminal_state(&model, &traj),
        terminal_population: traj.state.row(traj.grid.len() - 1).iter().sum(),
        terminal_infectious_fraction: terminal_infectious_fraction(&model, &traj),
        nonnegative: traj.nonnegative,
    };
    write_json(&out.join("summary.json"), &summary)
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    scenario: String,
    model: ModelId,
    converged: bool,
    iterations: usize,
    max_iterations: usize,
    relaxation: f64,
    tolerance: f64,
    n_steps: usize,
    cost: f64,
    baseline_cost: f64,
    cost_history: Vec<f64>,
    final_change: f64,
    terminal_adjoint_residual: f64,
    min_relative_state: f64,
    nonnegative: bool,
    terminal_state: BTreeMap<String, f64>,
    terminal_infectious_fraction: f64,
    baseline_terminal_infectious_fraction: f64,
    /// Time the first control spends above 0.99 of its upper bound.
    duration_at_max: f64,
}

/// Result of one optimisation, kept for sweep summaries.
pub struct OptimizeOutcome {
    pub solution: Solution,
    pub terminal_infectious_fraction: f64,
    pub duration_at_max: f64,
}

fn duration_at_max(scenario: &ScenarioConfig, traj: &Trajectory) -> f64 {
    let level = 0.99 * scenario.cost.upper;
    traj.control.rows().filter(|u| u[0] > level).count() as f64 * traj.grid.step()
}

/// Solves, writes all artifacts, and reports non-convergence only after the
/// files are on disk.
pub fn cmd_optimize(scenario: &ScenarioConfig, out: &Path) -> CliResult<OptimizeOutcome> {
    let model = scenario.model()?;
    let objective = scenario.objective();
    let grid = scenario.time_grid()?;
    let solution = solve_fbs(scenario)?;
    let baseline_u = Series::constant(grid.len(), &neutral_control(model.id()));
    let (baseline, baseline_cost) = simulate(
        &model,
        &objective,
        &scenario.initial_state()?,
        baseline_u,
        &grid,
    )?;

    ensure_dir(out)?;
    write_trajectory(&out.join("trajectory.csv"), &model, &solution.trajectory)?;
    write_control(&out.join("control.csv"), &model, &solution.trajectory)?;
    write_trajectory(&out.join("baseline.csv"), &model, &baseline)?;

    let rep = &solution.report;
    let tif = terminal_infectious_fraction(&model, &solution.trajectory);
    let at_max = duration_at_max(scenario, &solution.trajectory);
    let report = OptimizeReport {
        scenario: scenario.name.clone(),
        model: model.id(),
        converged: rep.converged,
        iterations: rep.iterations,
        max_iterations: scenario.solver.max_iterations,
        relaxation: scenario.solver.relaxation,
        tolerance: scenario.solver.tolerance,
        n_steps: scenario.grid.n_steps,
        cost: solution.cost,
        baseline_cost,
        cost_history: rep.cost_history.clone(),
        final_change: rep.final_change,
        terminal_adjoint_residual: rep.terminal_adjoint_residual,
        min_relative_state: rep.min_relative_state,
        nonnegative: solution.trajectory.nonnegative,
        terminal_state: terminal_state(&model, &solution.trajectory),
        terminal_infectious_fraction: tif,
        baseline_terminal_infectious_fraction: terminal_infectious_fraction(&model, &baseline),
        duration_at_max: at_max,
    };
    write_json(&out.join("report.json"), &report)?;
    if !rep.converged {
        return Err(CliError::NotConverged(format!(
            "{}: no convergence after {} iterations (last change {:.3e}); best iterate written to {}",
            scenario.name,
            rep.iterations,
            rep.final_change,
            out.display()
        )));
    }
    Ok(OptimizeOutcome {
        solution,
        terminal_infectious_fraction: tif,
        duration_at_max: at_max,
    })
}

/// Runs every sweep point in parallel, each into its own directory, then
/// writes `sweep_summary.csv` in sweep order. Returns the number of points
/// that failed or did not converge.
pub fn cmd_sweep(scenario: &ScenarioConfig, out: &Path) -> CliResult<usize> {
    let points = scenario.expand_sweep()?;
    ensure_dir(out)?;
    let results: Vec<_> = points
        .par_iter()
        .map(|p| cmd_optimize(&p.scenario, &out.join(p.label())))
        .collect();

    let axes: Vec<String> = points[0]
        .assignment
        .iter()
        .map(|(k, _)| k.clone())
        .collect();
    let mut header = vec!["label".to_string()];
    header.extend(axes.iter().cloned());
    for h in [
        "cost",
        "duration_at_max",
        "terminal_infectious_fraction",
        "iterations",
        "status",
    ] {
        header.push(h.into());
    }
    let mut failures = 0;
    let mut rows = Vec::new();
    for (p, r) in points.iter().zip(&results) {
        let mut row = vec![p.label()];
        row.extend(p.assignment.iter().map(|(_, v)| fmt_f64(*v)));
        match r {
            Ok(o) => {
                row.push(fmt_f64(o.solution.cost));
                row.push(fmt_f64(o.duration_at_max));
                row.push(fmt_f64(o.terminal_infectious_fraction));
                row.push(o.solution.report.iterations.to_string());
                row.push("converged".into());
            }
            Err(e) => {
                failures += 1;
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push(format!("error: {e}"));
                eprintln!("{}: {e}", p.label());
            }
        }
        rows.push(row);
    }
    write_table(&out.join("sweep_summary.csv"), &header, rows)?;
    Ok(failures)
}

#[derive(Debug, Serialize)]
pub struct ModelCheck {
    pub model: ModelId,
    pub adjoint: ConsistencyReport,
    pub stationarity: ConsistencyReport,
    pub reduction_mismatches: usize,
    pub reduction_points: usize,
    pub passed: bool,
}

pub struct VerifyOptions {
    pub samples: usize,
    pub stationarity_samples: usize,
    pub reduction_points: usize,
    pub seed: u64,
    pub perturb_adjoint: bool,
}

pub fn parse_model_selection(arg: &str) -> CliResult<Vec<ModelId>> {
    if arg == "all" {
        return Ok(ModelId::ALL.to_vec());
    }
    arg.parse::<ModelId>()
        .map(|id| vec![id])
        .map_err(|e| CliError::Invalid(e.to_string()))
}

/// Reduction points use the default parameters and deterministic states
/// spread over `[10, 10000]`.
fn reduction_mismatches(id: ModelId, points: usize) -> CliResult<usize> {
    let mut p = tbopt::default_parameters(id);
    let n = id.definition().state_dim();
    let mut mismatches = 0;
    for k in 0..points {
        let x: Vec<f64> = (0..n)
            .map(|i| 10.0 + 9990.0 * (((k * 7 + i * 13) % 101) as f64 / 100.0))
            .collect();
        if matches!(id, ModelId::SeirsControlled | ModelId::TwoStrainControlled) {
            p.set("N", x.iter().sum::<f64>());
        }
        if id == ModelId::SeirsControlled {
            p.set("d1", 0.0);
        }
        let t = 5.0 * k as f64 / points.max(1) as f64;
        let model = Model::new(id, &p)?;
        if model.eval_dynamics(t, &x, &neutral_control(id))? != uncontrolled_rhs(id, t, &x, &p)? {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

fn reference_scenario(id: ModelId) -> ScenarioConfig {
    tbopt::builtin_scenarios()
        .into_iter()
        .find(|s| s.model == id)
        .expect("every model has a built-in scenario")
}

pub fn verify_model(id: ModelId, opts: &VerifyOptions) -> CliResult<ModelCheck> {
    let scenario = reference_scenario(id);
    let model = scenario.model()?;
    let obj = scenario.objective();
    let adjoint = verify_adjoint_with(
        &model,
        &obj,
        opts.samples,
        DEFAULT_FD_STEP,
        opts.seed,
        |t, x, lam, u, out| {
            model.adjoint_rhs(t, x, lam, u, &obj, out)?;
            if opts.perturb_adjoint {
                out[0] += 1e-3 * out[0].abs().max(1.0);
            }
            Ok(())
        },
    )?;
    let stationarity =
        verify_control_stationarity(&model, &obj, opts.stationarity_samples, opts.seed)?;
    let reduction_mismatches = reduction_mismatches(id, opts.reduction_points)?;
    let passed = adjoint.max_adjoint_residual < ADJOINT_THRESHOLD
        && stationarity.max_stationarity_residual <= STATIONARITY_THRESHOLD
        && reduction_mismatches == 0;
    Ok(ModelCheck {
        model: id,
        adjoint,
        stationarity,
        reduction_mismatches,
        reduction_points: opts.reduction_points,
        passed,
    })
}

pub fn format_check(c: &ModelCheck) -> String {
    format!(
        "{} {:<22} adjoint={:.2e} stationarity={:.2e} reduction={}/{}",
        if c.passed { "PASS" } else { "FAIL" },
        c.model.slug(),
        c.adjoint.max_adjoint_residual,
        c.stationarity.max_stationarity_residual,
        c.reduction_points - c.reduction_mismatches,
        c.reduction_points
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_control_modes() {
        assert_eq!("off".parse::<ControlMode>(), Ok(ControlMode::Off));
        assert_eq!("constant:0.5".parse(), Ok(ControlMode::Constant(vec![0.5])));
        assert_eq!(
            "constant:0.1, 1".parse(),
            Ok(ControlMode::Constant(vec![0.1, 1.0]))
        );
        assert_eq!("file:u.csv".parse(), Ok(ControlMode::File("u.csv".into())));
        assert!("constant:x".parse::<ControlMode>().is_err());
        assert!("on".parse::<ControlMode>().is_err());
    }

    #[test]
    fn model_selection() {
        assert_eq!(parse_model_selection("all").unwrap().len(), 7);
        assert_eq!(
            parse_model_selection("korea_time_dependent").unwrap(),
            [ModelId::KoreaTimeDependent]
        );
        assert!(parse_model_selection("seirs").is_err());
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let ov = Overrides {
            n_steps: Some(100),
            tolerance: Some(1e-3),
        };
        let s = resolve_scenario("seirs-fig1", None, ov).unwrap();
        assert_eq!(s.grid.n_steps, 100);
        assert_eq!(s.solver.tolerance, 1e-3);
        let bad = Overrides {
            n_steps: Some(0),
            tolerance: None,
        };
        assert!(resolve_scenario("seirs-fig1", None, bad).is_err());
    }
}
