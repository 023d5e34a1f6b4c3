//! Forward-backward sweep: RK4 for the state forward in time, RK4 for the
//! costate backward from `lambda(tf) = 0`, and a relaxed update of the control
//! toward the pointwise minimiser of the Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::costs::{total_cost, Objective};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::models::Model;
use crate::scenario::ScenarioConfig;
use crate::trajectory::{Series, Trajectory};

/// Starting guess for the control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialControl {
    /// One value per control, held over the whole horizon.
    Constant(Vec<f64>),
    /// One row per grid node.
    Trajectory(Series),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FbsSettings {
    /// Weight `c` on the previous control in `u <- c u + (1 - c) u_char`.
    pub relaxation: f64,
    /// Stop when `|u_new - u|_1 <= tolerance * |u_new|_1`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Defaults to zero controls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_control: Option<InitialControl>,
}

impl Default for FbsSettings {
    fn default() -> Self {
        Self {
            relaxation: 0.5,
            tolerance: 1e-4,
            max_iterations: 500,
            initial_control: None,
        }
    }
}

impl FbsSettings {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..1.0).contains(&self.relaxation) {
            out.push(format!(
                "relaxation must lie in [0, 1), got {}",
                self.relaxation
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            out.push(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.max_iterations == 0 {
            out.push("max_iterations must be at least 1".into());
        }
        out
    }

    /// The starting control sampled on `grid`.
    pub fn initial_series(&self, grid: &TimeGrid, control_dim: usize) -> Result<Series> {
        match &self.initial_control {
            None => Ok(Series::zeros(grid.len(), control_dim)),
            Some(InitialControl::Constant(v)) => {
                if v.len() != control_dim {
                    return Err(Error::Dimension {
                        what: "initial control",
                        expected: control_dim,
                        got: v.len(),
                    });
                }
                Ok(Series::constant(grid.len(), v))
            }
            Some(InitialControl::Trajectory(s)) => {
                if s.len() != grid.len() || s.dim() != control_dim {
                    return Err(Error::Dimension {
                        what: "initial control trajectory",
                        expected: grid.len(),
                        got: s.len(),
                    });
                }
                Ok(s.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Cost of the control produced by each iteration.
    pub cost_history: Vec<f64>,
    /// Relative L1 change of the control at the last iteration.
    pub final_change: f64,
    /// Sup norm of the adjoint at the terminal node.
    pub terminal_adjoint_residual: f64,
    /// Most negative compartment relative to the population along the run.
    pub min_relative_state: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub trajectory: Trajectory,
    pub report: SolveReport,
    pub cost: f64,
}

impl Solution {
    pub fn control(&self) -> &Series {
        &self.trajectory.control
    }

    pub fn adjoint(&self) -> &Series {
        self.trajectory
            .adjoint
            .as_ref()
            .expect("solutions always carry an adjoint")
    }
}

fn check_finite(what: &'static str, t: f64, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what,
            t,
            iteration: None,
        })
    }
}

/// Classical RK4 with the control linear between nodes, so the half-step
/// value is the mean of the two neighbouring nodes.
pub fn integrate_forward(
    model: &Model,
    x0: &[f64],
    control: &Series,
    grid: &TimeGrid,
) -> Result<Series> {
    let n = model.state_dim();
    let m = model.control_dim();
    if x0.len() != n {
        return Err(Error::Dimension {
            what: "initial state",
            expected: n,
            got: x0.len(),
        });
    }
    if control.len() != grid.len() || control.dim() != m {
        return Err(Error::Dimension {
            what: "control samples",
            expected: grid.len(),
            got: control.len(),
        });
    }
    if let Some(v) = x0.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Argument(format!(
            "initial state must be finite and nonnegative, got {v}"
        )));
    }
    let h = grid.step();
    let mut out = Series::zeros(grid.len(), n);
    out.row_mut(0).copy_from_slice(x0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut umid = vec![0.0; m];
    for i in 0..grid.n_steps() {
        let t = grid.node(i);
        let tm = t + 0.5 * h;
        let x = out.row(i).to_vec();
        control.midpoint_into(i, &mut umid);
        model.dynamics(t, &x, control.row(i), &mut k1)?;
        axpy(&mut tmp, &x, 0.5 * h, &k1);
        model.dynamics(tm, &tmp, &umid, &mut k2)?;
        axpy(&mut tmp, &x, 0.5 * h, &k2);
        model.dynamics(tm, &tmp, &umid, &mut k3)?;
        axpy(&mut tmp, &x, h, &k3);
        model.dynamics(grid.node(i + 1), &tmp, control.row(i + 1), &mut k4)?;
        let next = out.row_mut(i + 1);
        for j in 0..n {
            next[j] = x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        check_finite("state", grid.node(i + 1), next)?;
    }
    Ok(out)
}

/// Backward RK4 for the costate from `lambda(tf) = 0`, with state and
/// control linear between nodes.
pub fn integrate_adjoint_backward(
    model: &Model,
    objective: &Objective,
    state: &Series,
    control: &Series,
    grid: &TimeGrid,
) -> Result<Series> {
    let n = model.state_dim();
    let m = model.control_dim();
    if state.len() != grid.len() || state.dim() != n {
        return Err(Error::Dimension {
            what: "state samples",
            expected: grid.len(),
            got: state.len(),
        });
    }
    if control.len() != grid.len() || control.dim() != m {
        return Err(Error::Dimension {
            what: "control samples",
            expected: grid.len(),
            got: control.len(),
        });
    }
    let h = grid.step();
    let mut lam = Series::zeros(grid.len(), n);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut xmid = vec![0.0; n];
    let mut umid = vec![0.0; m];
    for i in (0..grid.n_steps()).rev() {
        let t1 = grid.node(i + 1);
        let tm = grid.node(i) + 0.5 * h;
        let l = lam.row(i + 1).to_vec();
        state.midpoint_into(i, &mut xmid);
        control.midpoint_into(i, &mut umid);
        model.adjoint_rhs(
            t1,
            state.row(i + 1),
            &l,
            control.row(i + 1),
            objective,
            &mut k1,
        )?;
        axpy(&mut tmp, &l, -0.5 * h, &k1);
        model.adjoint_rhs(tm, &xmid, &tmp, &umid, objective, &mut k2)?;
        axpy(&mut tmp, &l, -0.5 * h, &k2);
        model.adjoint_rhs(tm, &xmid, &tmp, &umid, objective, &mut k3)?;
        axpy(&mut tmp, &l, -h, &k3);
        model.adjoint_rhs(
            grid.node(i),
            state.row(i),
            &tmp,
            control.row(i),
            objective,
            &mut k4,
        )?;
        let prev = lam.row_mut(i);
        for j in 0..n {
            prev[j] = l[j] - h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        check_finite("adjoint", grid.node(i), prev)?;
    }
    Ok(lam)
}

#[inline]
fn axpy(out: &mut [f64], x: &[f64], a: f64, k: &[f64]) {
    for ((o, &xi), &ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// The control characterisation evaluated at every node.
pub fn characterize(
    model: &Model,
    objective: &Objective,
    state: &Series,
    adjoint: &Series,
    grid: &TimeGrid,
) -> Result<Series> {
    let mut u = Series::zeros(grid.len(), model.control_dim());
    for i in 0..grid.len() {
        model.control_characterization(
            grid.node(i),
            state.row(i),
            adjoint.row(i),
            objective,
            u.row_mut(i),
        )?;
    }
    Ok(u)
}

/// `dH/du` at every node of a trajectory carrying an adjoint. On the solver
/// grid this approximates the gradient of the discretised cost with respect
/// to each control node, divided by the step.
pub fn reduced_gradient(model: &Model, objective: &Objective, traj: &Trajectory) -> Result<Series> {
    let lam = traj
        .adjoint
        .as_ref()
        .ok_or_else(|| Error::Argument("trajectory has no adjoint".into()))?;
    let mut g = Series::zeros(traj.grid.len(), model.control_dim());
    for i in 0..traj.grid.len() {
        model.control_gradient(
            traj.grid.node(i),
            traj.state.row(i),
            lam.row(i),
            traj.control.row(i),
            objective,
            g.row_mut(i),
        )?;
    }
    Ok(g)
}

/// Simulates under `control` and returns the trajectory and its cost.
pub fn simulate(
    model: &Model,
    objective: &Objective,
    x0: &[f64],
    control: Series,
    grid: &TimeGrid,
) -> Result<(Trajectory, f64)> {
    let state = integrate_forward(model, x0, &control, grid)?;
    let traj = Trajectory::new(*grid, state, control)?;
    let cost = total_cost(model, &traj, objective)?;
    Ok((traj, cost))
}

fn min_relative_state(state: &Series) -> f64 {
    state
        .rows()
        .map(|r| {
            let n: f64 = r.iter().sum::<f64>().abs().max(1.0);
            r.iter().fold(f64::INFINITY, |m, &v| m.min(v / n))
        })
        .fold(f64::INFINITY, f64::min)
}

fn at_iteration(e: Error, k: usize) -> Error {
    match e {
        Error::NonFinite { what, t, .. } => Error::NonFinite {
            what,
            t,
            iteration: Some(k),
        },
        other => other,
    }
}

/// Forward-backward sweep on an explicit problem.
pub fn solve(
    model: &Model,
    objective: &Objective,
    x0: &[f64],
    grid: &TimeGrid,
    settings: &FbsSettings,
) -> Result<Solution> {
    let bad = settings.violations();
    if !bad.is_empty() {
        return Err(Error::Argument(bad.join("; ")));
    }
    let w = &objective.weights;
    let c = settings.relaxation;
    let mut u = settings.initial_series(grid, model.control_dim())?;
    for v in u.as_mut_slice() {
        *v = w.project(*v);
    }
    let mut x = integrate_forward(model, x0, &u, grid).map_err(|e| at_iteration(e, 0))?;
    let mut lam = integrate_adjoint_backward(model, objective, &x, &u, grid)
        .map_err(|e| at_iteration(e, 0))?;

    let mut history = Vec::new();
    let mut best: Option<(f64, Series, Series, Series)> = None;
    let mut converged = false;
    let mut change = f64::INFINITY;
    for k in 1..=settings.max_iterations {
        let step = (|| -> Result<f64> {
            let target = characterize(model, objective, &x, &lam, grid)?;
            let mut next = target;
            for (o, &prev) in next.as_mut_slice().iter_mut().zip(u.as_slice()) {
                *o = c * prev + (1.0 - c) * *o;
            }
            let diff = next.l1_distance(&u);
            let norm = next.l1_norm();
            u = next;
            x = integrate_forward(model, x0, &u, grid)?;
            lam = integrate_adjoint_backward(model, objective, &x, &u, grid)?;
            Ok(if diff == 0.0 { 0.0 } else { diff / norm })
        })();
        change = step.map_err(|e| at_iteration(e, k))?;
        let traj = Trajectory::new(*grid, x.clone(), u.clone())?;
        let cost = total_cost(model, &traj, objective)?;
        if !cost.is_finite() {
            return Err(Error::NonFinite {
                what: "cost",
                t: grid.tf(),
                iteration: Some(k),
            });
        }
        history.push(cost);
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, x.clone(), lam.clone(), u.clone()));
        }
        if change <= settings.tolerance {
            converged = true;
            break;
        }
    }

    let (cost, state, adjoint, control) = if converged {
        let cost = *history.last().expect("at least one iteration");
        (cost, x, lam, u)
    } else {
        best.expect("at least one iteration")
    };
    let terminal_adjoint_residual = adjoint
        .row(grid.len() - 1)
        .iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    let min_rel = min_relative_state(&state);
    let trajectory = Trajectory::new(*grid, state, control)?.with_adjoint(adjoint)?;
    Ok(Solution {
        trajectory,
        cost,
        report: SolveReport {
            iterations: history.len(),
            converged,
            cost_history: history,
            final_change: change,
            terminal_adjoint_residual,
            min_relative_state: min_rel,
        },
    })
}

/// Forward-backward sweep on a scenario.
pub fn solve_fbs(scenario: &ScenarioConfig) -> Result<Solution> {
    let model = scenario.model()?;
    let objective = scenario.objective();
    let x0 = scenario.initial_state()?;
    let grid = scenario.time_grid()?;
    solve(&model, &objective, &x0, &grid, &scenario.solver)
}
