//! Direct-method cross-check for the sweep: piecewise-constant controls on a
//! coarse grid, optimised by projected gradient descent with finite-difference
//! gradients of simulate-then-integrate. Nothing here touches the costate
//! code, and the cost quadrature is written out separately.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::Objective;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::models::Model;
use crate::scenario::ScenarioConfig;
use crate::solver::integrate_forward;
use crate::trajectory::{Series, Trajectory};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectSolution {
    /// Segment values, `coarse_steps` rows of `control_dim` entries.
    pub segments: Vec<Vec<f64>>,
    pub trajectory: Trajectory,
    pub cost: f64,
    pub iterations: usize,
    /// Projected-gradient norm fell below the threshold.
    pub converged: bool,
    /// A line search failed to find a decrease before the end.
    pub line_search_failed: bool,
    pub projected_gradient_norm: f64,
}

struct Problem {
    model: Model,
    objective: Objective,
    x0: Vec<f64>,
    grid: TimeGrid,
    segments: usize,
    m: usize,
}

impl Problem {
    fn new(scenario: &ScenarioConfig, segments: usize) -> Result<Self> {
        let model = scenario.model()?;
        let grid = scenario.time_grid()?;
        if segments == 0 || segments > grid.n_steps() {
            return Err(Error::Argument(format!(
                "coarse_steps must lie in 1..={}, got {segments}",
                grid.n_steps()
            )));
        }
        Ok(Self {
            m: model.control_dim(),
            objective: scenario.objective(),
            x0: scenario.initial_state()?,
            model,
            grid,
            segments,
        })
    }

    /// Samples segment values onto the solver nodes. Node `i` takes the
    /// segment containing `t_i`; the final node belongs to the last segment.
    fn expand(&self, v: &[f64]) -> Series {
        let n = self.grid.len();
        let mut s = Series::zeros(n, self.m);
        for i in 0..n {
            let seg = (i * self.segments / self.grid.n_steps()).min(self.segments - 1);
            s.row_mut(i)
                .copy_from_slice(&v[seg * self.m..(seg + 1) * self.m]);
        }
        s
    }

    fn run(&self, v: &[f64]) -> Result<(Series, Series, f64)> {
        let u = self.expand(v);
        let x = integrate_forward(&self.model, &self.x0, &u, &self.grid)?;
        let c = self.cost(&x, &u);
        Ok((x, u, c))
    }

    fn cost_of(&self, v: &[f64]) -> Result<f64> {
        self.run(v).map(|r| r.2)
    }

    /// Trapezoid rule over nodes, with the integrand assembled from the
    /// model definition rather than the model's own running cost.
    fn cost(&self, x: &Series, u: &Series) -> f64 {
        let def = self.model.definition();
        let w = &self.objective.weights;
        let a_i = if self.objective.kind.uses_infectious() {
            w.a1
        } else {
            0.0
        };
        let a_l = if self.objective.kind.uses_latent() {
            w.a2
        } else {
            0.0
        };
        let n = x.len();
        let mut acc = 0.0;
        for i in 0..n {
            let xi = x.row(i);
            let mut g = 0.0;
            for &k in def.infectious {
                g += a_i * xi[k];
            }
            for &k in def.latent {
                g += a_l * xi[k];
            }
            for &k in def.isolated {
                g += w.a_isolated * xi[k];
            }
            for (b, ui) in w.b.iter().zip(u.row(i)) {
                g += b * ui * ui / 2.0;
            }
            acc += if i == 0 || i + 1 == n { g / 2.0 } else { g };
        }
        acc * self.grid.step()
    }

    fn project(&self, v: &mut [f64]) {
        let w = &self.objective.weights;
        for x in v {
            *x = x.clamp(w.lower, w.upper);
        }
    }

    fn gradient(&self, v: &[f64], fd_step: f64) -> Result<Vec<f64>> {
        (0..v.len())
            .into_par_iter()
            .map(|j| {
                let mut p = v.to_vec();
                p[j] = v[j] + fd_step;
                let cp = self.cost_of(&p)?;
                p[j] = v[j] - fd_step;
                let cm = self.cost_of(&p)?;
                Ok((cp - cm) / (2.0 * fd_step))
            })
            .collect()
    }

    fn projected_gradient_norm(&self, v: &[f64], g: &[f64]) -> f64 {
        let mut p: Vec<f64> = v.iter().zip(g).map(|(a, b)| a - b).collect();
        self.project(&mut p);
        p.iter().zip(v).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Best constant control on a uniform lattice with `grid_points` values per
/// control dimension, with its cost.
pub fn best_constant_control(
    scenario: &ScenarioConfig,
    grid_points: usize,
) -> Result<(Vec<f64>, f64)> {
    if grid_points < 2 {
        return Err(Error::Argument(format!(
            "grid_points must be at least 2, got {grid_points}"
        )));
    }
    let prob = Problem::new(scenario, 1)?;
    let w = &prob.objective.weights;
    let total = grid_points.pow(prob.m as u32);
    let values: Vec<(Vec<f64>, f64)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut k = flat;
            let v: Vec<f64> = (0..prob.m)
                .map(|_| {
                    let idx = k % grid_points;
                    k /= grid_points;
                    w.lower + (w.upper - w.lower) * idx as f64 / (grid_points - 1) as f64
                })
                .collect();
            let c = prob.cost_of(&v)?;
            Ok((v, c))
        })
        .collect::<Result<_>>()?;
    Ok(values
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("lattice is non-empty"))
}

/// Projected gradient descent with Barzilai-Borwein steps and Armijo
/// backtracking, started from the best constant control on an 11-point
/// lattice. Returns the best iterate found.
pub fn solve_direct(
    scenario: &ScenarioConfig,
    coarse_steps: usize,
    fd_step: f64,
    max_iters: usize,
) -> Result<DirectSolution> {
    if !fd_step.is_finite() || fd_step <= 0.0 {
        return Err(Error::Argument(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let prob = Problem::new(scenario, coarse_steps)?;
    let (start, _) = best_constant_control(scenario, 11)?;
    let mut v: Vec<f64> = (0..coarse_steps)
        .flat_map(|_| start.iter().copied())
        .collect();
    let mut cost = prob.cost_of(&v)?;
    let mut g = prob.gradient(&v, fd_step)?;
    let mut pg = prob.projected_gradient_norm(&v, &g);
    let threshold = 1e-5 * pg.max(1e-300);
    let mut alpha = 1.0 / g.iter().fold(1e-12, |m: f64, x| m.max(x.abs()));
    let mut iterations = 0;
    let mut converged = pg <= threshold;
    let mut line_search_failed = false;

    while !converged && iterations < max_iters {
        iterations += 1;
        let mut accepted = None;
        let mut step = alpha;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            prob.project(&mut trial);
            let decrease: f64 = g
                .iter()
                .zip(trial.iter().zip(&v))
                .map(|(gi, (t, x))| gi * (t - x))
                .sum();
            let c = prob.cost_of(&trial)?;
            if c <= cost + ARMIJO * decrease {
                accepted = Some((trial, c));
                break;
            }
            step /= 2.0;
        }
        let Some((next, c)) = accepted else {
            line_search_failed = true;
            break;
        };
        let g_next = prob.gradient(&next, fd_step)?;
        let s: Vec<f64> = next.iter().zip(&v).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        let stalled = ss == 0.0;
        alpha = if sy > 0.0 { ss / sy } else { step * 2.0 };
        v = next;
        cost = c;
        g = g_next;
        pg = prob.projected_gradient_norm(&v, &g);
        converged = pg <= threshold;
        if stalled {
            break;
        }
    }

    let (x, u, cost_check) = prob.run(&v)?;
    debug_assert_eq!(cost_check, cost);
    Ok(DirectSolution {
        segments: v.chunks(prob.m).map(<[f64]>::to_vec).collect(),
        trajectory: Trajectory::new(prob.grid, x, u)?,
        cost: cost_check,
        iterations,
        converged,
        line_search_failed,
        projected_gradient_norm: pg,
    })
}
