//! Cost functionals and their quadrature along a trajectory.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::trajectory::Trajectory;

/// Which state classes enter the running cost.
///
/// * `C1`: `A1 I + A2 L + sum B_i/2 u_i^2`
/// * `C2`: `A1 I + sum B_i/2 u_i^2`
/// * `C3`: `A2 L + sum B_i/2 u_i^2`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostKind {
    C1,
    C2,
    C3,
}

impl CostKind {
    pub fn uses_infectious(self) -> bool {
        matches!(self, CostKind::C1 | CostKind::C2)
    }

    pub fn uses_latent(self) -> bool {
        matches!(self, CostKind::C1 | CostKind::C3)
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CostKind::C1 => "C1",
            CostKind::C2 => "C2",
            CostKind::C3 => "C3",
        };
        f.write_str(s)
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C1" | "c1" => Ok(CostKind::C1),
            "C2" | "c2" => Ok(CostKind::C2),
            "C3" | "c3" => Ok(CostKind::C3),
            other => Err(Error::Argument(format!("unknown cost kind `{other}`"))),
        }
    }
}

/// Balancing factors of the objective and the admissible control box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// Weight on the infectious measure.
    pub a1: f64,
    /// Weight on the latent measure.
    pub a2: f64,
    /// Weight on the isolated class (isolation/immigration model only).
    pub a_isolated: f64,
    /// Control-effort weights, one per control.
    pub b: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl CostWeights {
    pub fn new(a1: f64, a2: f64, b: Vec<f64>) -> Self {
        Self {
            a1,
            a2,
            a_isolated: 0.0,
            b,
            lower: 0.0,
            upper: 1.0,
        }
    }

    /// Clamp `v` into the admissible interval.
    #[inline]
    pub fn project(&self, v: f64) -> f64 {
        v.max(self.lower).min(self.upper)
    }

    /// Every violated weight constraint, as human-readable messages.
    pub fn violations(&self, control_dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("A1", self.a1),
            ("A2", self.a2),
            ("A_isolated", self.a_isolated),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(format!("{name} >= 0 (got {v})"));
            }
        }
        if self.b.len() != control_dim {
            out.push(format!(
                "B has {} entries, model has {control_dim} controls",
                self.b.len()
            ));
        }
        for (i, &b) in self.b.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                out.push(format!("B_i > 0 (B{} = {b})", i + 1));
            }
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower <= self.upper) {
            out.push(format!(
                "control bounds lower <= upper (got [{}, {}])",
                self.lower, self.upper
            ));
        }
        out
    }
}

/// A cost functional: its kind together with its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: CostKind,
    pub weights: CostWeights,
}

impl Objective {
    pub fn new(kind: CostKind, weights: CostWeights) -> Self {
        Self { kind, weights }
    }

    /// Effective weight on the infectious measure under this kind.
    pub fn infectious_weight(&self) -> f64 {
        if self.kind.uses_infectious() {
            self.weights.a1
        } else {
            0.0
        }
    }

    pub fn latent_weight(&self) -> f64 {
        if self.kind.uses_latent() {
            self.weights.a2
        } else {
            0.0
        }
    }
}

/// Composite trapezoidal quadrature of the running cost over the grid.
pub fn total_cost(model: &Model, traj: &Trajectory, objective: &Objective) -> Result<f64> {
    let n = traj.grid.len();
    if traj.control.len() != n || traj.control.dim() != model.control_dim() {
        return Err(Error::Dimension {
            what: "control samples",
            expected: n,
            got: traj.control.len(),
        });
    }
    let h = traj.grid.step();
    let mut sum = 0.0;
    for i in 0..n {
        let g = model.running_cost(traj.state.row(i), traj.control.row(i), objective);
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        sum += w * g;
    }
    Ok(h * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::models::{default_parameters, ModelId};
    use crate::trajectory::Series;

    fn seirs() -> Model {
        Model::new(
            ModelId::SeirsControlled,
            &default_parameters(ModelId::SeirsControlled),
        )
        .unwrap()
    }

    fn flat(state: &[f64], u: f64) -> Trajectory {
        let grid = TimeGrid::new(0.0, 5.0, 50).unwrap();
        Trajectory::new(
            grid,
            Series::constant(grid.len(), state),
            Series::constant(grid.len(), &[u]),
        )
        .unwrap()
    }

    #[test]
    fn zero_integrand() {
        let obj = Objective::new(CostKind::C2, CostWeights::new(1.0, 0.0, vec![100.0]));
        let c = total_cost(&seirs(), &flat(&[10.0, 5.0, 0.0, 1.0], 0.0), &obj).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn pure_control_effort() {
        let obj = Objective::new(CostKind::C2, CostWeights::new(1.0, 0.0, vec![100.0]));
        let c = total_cost(&seirs(), &flat(&[10.0, 5.0, 0.0, 1.0], 1.0), &obj).unwrap();
        assert!((c - 250.0).abs() < 1e-10);
    }

    #[test]
    fn missing_controls() {
        let obj = Objective::new(CostKind::C2, CostWeights::new(1.0, 0.0, vec![100.0]));
        let mut traj = flat(&[10.0, 5.0, 0.0, 1.0], 1.0);
        traj.control = Series::constant(3, &[1.0]);
        assert!(total_cost(&seirs(), &traj, &obj).is_err());
    }

    #[test]
    fn second_order_convergence() {
        // Integrand exp(t) on [0, 1] through the I1 slot: error ratio ~4 per halving.
        let model = seirs();
        let obj = Objective::new(CostKind::C2, CostWeights::new(1.0, 0.0, vec![1.0]));
        let exact = std::f64::consts::E - 1.0;
        let err = |n: usize| {
            let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
            let rows: Vec<Vec<f64>> = grid
                .nodes()
                .iter()
                .map(|t| vec![0.0, 0.0, t.exp(), 0.0])
                .collect();
            let traj = Trajectory::new(
                grid,
                Series::from_rows(&rows).unwrap(),
                Series::constant(grid.len(), &[0.0]),
            )
            .unwrap();
            (total_cost(&model, &traj, &obj).unwrap() - exact).abs()
        };
        let ratio = err(40) / err(80);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn weight_violations() {
        let w = CostWeights::new(1.0, 0.0, vec![0.0]);
        let v = w.violations(1);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("B_i > 0"));
        assert!(CostWeights::new(-1.0, 0.0, vec![1.0]).violations(1)[0].contains("A1"));
        assert!(!CostWeights::new(1.0, 0.0, vec![1.0])
            .violations(2)
            .is_empty());
    }
}
