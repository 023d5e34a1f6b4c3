use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Per-node samples of a vector quantity, stored node-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    dim: usize,
    data: Vec<f64>,
}

impl Series {
    pub fn zeros(nodes: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; nodes * dim],
        }
    }

    /// Every node holds a copy of `value`.
    pub fn constant(nodes: usize, value: &[f64]) -> Self {
        let mut data = Vec::with_capacity(nodes * value.len());
        for _ in 0..nodes {
            data.extend_from_slice(value);
        }
        Self {
            dim: value.len(),
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension {
                    what: "series row",
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Values of component `k` across all nodes.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Linear blend of nodes `i` and `i + 1` at fraction `w`, written to `out`.
    pub(crate) fn lerp_into(&self, i: usize, w: f64, out: &mut [f64]) {
        let a = self.row(i);
        if w == 0.0 {
            out.copy_from_slice(a);
            return;
        }
        let b = self.row(i + 1);
        if w == 1.0 {
            out.copy_from_slice(b);
            return;
        }
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = x + w * (y - x);
        }
    }

    /// Midpoint of nodes `i` and `i + 1`.
    pub(crate) fn midpoint_into(&self, i: usize, out: &mut [f64]) {
        for ((o, &x), &y) in out.iter_mut().zip(self.row(i)).zip(self.row(i + 1)) {
            *o = 0.5 * (x + y);
        }
    }

    /// Sum over nodes of the L1 norm of each row.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Series) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// State, control and (optionally) adjoint samples on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub state: Series,
    pub control: Series,
    pub adjoint: Option<Series>,
    /// All compartments stayed above `-1e-9 * N` along the run.
    pub nonnegative: bool,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, state: Series, control: Series) -> Result<Self> {
        for (what, s) in [("state", &state), ("control", &control)] {
            if s.len() != grid.len() {
                return Err(Error::Dimension {
                    what,
                    expected: grid.len(),
                    got: s.len(),
                });
            }
        }
        let nonnegative = state_nonnegative(&state);
        Ok(Self {
            grid,
            state,
            control,
            adjoint: None,
            nonnegative,
        })
    }

    pub fn with_adjoint(mut self, adjoint: Series) -> Result<Self> {
        if adjoint.len() != self.grid.len() || adjoint.dim() != self.state.dim() {
            return Err(Error::Dimension {
                what: "adjoint",
                expected: self.grid.len(),
                got: adjoint.len(),
            });
        }
        self.adjoint = Some(adjoint);
        Ok(self)
    }

    /// Total population (sum of compartments) at each node.
    pub fn population(&self) -> Vec<f64> {
        self.state.rows().map(|r| r.iter().sum()).collect()
    }
}

pub(crate) fn state_nonnegative(state: &Series) -> bool {
    state.rows().all(|r| {
        let n: f64 = r.iter().sum();
        let floor = -1e-9 * n.abs().max(1.0);
        r.iter().all(|&v| v >= floor)
    })
}

/// Piecewise-linear interpolation of the state between grid nodes.
pub fn interpolate_state(traj: &Trajectory, t: f64) -> Result<Vec<f64>> {
    let (i, w) = traj.grid.locate(t)?;
    let mut out = vec![0.0; traj.state.dim()];
    traj.state.lerp_into(i, w, &mut out);
    Ok(out)
}
