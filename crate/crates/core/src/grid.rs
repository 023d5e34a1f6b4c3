use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t0 = nodes[0] < ... < nodes[n_steps] = tf` (years).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite()) || tf <= t0 {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got t0 = {t0}, tf = {tf}"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_steps must be at least 2, got {n_steps}"
            )));
        }
        Ok(Self { t0, tf, n_steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.tf - self.t0) / self.n_steps as f64
    }

    /// Time of node `i`. The last node is `tf` exactly.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.tf
        } else {
            self.t0 + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Same horizon with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_steps: self.n_steps * factor.max(1),
            ..*self
        }
    }

    /// Index of the left node of the cell containing `t`, together with the
    /// fractional position inside that cell.
    pub(crate) fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= self.t0 && t <= self.tf) {
            return Err(Error::OutOfRange {
                t,
                t0: self.t0,
                tf: self.tf,
            });
        }
        let s = (t - self.t0) / self.step();
        let i = (s.floor() as usize).min(self.n_steps - 1);
        Ok((i, s - i as f64))
    }
}

pub fn make_time_grid(t0: f64, tf: f64, n_steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(t0, tf, n_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_nodes() {
        let g = make_time_grid(0.0, 5.0, 5).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn fine_step() {
        let g = make_time_grid(0.0, 5.0, 5000).unwrap();
        assert_eq!(g.step(), 0.001);
        assert_eq!(g.node(5000), 5.0);
        let nodes = g.nodes();
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.step()).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate() {
        assert!(make_time_grid(0.0, 0.0, 10).is_err());
        assert!(make_time_grid(1.0, 0.0, 10).is_err());
        assert!(make_time_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn locate_cells() {
        let g = make_time_grid(0.0, 5.0, 5).unwrap();
        assert_eq!(g.locate(0.0).unwrap(), (0, 0.0));
        assert_eq!(g.locate(2.5).unwrap(), (2, 0.5));
        assert_eq!(g.locate(5.0).unwrap(), (4, 1.0));
        assert!(g.locate(6.0).is_err());
        assert!(g.locate(f64::NAN).is_err());
    }
}
