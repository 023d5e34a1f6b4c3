//! Hamiltonian evaluation and sampled checks of the first-order conditions:
//! the costate flow against finite differences of `H`, and the control law
//! against a brute-force search of `H` over the control box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::{CostWeights, Objective};
use crate::error::{Error, Result};
use crate::models::Model;

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Lattice points per control dimension in the stationarity search.
pub const STATIONARITY_GRID: usize = 101;

/// `H = g(x, u) + <lambda, f(t, x, u)>`.
pub fn hamiltonian(
    model: &Model,
    t: f64,
    x: &[f64],
    lam: &[f64],
    u: &[f64],
    objective: &Objective,
) -> Result<f64> {
    let f = model.eval_dynamics(t, x, u)?;
    if lam.len() != f.len() {
        return Err(Error::Dimension {
            what: "adjoint",
            expected: f.len(),
            got: lam.len(),
        });
    }
    if objective.weights.b.len() != model.control_dim() {
        return Err(Error::Dimension {
            what: "control weights",
            expected: model.control_dim(),
            got: objective.weights.b.len(),
        });
    }
    let dot: f64 = lam.iter().zip(&f).map(|(l, v)| l * v).sum();
    Ok(model.running_cost(x, u, objective) + dot)
}

/// Unchecked variant reusing a scratch buffer, for the inner search loops.
fn h_fast(
    model: &Model,
    t: f64,
    x: &[f64],
    lam: &[f64],
    u: &[f64],
    objective: &Objective,
    scratch: &mut [f64],
) -> Result<f64> {
    model.dynamics(t, x, u, scratch)?;
    let dot: f64 = lam.iter().zip(scratch.iter()).map(|(l, v)| l * v).sum();
    Ok(model.running_cost(x, u, objective) + dot)
}

/// One random evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub lam: Vec<f64>,
    pub u: Vec<f64>,
}

/// Residuals at a single sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResidual {
    pub index: usize,
    pub t: f64,
    pub adjoint_residual: f64,
    pub stationarity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Largest `|a - b| / max(1, |b|)` over samples and components.
    pub max_adjoint_residual: f64,
    /// Largest `(H(u*) - min_grid H) / |H(u*)|`, clipped at zero.
    pub max_stationarity_residual: f64,
    pub samples: usize,
    pub seed: u64,
    /// Up to five samples with the largest residuals, worst first.
    pub worst: Vec<SampleResidual>,
}

impl ConsistencyReport {
    fn from_residuals(mut rows: Vec<SampleResidual>, seed: u64) -> Self {
        let samples = rows.len();
        let max_adjoint_residual = rows.iter().map(|r| r.adjoint_residual).fold(0.0, f64::max);
        let max_stationarity_residual = rows
            .iter()
            .map(|r| r.stationarity_residual)
            .fold(0.0, f64::max);
        rows.sort_by(|a, b| {
            let ka = a.adjoint_residual.max(a.stationarity_residual);
            let kb = b.adjoint_residual.max(b.stationarity_residual);
            kb.total_cmp(&ka)
        });
        rows.truncate(5);
        Self {
            max_adjoint_residual,
            max_stationarity_residual,
            samples,
            seed,
            worst: rows,
        }
    }
}

/// Draws `count` points: states in `[0.01, 1] * N`, adjoints in `[-1, 1]`,
/// admissible controls and times in `[0, 5]`.
pub fn draw_samples(model: &Model, w: &CostWeights, count: usize, seed: u64) -> Vec<Sample> {
    let scale = model.params().constant("N").unwrap_or(10_000.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Sample {
            t: rng.gen_range(0.0..=5.0),
            x: (0..model.state_dim())
                .map(|_| scale * rng.gen_range(0.01..=1.0))
                .collect(),
            lam: (0..model.state_dim())
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect(),
            u: (0..model.control_dim())
                .map(|_| rng.gen_range(w.lower..=w.upper))
                .collect(),
        })
        .collect()
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        Err(Error::Argument("at least one sample is required".into()))
    } else {
        Ok(())
    }
}

/// Compares the model's costate flow with central differences of `-H` in `x`.
pub fn verify_adjoint_consistency(
    model: &Model,
    objective: &Objective,
    samples: usize,
    fd_step: f64,
    seed: u64,
) -> Result<ConsistencyReport> {
    verify_adjoint_with(
        model,
        objective,
        samples,
        fd_step,
        seed,
        |t, x, lam, u, out| model.adjoint_rhs(t, x, lam, u, objective, out),
    )
}

/// As [`verify_adjoint_consistency`], with the costate flow supplied by the
/// caller. Used to confirm that a corrupted flow is caught.
pub fn verify_adjoint_with<F>(
    model: &Model,
    objective: &Objective,
    samples: usize,
    fd_step: f64,
    seed: u64,
    adjoint: F,
) -> Result<ConsistencyReport>
where
    F: Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) -> Result<()> + Sync,
{
    check_samples(samples)?;
    if !fd_step.is_finite() || fd_step <= 0.0 {
        return Err(Error::Argument(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let points = draw_samples(model, &objective.weights, samples, seed);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, s)| -> Result<SampleResidual> {
            let n = s.x.len();
            let mut analytic = vec![0.0; n];
            adjoint(s.t, &s.x, &s.lam, &s.u, &mut analytic)?;
            let mut scratch = vec![0.0; n];
            let mut xp = s.x.clone();
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let h = fd_step * s.x[i].abs().max(1.0);
                xp[i] = s.x[i] + h;
                let hp = h_fast(model, s.t, &xp, &s.lam, &s.u, objective, &mut scratch)?;
                xp[i] = s.x[i] - h;
                let hm = h_fast(model, s.t, &xp, &s.lam, &s.u, objective, &mut scratch)?;
                xp[i] = s.x[i];
                let fd = -(hp - hm) / (2.0 * h);
                worst = worst.max((analytic[i] - fd).abs() / fd.abs().max(1.0));
            }
            Ok(SampleResidual {
                index,
                t: s.t,
                adjoint_residual: worst,
                stationarity_residual: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistencyReport::from_residuals(rows, seed))
}

/// Checks that the control law attains the minimum of `H` over a uniform
/// lattice of the full control box, `STATIONARITY_GRID` points per axis.
pub fn verify_control_stationarity(
    model: &Model,
    objective: &Objective,
    samples: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    check_samples(samples)?;
    let w = &objective.weights;
    let m = model.control_dim();
    let points = draw_samples(model, w, samples, seed);
    let axis: Vec<f64> = (0..STATIONARITY_GRID)
        .map(|k| w.lower + (w.upper - w.lower) * k as f64 / (STATIONARITY_GRID - 1) as f64)
        .collect();
    let total = STATIONARITY_GRID.pow(m as u32);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, s)| -> Result<SampleResidual> {
            let mut scratch = vec![0.0; s.x.len()];
            let ustar = model.eval_control(s.t, &s.x, &s.lam, objective)?;
            let hstar = h_fast(model, s.t, &s.x, &s.lam, &ustar, objective, &mut scratch)?;
            let mut v = vec![0.0; m];
            let mut best = f64::INFINITY;
            for flat in 0..total {
                let mut k = flat;
                for vi in v.iter_mut() {
                    *vi = axis[k % STATIONARITY_GRID];
                    k /= STATIONARITY_GRID;
                }
                best = best.min(h_fast(
                    model,
                    s.t,
                    &s.x,
                    &s.lam,
                    &v,
                    objective,
                    &mut scratch,
                )?);
            }
            let excess = (hstar - best).max(0.0);
            Ok(SampleResidual {
                index,
                t: s.t,
                adjoint_residual: 0.0,
                stationarity_residual: if excess == 0.0 {
                    0.0
                } else {
                    excess / hstar.abs()
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistencyReport::from_residuals(rows, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostKind;
    use crate::models::{default_parameters, ModelId};

    fn seirs(k1: f64) -> Model {
        let p = default_parameters(ModelId::SeirsControlled).with("k1", k1);
        Model::new(ModelId::SeirsControlled, &p).unwrap()
    }

    fn objective(a: f64, b: f64) -> Objective {
        Objective::new(CostKind::C2, CostWeights::new(a, 0.0, vec![b]))
    }

    #[test]
    fn zero_adjoint_gives_running_cost() {
        let m = seirs(1.0);
        let x = [6000.0, 3000.0, 700.0, 300.0];
        let obj = objective(1.0, 100.0);
        let h = hamiltonian(&m, 0.0, &x, &[0.0; 4], &[0.4], &obj).unwrap();
        assert_eq!(h, m.running_cost(&x, &[0.4], &obj));
    }

    #[test]
    fn zero_cost_gives_adjoint_product() {
        let m = seirs(1.0);
        let x = [6000.0, 3000.0, 700.0, 300.0];
        let lam = [0.1, -0.4, 0.9, 0.2];
        let f = m.eval_dynamics(0.0, &x, &[0.0]).unwrap();
        let want: f64 = lam.iter().zip(&f).map(|(a, b)| a * b).sum();
        let h = hamiltonian(&m, 0.0, &x, &lam, &[0.0], &objective(0.0, 100.0)).unwrap();
        assert_eq!(h, want);
    }

    #[test]
    fn hamiltonian_matches_hand_substitution() {
        // x = (76, 38, 5, 1)/120 N, lambda = (0.3, -0.2, 0.7, 0.1), u = 0.25.
        let m = seirs(1.0);
        let n = 10_000.0;
        let x = [
            76.0 / 120.0 * n,
            38.0 / 120.0 * n,
            5.0 / 120.0 * n,
            1.0 / 120.0 * n,
        ];
        let h = hamiltonian(
            &m,
            0.0,
            &x,
            &[0.3, -0.2, 0.7, 0.1],
            &[0.25],
            &objective(1.0, 100.0),
        )
        .unwrap();
        let want = 562_268.0 / 225.0;
        assert!((h - want).abs() <= 1e-12 * want, "{h} vs {want}");
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = seirs(1.0);
        let err = hamiltonian(&m, 0.0, &[1.0; 4], &[0.0; 3], &[0.0], &objective(1.0, 1.0));
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn zero_samples_rejected() {
        let m = seirs(1.0);
        let obj = objective(1.0, 100.0);
        assert!(verify_adjoint_consistency(&m, &obj, 0, 1e-6, 1).is_err());
        assert!(verify_control_stationarity(&m, &obj, 0, 1).is_err());
    }

    #[test]
    fn perturbed_adjoint_is_detected() {
        let m = seirs(1.0);
        let obj = objective(1.0, 100.0);
        let rep = verify_adjoint_with(&m, &obj, 10, 1e-6, 3, |t, x, l, u, out| {
            m.adjoint_rhs(t, x, l, u, &obj, out)?;
            out[1] += 1.0;
            Ok(())
        })
        .unwrap();
        assert!(rep.max_adjoint_residual > 1e-2, "{rep:?}");
    }

    #[test]
    fn seirs_costate_matches_differences() {
        let m = seirs(1.0);
        let rep = verify_adjoint_consistency(&m, &objective(1.0, 100.0), 100, 1e-6, DEFAULT_SEED)
            .unwrap();
        assert!(rep.max_adjoint_residual < 1e-6, "{rep:?}");
        assert_eq!(rep.samples, 100);
        assert!(rep.worst.len() <= 5);
    }

    #[test]
    fn negative_switching_sign_gives_zero_control() {
        // lambda_I < lambda_L: H is increasing in u on [0, 1].
        let m = seirs(1.0);
        let obj = objective(1.0, 100.0);
        let x = [5000.0, 3000.0, 1000.0, 1000.0];
        let lam = [0.0, 0.5, 0.1, 0.0];
        let u = m.eval_control(1.0, &x, &lam, &obj).unwrap();
        assert_eq!(u, vec![0.0]);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=100 {
            let h = hamiltonian(&m, 1.0, &x, &lam, &[k as f64 / 100.0], &obj).unwrap();
            assert!(h >= prev);
            prev = h;
        }
    }
}
