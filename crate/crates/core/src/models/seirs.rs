//! SEIRS model with a case-finding control on progression from latency.
//!
//! ```text
//! S'  = Lambda - (beta c / N) S I1 - mu S
//! L1' = (beta c / N) S I1 - (mu + r1) L1 - (1 - u) k1 L1 + sigma (beta c / N) T I1
//! I1' = (1 - u) k1 L1 - (mu + r2 + d1) I1
//! T'  = r1 L1 + r2 I1 - sigma (beta c / N) T I1 - mu T
//! ```
//!
//! `N` is held constant. With `Lambda = mu N` and `d1 = 0` the compartments
//! sum to `N` for all time.

use super::{constant_or, CostKind, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::ParameterSet;

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::SeirsControlled,
    slug: "seirs_controlled",
    title: "SEIRS with case finding",
    source: "Castillo-Chavez & Feng (1997) single-strain SEIRS, case-finding control u",
    state_labels: &["S", "L1", "I1", "T"],
    control_labels: &["u"],
    required: &["mu", "beta", "c", "sigma", "k1", "r1", "r2", "N"],
    optional: &[("Lambda", "mu*N"), ("d1", "0")],
    fractions: &["sigma"],
    time_dependent: &[],
    default_cost: CostKind::C2,
    infectious: &[2],
    latent: &[1],
    isolated: &[],
    constant_population: true,
};

pub(super) fn defaults() -> ParameterSet {
    ParameterSet::from_pairs([
        ("mu", 0.0143),
        ("beta", 13.0),
        ("c", 1.0),
        ("sigma", 1.0),
        ("k1", 1.0),
        ("r1", 2.0),
        ("r2", 1.0),
        ("N", 10000.0),
    ])
}

#[derive(Debug, Clone)]
pub(super) struct Seirs {
    lambda: f64,
    mu: f64,
    beta: f64,
    c: f64,
    sigma: f64,
    k1: f64,
    r1: f64,
    r2: f64,
    d1: f64,
    n: f64,
}

impl Seirs {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        let mu = p.constant("mu")?;
        let n = p.constant("N")?;
        Ok(Self {
            lambda: constant_or(p, "Lambda", mu * n)?,
            mu,
            beta: p.constant("beta")?,
            c: p.constant("c")?,
            sigma: p.constant("sigma")?,
            k1: p.constant("k1")?,
            r1: p.constant("r1")?,
            r2: p.constant("r2")?,
            d1: constant_or(p, "d1", 0.0)?,
            n,
        })
    }
}

impl Equations for Seirs {
    fn rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[s, l, i, tr] = x else { unreachable!() };
        let Seirs {
            lambda,
            mu,
            beta,
            c,
            sigma,
            k1,
            r1,
            r2,
            d1,
            n,
        } = *self;
        let u = u[0];
        let phi = beta * c / n;
        let infection = phi * s * i;
        let reinfection = sigma * phi * tr * i;
        dx[0] = lambda - infection - mu * s;
        dx[1] = infection - (mu + r1 + (1.0 - u) * k1) * l + reinfection;
        dx[2] = (1.0 - u) * k1 * l - (mu + r2 + d1) * i;
        dx[3] = r1 * l + r2 * i - reinfection - mu * tr;
        Ok(())
    }

    fn costate(&self, _t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[s, _l, i, tr] = x else { unreachable!() };
        let &[l1, l2, l3, l4] = lam else {
            unreachable!()
        };
        let Seirs {
            mu,
            beta,
            c,
            sigma,
            k1,
            r1,
            r2,
            d1,
            n,
            ..
        } = *self;
        let progression = (1.0 - u[0]) * k1;
        let phi = beta * c / n;
        let force = phi * i;
        out[0] = l1 * (force + mu) - l2 * force;
        out[1] = l2 * (mu + r1 + progression) - l3 * progression - l4 * r1;
        out[2] = l1 * phi * s - l2 * (phi * s + sigma * phi * tr) + l3 * (mu + r2 + d1)
            - l4 * (r2 - sigma * phi * tr);
        out[3] = -l2 * sigma * force + l4 * (sigma * force + mu);
        Ok(())
    }

    fn switching(
        &self,
        _t: f64,
        x: &[f64],
        lam: &[f64],
        _u: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        // dH/du - B u = k1 L1 (lambda_L1 - lambda_I1); the minimiser is
        // clamp(k1 L1 (lambda_I1 - lambda_L1) / B, 0, 1).
        out[0] = self.k1 * x[1] * (lam[1] - lam[2]);
        Ok(())
    }
}
