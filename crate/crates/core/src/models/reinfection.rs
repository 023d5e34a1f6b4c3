//! Exogenous-reinfection model with a control `u` that blocks reinfection of
//! latent individuals. The population `N(t)` is the live compartment sum.
//!
//! ```text
//! S'  = Lambda - beta c S I1/N - mu S
//! L1' = beta c S I1/N - rho beta c (1 - u) L1 I1/N - (mu + k1) L1 + sigma beta c T I1/N
//! I1' = rho beta c (1 - u) L1 I1/N + k1 L1 - (mu + r2 + d1) I1
//! T'  = r2 I1 - sigma beta c T I1/N - mu T
//! ```

use super::{constant_or, live_population, CostKind, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::ParameterSet;

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::ReinfectionControlled,
    slug: "reinfection_controlled",
    title: "Exogenous reinfection with reinfection-prevention control",
    source: "Castillo-Chavez & Feng (2000) reinfection model, control of Hattaf et al. (2009)",
    state_labels: &["S", "L1", "I1", "T"],
    control_labels: &["u"],
    required: &["Lambda", "mu", "beta", "c", "sigma", "k1", "r2", "rho"],
    optional: &[("d1", "0"), ("N", "initial-state scale only")],
    fractions: &["sigma"],
    time_dependent: &[],
    default_cost: CostKind::C2,
    infectious: &[2],
    latent: &[1],
    isolated: &[],
    constant_population: false,
};

pub(super) fn defaults() -> ParameterSet {
    ParameterSet::from_pairs([
        ("Lambda", 143.0),
        ("mu", 0.0143),
        ("beta", 13.0),
        ("c", 1.0),
        ("sigma", 1.0),
        ("k1", 1.0),
        ("r2", 1.0),
        ("rho", 0.4),
        ("d1", 0.1),
        ("N", 10000.0),
    ])
}

#[derive(Debug, Clone)]
pub(super) struct Reinfection {
    lambda: f64,
    mu: f64,
    beta: f64,
    c: f64,
    sigma: f64,
    k1: f64,
    r2: f64,
    rho: f64,
    d1: f64,
}

impl Reinfection {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        Ok(Self {
            lambda: p.constant("Lambda")?,
            mu: p.constant("mu")?,
            beta: p.constant("beta")?,
            c: p.constant("c")?,
            sigma: p.constant("sigma")?,
            k1: p.constant("k1")?,
            r2: p.constant("r2")?,
            rho: p.constant("rho")?,
            d1: constant_or(p, "d1", 0.0)?,
        })
    }
}

impl Equations for Reinfection {
    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[s, l, i, tr] = x else { unreachable!() };
        let Reinfection {
            lambda,
            mu,
            beta,
            c,
            sigma,
            k1,
            r2,
            rho,
            d1,
        } = *self;
        let n = live_population(t, x)?;
        let force = beta * c * i / n;
        let infection = force * s;
        let exogenous = rho * (1.0 - u[0]) * force * l;
        let reinfection = sigma * force * tr;
        dx[0] = lambda - infection - mu * s;
        dx[1] = infection - exogenous - (mu + k1) * l + reinfection;
        dx[2] = exogenous + k1 * l - (mu + r2 + d1) * i;
        dx[3] = r2 * i - reinfection - mu * tr;
        Ok(())
    }

    fn costate(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[s, l, i, tr] = x else { unreachable!() };
        let &[ls, ll, li, lt] = lam else {
            unreachable!()
        };
        let Reinfection {
            mu,
            beta,
            c,
            sigma,
            k1,
            r2,
            rho,
            d1,
            ..
        } = *self;
        let n = live_population(t, x)?;
        let force = beta * c * i / n;
        let open = rho * (1.0 - u[0]);

        // Coefficients multiplying each flux in lambda^T f.
        let c_inf = ll - ls;
        let c_exo = li - ll;
        let c_re = ll - lt;

        let linear = [
            -mu * ls,
            -(mu + k1) * ll + k1 * li,
            -(mu + r2 + d1) * li + r2 * lt,
            -mu * lt,
        ];
        for (j, o) in out.iter_mut().enumerate() {
            // d(force)/dx_j: every compartment enters N, only I1 the numerator.
            let mut g = -force / n;
            if j == 2 {
                g += beta * c / n;
            }
            let d_inf = g * s + if j == 0 { force } else { 0.0 };
            let d_exo = open * (g * l + if j == 1 { force } else { 0.0 });
            let d_re = sigma * (g * tr + if j == 3 { force } else { 0.0 });
            *o = -(c_inf * d_inf + c_exo * d_exo + c_re * d_re + linear[j]);
        }
        Ok(())
    }

    fn switching(&self, t: f64, x: &[f64], lam: &[f64], _u: &[f64], out: &mut [f64]) -> Result<()> {
        let n = live_population(t, x)?;
        let force = self.beta * self.c * x[2] / n;
        out[0] = self.rho * force * x[1] * (lam[1] - lam[2]);
        Ok(())
    }
}
