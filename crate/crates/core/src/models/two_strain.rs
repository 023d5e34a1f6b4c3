//! Two-strain (drug-sensitive / resistant) model with case finding `u1` on
//! latent treatment and case holding `u2` against treatment failure.
//!
//! State order: `S, L1, I1, L2, I2, T`. The objective targets the resistant
//! classes, `I = I2` and `L = L2`.

use super::{constant_or, CostKind, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::ParameterSet;

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::TwoStrainControlled,
    slug: "two_strain_controlled",
    title: "Two-strain TB with case finding and case holding",
    source:
        "Castillo-Chavez & Feng (1997) two-strain model, controls of Jung, Lenhart & Feng (2002)",
    state_labels: &["S", "L1", "I1", "L2", "I2", "T"],
    control_labels: &["u1", "u2"],
    required: &[
        "mu",
        "beta",
        "beta_star",
        "c",
        "sigma",
        "k1",
        "k2",
        "r1",
        "r2",
        "p",
        "q",
        "N",
    ],
    optional: &[("Lambda", "mu*N"), ("d1", "0"), ("d2", "0")],
    fractions: &["p", "q", "sigma"],
    time_dependent: &[],
    default_cost: CostKind::C1,
    infectious: &[4],
    latent: &[3],
    isolated: &[],
    constant_population: true,
};

pub(super) fn defaults() -> ParameterSet {
    ParameterSet::from_pairs([
        ("mu", 0.0143),
        ("beta", 13.0),
        ("beta_star", 13.0),
        ("c", 1.0),
        ("sigma", 0.9),
        ("k1", 0.5),
        ("k2", 1.0),
        ("r1", 2.0),
        ("r2", 1.0),
        ("p", 0.4),
        ("q", 0.1),
        ("N", 10000.0),
    ])
}

#[derive(Debug, Clone)]
pub(super) struct TwoStrain {
    lambda: f64,
    mu: f64,
    beta: f64,
    beta_star: f64,
    c: f64,
    sigma: f64,
    k1: f64,
    k2: f64,
    r1: f64,
    r2: f64,
    p: f64,
    q: f64,
    d1: f64,
    d2: f64,
    n: f64,
}

impl TwoStrain {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        let mu = p.constant("mu")?;
        let n = p.constant("N")?;
        Ok(Self {
            lambda: constant_or(p, "Lambda", mu * n)?,
            mu,
            beta: p.constant("beta")?,
            beta_star: p.constant("beta_star")?,
            c: p.constant("c")?,
            sigma: p.constant("sigma")?,
            k1: p.constant("k1")?,
            k2: p.constant("k2")?,
            r1: p.constant("r1")?,
            r2: p.constant("r2")?,
            p: p.constant("p")?,
            q: p.constant("q")?,
            d1: constant_or(p, "d1", 0.0)?,
            d2: constant_or(p, "d2", 0.0)?,
            n,
        })
    }
}

impl Equations for TwoStrain {
    fn rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[s, l1, i1, l2, i2, tr] = x else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let TwoStrain {
            lambda,
            mu,
            beta,
            beta_star,
            c,
            sigma,
            k1,
            k2,
            r1,
            r2,
            p,
            q,
            d1,
            d2,
            n,
        } = *self;
        let phi1 = beta * c / n;
        let phi2 = beta_star * c / n;
        let infection = phi1 * s * i1;
        let reinfection = sigma * phi1 * tr * i1;
        dx[0] = lambda - infection - mu * s - phi2 * s * i2;
        dx[1] = infection - (mu + k1 + u1 * r1) * l1 + reinfection + (1.0 - u2) * p * r2 * i1
            - phi2 * l1 * i2;
        dx[2] = k1 * l1 - (mu + r2 + d1) * i1;
        dx[3] = (1.0 - u2) * q * r2 * i1 - (mu + k2) * l2 + phi2 * (s + l1 + tr) * i2;
        dx[4] = k2 * l2 - (mu + d2) * i2;
        dx[5] = u1 * r1 * l1 + (1.0 - (1.0 - u2) * (p + q)) * r2 * i1
            - reinfection
            - mu * tr
            - phi2 * tr * i2;
        Ok(())
    }

    fn costate(&self, _t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[s, l1, i1, _l2, i2, tr] = x else {
            unreachable!()
        };
        let &[ls, ll1, li1, ll2, li2, lt] = lam else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let TwoStrain {
            mu,
            beta,
            beta_star,
            c,
            sigma,
            k1,
            k2,
            r1,
            r2,
            p,
            q,
            d1,
            d2,
            n,
            ..
        } = *self;
        let phi1 = beta * c / n;
        let phi2 = beta_star * c / n;
        let f1 = phi1 * i1;
        let f2 = phi2 * i2;
        let hold = 1.0 - u2;

        // Rows of lambda^T df/dx, one per state variable.
        let d_s = ls * (-f1 - mu - f2) + ll1 * f1 + ll2 * f2;
        let d_l1 = ll1 * (-(mu + k1 + u1 * r1) - f2) + li1 * k1 + ll2 * f2 + lt * u1 * r1;
        let d_i1 = ls * (-phi1 * s) + ll1 * (phi1 * s + sigma * phi1 * tr + hold * p * r2)
            - li1 * (mu + r2 + d1)
            + ll2 * hold * q * r2
            + lt * ((1.0 - hold * (p + q)) * r2 - sigma * phi1 * tr);
        let d_l2 = -ll2 * (mu + k2) + li2 * k2;
        let d_i2 = -ls * phi2 * s - ll1 * phi2 * l1 + ll2 * phi2 * (s + l1 + tr)
            - li2 * (mu + d2)
            - lt * phi2 * tr;
        let d_t = ll1 * sigma * f1 + ll2 * f2 + lt * (-sigma * f1 - mu - f2);

        for (o, v) in out.iter_mut().zip([d_s, d_l1, d_i1, d_l2, d_i2, d_t]) {
            *o = -v;
        }
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
        let (l1, i1) = (x[1], x[2]);
        let (ll1, ll2, lt) = (lam[1], lam[3], lam[5]);
        out[0] = self.r1 * l1 * (lt - ll1);
        out[1] = self.r2 * i1 * ((self.p + self.q) * lt - self.p * ll1 - self.q * ll2);
        Ok(())
    }
}
