//! Time-dependent model for South Korea with distancing (`u1`), case finding
//! (`u2`) and case holding (`u3`) controls.
//!
//! ```text
//! S'  = b N - mu S - (1 - u1) beta S I / N
//! L1' = (1 - u1) beta S I / N - (k(t) + u2 alpha + mu) L1 + (1 - u3) s r I
//! I'  = k(t) L1 - (r + mu) I
//! L5' = (1 - (1 - u3) s) r I + u2 alpha L1 - mu L5
//! ```
//!
//! `b`, `mu`, `k`, `s`, `r` may be piecewise-linear tables in time.

use super::{live_population, CostKind, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::{ParamValue, ParameterSet, Table};

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::KoreaTimeDependent,
    slug: "korea_time_dependent",
    title: "Time-dependent South Korea model with three controls",
    source: "Whang, Choi & Jung (2011) model with distancing, case finding and case holding",
    state_labels: &["S", "L1", "I", "L5"],
    control_labels: &["u1", "u2", "u3"],
    required: &["b", "mu", "k", "s", "r", "alpha", "beta"],
    optional: &[("N", "initial-state scale only")],
    fractions: &["s"],
    time_dependent: &["b", "mu", "k", "s", "r"],
    default_cost: CostKind::C1,
    infectious: &[2],
    latent: &[1],
    isolated: &[],
    constant_population: false,
};

pub(super) fn defaults() -> ParameterSet {
    let k = Table::new(vec![(0.0, 0.2), (5.0, 0.15), (20.0, 0.1)]).expect("static table");
    ParameterSet::from_pairs([
        ("b", 0.012),
        ("mu", 0.006),
        ("s", 0.15),
        ("r", 0.8),
        ("alpha", 0.5),
        ("beta", 6.0),
        ("N", 10000.0),
    ])
    .with("k", ParamValue::Table(k))
}

#[derive(Debug, Clone)]
pub(super) struct Korea {
    b: ParamValue,
    mu: ParamValue,
    k: ParamValue,
    s: ParamValue,
    r: ParamValue,
    alpha: f64,
    beta: f64,
}

struct Rates {
    b: f64,
    mu: f64,
    k: f64,
    s: f64,
    r: f64,
}

impl Korea {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        let get = |n: &str| {
            p.get(n)
                .cloned()
                .ok_or_else(|| crate::error::Error::Argument(format!("missing parameter `{n}`")))
        };
        Ok(Self {
            b: get("b")?,
            mu: get("mu")?,
            k: get("k")?,
            s: get("s")?,
            r: get("r")?,
            alpha: p.constant("alpha")?,
            beta: p.constant("beta")?,
        })
    }

    fn rates(&self, t: f64) -> Rates {
        Rates {
            b: self.b.eval(t),
            mu: self.mu.eval(t),
            k: self.k.eval(t),
            s: self.s.eval(t),
            r: self.r.eval(t),
        }
    }
}

impl Equations for Korea {
    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[sus, l1, i, l5] = x else { unreachable!() };
        let (u1, u2, u3) = (u[0], u[1], u[2]);
        let Rates { b, mu, k, s, r } = self.rates(t);
        let (alpha, beta) = (self.alpha, self.beta);
        let n = live_population(t, x)?;
        let infection = (1.0 - u1) * beta * sus * i / n;
        dx[0] = b * n - mu * sus - infection;
        dx[1] = infection - (k + u2 * alpha + mu) * l1 + (1.0 - u3) * s * r * i;
        dx[2] = k * l1 - (r + mu) * i;
        dx[3] = (1.0 - (1.0 - u3) * s) * r * i + u2 * alpha * l1 - mu * l5;
        Ok(())
    }

    fn costate(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[sus, _l1, i, _l5] = x else {
            unreachable!()
        };
        let &[ls, ll1, li, ll5] = lam else {
            unreachable!()
        };
        let (u1, u2, u3) = (u[0], u[1], u[2]);
        let Rates { b, mu, k, s, r } = self.rates(t);
        let (alpha, beta) = (self.alpha, self.beta);
        let n = live_population(t, x)?;
        let contact = (1.0 - u1) * beta;
        let c_inf = ll1 - ls;
        let relapse = (1.0 - u3) * s;
        let linear = [
            -mu * ls,
            -(k + u2 * alpha + mu) * ll1 + k * li + u2 * alpha * ll5,
            relapse * r * ll1 - (r + mu) * li + (1.0 - relapse) * r * ll5,
            -mu * ll5,
        ];
        for (j, o) in out.iter_mut().enumerate() {
            let mut d_inf = -contact * sus * i / (n * n);
            if j == 0 {
                d_inf += contact * i / n;
            }
            if j == 2 {
                d_inf += contact * sus / n;
            }
            // b N contributes b to every column of the S row.
            *o = -(c_inf * d_inf + ls * b + linear[j]);
        }
        Ok(())
    }

    fn switching(&self, t: f64, x: &[f64], lam: &[f64], _u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[sus, l1, i, _] = x else { unreachable!() };
        let &[ls, ll1, _, ll5] = lam else {
            unreachable!()
        };
        let Rates { s, r, .. } = self.rates(t);
        let n = live_population(t, x)?;
        out[0] = self.beta * sus * i / n * (ls - ll1);
        out[1] = self.alpha * l1 * (ll5 - ll1);
        out[2] = s * r * i * (ll5 - ll1);
        Ok(())
    }
}
