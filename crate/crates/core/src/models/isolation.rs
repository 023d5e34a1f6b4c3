//! Immigration and isolation model: `u1` screens arriving immigrants, `u2`
//! scales isolation of active cases into the class `J`.
//!
//! State order: `S, L1, I1, J, T`; `N(t)` is the live compartment sum. The
//! immigrant inflow is the parameter `immigration`, of which a fraction
//! `p_star` arrives latent and `q_star` active.

use super::{live_population, CostKind, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::ParameterSet;

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::IsolationImmigration,
    slug: "isolation_immigration",
    title: "Immigration screening and isolation of active cases",
    source: "Okuonghae & Aihie (2010) model with immigration and isolation",
    state_labels: &["S", "L1", "I1", "J", "T"],
    control_labels: &["u1", "u2"],
    required: &[
        "Lambda",
        "immigration",
        "p_star",
        "q_star",
        "mu",
        "beta",
        "c",
        "l",
        "m",
        "p",
        "sigma",
        "sigma_star",
        "k1",
        "d3",
        "d4",
        "r2",
        "r3",
        "xi",
    ],
    optional: &[("N", "initial-state scale only")],
    fractions: &["p_star", "q_star", "l", "m", "sigma", "sigma_star"],
    time_dependent: &[],
    default_cost: CostKind::C2,
    infectious: &[2],
    latent: &[1],
    isolated: &[3],
    constant_population: false,
};

pub(super) fn defaults() -> ParameterSet {
    ParameterSet::from_pairs([
        ("Lambda", 143.0),
        ("immigration", 50.0),
        ("p_star", 0.3),
        ("q_star", 0.05),
        ("mu", 0.0143),
        ("beta", 8.0),
        ("c", 1.0),
        ("l", 0.3),
        ("m", 0.1),
        ("p", 0.4),
        ("sigma", 0.9),
        ("sigma_star", 0.2),
        ("k1", 0.5),
        ("d3", 0.1),
        ("d4", 0.05),
        ("r2", 1.0),
        ("r3", 1.5),
        ("xi", 0.5),
        ("N", 10000.0),
    ])
}

#[derive(Debug, Clone)]
pub(super) struct Isolation {
    lambda: f64,
    inflow: f64,
    p_star: f64,
    q_star: f64,
    mu: f64,
    beta: f64,
    c: f64,
    l: f64,
    m: f64,
    p: f64,
    sigma: f64,
    sigma_star: f64,
    k1: f64,
    d3: f64,
    d4: f64,
    r2: f64,
    r3: f64,
    xi: f64,
}

impl Isolation {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        Ok(Self {
            lambda: p.constant("Lambda")?,
            inflow: p.constant("immigration")?,
            p_star: p.constant("p_star")?,
            q_star: p.constant("q_star")?,
            mu: p.constant("mu")?,
            beta: p.constant("beta")?,
            c: p.constant("c")?,
            l: p.constant("l")?,
            m: p.constant("m")?,
            p: p.constant("p")?,
            sigma: p.constant("sigma")?,
            sigma_star: p.constant("sigma_star")?,
            k1: p.constant("k1")?,
            d3: p.constant("d3")?,
            d4: p.constant("d4")?,
            r2: p.constant("r2")?,
            r3: p.constant("r3")?,
            xi: p.constant("xi")?,
        })
    }
}

impl Equations for Isolation {
    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[s, l1, i1, j, tr] = x else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let Isolation {
            lambda,
            inflow,
            p_star,
            q_star,
            mu,
            beta,
            c,
            l,
            m,
            p,
            sigma,
            sigma_star,
            k1,
            d3,
            d4,
            r2,
            r3,
            xi,
        } = *self;
        let n = live_population(t, x)?;
        let force = beta * c * (i1 + l * j) / n;
        let treated_force = beta * c * (i1 + sigma_star * j) / n;
        let infection = force * s;
        let relapse = p * force * l1;
        let treated = sigma * treated_force * tr;
        let isolation = (1.0 + u2) * xi * i1;
        dx[0] = lambda + (1.0 - (1.0 - u1) * (p_star + q_star)) * inflow - infection - mu * s;
        dx[1] = (1.0 - u1) * p_star * inflow + (1.0 - m) * infection - relapse + treated
            - (k1 + mu) * l1;
        dx[2] = (1.0 - u1) * q_star * inflow + m * infection + relapse + k1 * l1
            - (mu + d3 + r2) * i1
            - isolation;
        dx[3] = isolation - (r3 + mu + d4) * j;
        dx[4] = r2 * i1 + r3 * j - treated - mu * tr;
        Ok(())
    }

    fn costate(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[s, l1, i1, j, tr] = x else {
            unreachable!()
        };
        let &[ls, ll, li, lj, lt] = lam else {
            unreachable!()
        };
        let u2 = u[1];
        let Isolation {
            mu,
            beta,
            c,
            l,
            m,
            p,
            sigma,
            sigma_star,
            k1,
            d3,
            d4,
            r2,
            r3,
            xi,
            ..
        } = *self;
        let n = live_population(t, x)?;
        let contact = beta * c / n;
        let force = contact * (i1 + l * j);
        let treated_force = contact * (i1 + sigma_star * j);

        let c_inf = -ls + (1.0 - m) * ll + m * li;
        let c_rel = li - ll;
        let c_tr = ll - lt;
        let iso = (1.0 + u2) * xi;
        let linear = [
            -mu * ls,
            -(k1 + mu) * ll + k1 * li,
            -(mu + d3 + r2) * li - iso * li + iso * lj + r2 * lt,
            -(r3 + mu + d4) * lj + r3 * lt,
            -mu * lt,
        ];
        for (k, o) in out.iter_mut().enumerate() {
            let mut g_f = -force / n;
            let mut g_t = -treated_force / n;
            if k == 2 {
                g_f += contact;
                g_t += contact;
            }
            if k == 3 {
                g_f += contact * l;
                g_t += contact * sigma_star;
            }
            let d_inf = g_f * s + if k == 0 { force } else { 0.0 };
            let d_rel = p * (g_f * l1 + if k == 1 { force } else { 0.0 });
            let d_tr = sigma * (g_t * tr + if k == 4 { treated_force } else { 0.0 });
            *o = -(c_inf * d_inf + c_rel * d_rel + c_tr * d_tr + linear[k]);
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
        let &[ls, ll, li, lj, _] = lam else {
            unreachable!()
        };
        let a = self.inflow;
        out[0] = a * ((self.p_star + self.q_star) * ls - self.p_star * ll - self.q_star * li);
        out[1] = self.xi * x[2] * (lj - li);
        Ok(())
    }
}
