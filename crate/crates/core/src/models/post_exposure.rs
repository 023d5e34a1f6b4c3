//! Reinfection and post-exposure intervention model with early (`L3`) and
//! persistent (`L4`) latency, plus case holding `u1` and case finding `u2`.
//!
//! Case holding cuts relapse of treated individuals, `omega_R -> (1 - eps1 u1)
//! omega_R`; case finding adds treatment of persistent latents, `tau2 -> tau2
//! + eps2 u2`. Population is constant (`N` parameter, recruitment `mu N`).
//! The objective weights `I = I1` and `L = L4`.

use super::{CostKind, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::ParameterSet;

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::PostExposureControlled,
    slug: "post_exposure_controlled",
    title: "Post-exposure interventions with case holding and case finding",
    source: "Gomes et al. (2007) reinfection/post-exposure model, case-holding and case-finding controls",
    state_labels: &["S", "L3", "I1", "L4", "T"],
    control_labels: &["u1", "u2"],
    required: &[
        "mu", "beta", "sigma", "sigma_R", "delta", "k1", "omega", "omega_R", "tau0", "tau1",
        "tau2", "eps1", "eps2", "N",
    ],
    optional: &[],
    fractions: &["k1", "sigma", "sigma_R", "eps1", "eps2"],
    time_dependent: &[],
    default_cost: CostKind::C1,
    infectious: &[2],
    latent: &[3],
    isolated: &[],
    constant_population: true,
};

pub(super) fn defaults() -> ParameterSet {
    ParameterSet::from_pairs([
        ("mu", 0.0143),
        ("beta", 100.0),
        ("sigma", 0.25),
        ("sigma_R", 0.25),
        ("delta", 12.0),
        ("k1", 0.1),
        ("omega", 0.0002),
        ("omega_R", 0.00002),
        ("tau0", 2.0),
        ("tau1", 2.0),
        ("tau2", 1.0),
        ("eps1", 0.5),
        ("eps2", 0.5),
        ("N", 10000.0),
    ])
}

#[derive(Debug, Clone)]
pub(super) struct PostExposure {
    mu: f64,
    beta: f64,
    sigma: f64,
    sigma_r: f64,
    delta: f64,
    k1: f64,
    omega: f64,
    omega_r: f64,
    tau0: f64,
    tau1: f64,
    tau2: f64,
    eps1: f64,
    eps2: f64,
    n: f64,
}

impl PostExposure {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        Ok(Self {
            mu: p.constant("mu")?,
            beta: p.constant("beta")?,
            sigma: p.constant("sigma")?,
            sigma_r: p.constant("sigma_R")?,
            delta: p.constant("delta")?,
            k1: p.constant("k1")?,
            omega: p.constant("omega")?,
            omega_r: p.constant("omega_R")?,
            tau0: p.constant("tau0")?,
            tau1: p.constant("tau1")?,
            tau2: p.constant("tau2")?,
            eps1: p.constant("eps1")?,
            eps2: p.constant("eps2")?,
            n: p.constant("N")?,
        })
    }
}

impl Equations for PostExposure {
    fn rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[s, l3, i1, l4, tr] = x else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let PostExposure {
            mu,
            beta,
            sigma,
            sigma_r,
            delta,
            k1,
            omega,
            omega_r,
            tau0,
            tau1,
            tau2,
            eps1,
            eps2,
            n,
        } = *self;
        let force = beta / n * i1;
        let relapse = (1.0 - eps1 * u1) * omega_r;
        dx[0] = mu * n - force * s - mu * s;
        dx[1] = force * (s + sigma * l4 + sigma_r * tr) - (delta + tau1 + mu) * l3;
        dx[2] = k1 * delta * l3 + omega * l4 + relapse * tr - (tau0 + mu) * i1;
        dx[3] = (1.0 - k1) * delta * l3 - sigma * force * l4 - (omega + tau2 + eps2 * u2 + mu) * l4;
        dx[4] = tau0 * i1 + tau1 * l3 + (tau2 + eps2 * u2) * l4
            - sigma_r * force * tr
            - (relapse + mu) * tr;
        Ok(())
    }

    fn costate(&self, _t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[s, _l3, i1, l4, tr] = x else {
            unreachable!()
        };
        let &[ls, l3_, li, l4_, lt] = lam else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let PostExposure {
            mu,
            beta,
            sigma,
            sigma_r,
            delta,
            k1,
            omega,
            omega_r,
            tau0,
            tau1,
            tau2,
            eps1,
            eps2,
            n,
        } = *self;
        let phi = beta / n;
        let force = phi * i1;
        let relapse = (1.0 - eps1 * u1) * omega_r;
        let finding = tau2 + eps2 * u2;

        let d_s = ls * (-force - mu) + l3_ * force;
        let d_l3 =
            -l3_ * (delta + tau1 + mu) + li * k1 * delta + l4_ * (1.0 - k1) * delta + lt * tau1;
        let d_i1 = -ls * phi * s + l3_ * phi * (s + sigma * l4 + sigma_r * tr)
            - li * (tau0 + mu)
            - l4_ * sigma * phi * l4
            + lt * (tau0 - sigma_r * phi * tr);
        let d_l4 = l3_ * force * sigma
            + li * omega
            + l4_ * (-sigma * force - (omega + finding + mu))
            + lt * finding;
        let d_t = l3_ * force * sigma_r + li * relapse + lt * (-sigma_r * force - (relapse + mu));

        for (o, v) in out.iter_mut().zip([d_s, d_l3, d_i1, d_l4, d_t]) {
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
        let (l4, tr) = (x[3], x[4]);
        let (li, l4_, lt) = (lam[2], lam[3], lam[4]);
        out[0] = self.eps1 * self.omega_r * tr * (lt - li);
        out[1] = self.eps2 * l4 * (lt - l4_);
        Ok(())
    }
}
