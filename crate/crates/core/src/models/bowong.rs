//! Fast/slow progression model with diagnosed (`I1`) and undiagnosed (`I2`)
//! infectious classes. Chemoprophylaxis enters as `1 - u1 r1` and detection
//! as `u2 h`.
//!
//! With force of infection `F = beta I1 / N` and `K = (k1 + sigma F) L1`:
//!
//! ```text
//! S'  = Lambda - F S - mu S
//! L1' = (1 - g) F S + r2 I1 + r3 I2 - (1 - u1 r1) K - mu L1
//! I1' = g f F S + u2 h (1 - u1 r1) K - (mu + d1 + r2) I1
//! I2' = g (1 - f) F S + (1 - u2 h)(1 - u1 r1) K - (mu + d3 + r3) I2
//! ```
//!
//! The product `u1 u2` makes `H` a coupled quadratic in the controls, so the
//! control law is an exact minimisation over the box rather than two clamps.

use super::{live_population, CostKind, CostWeights, Equations, ModelDefinition, ModelId};
use crate::error::Result;
use crate::params::ParameterSet;

pub(super) static DEFINITION: ModelDefinition = ModelDefinition {
    id: ModelId::BowongControlled,
    slug: "bowong_controlled",
    title: "Diagnosed/undiagnosed model with chemoprophylaxis and detection",
    source: "Bowong & Alaoui (2013) model, chemoprophylaxis u1 and detection u2",
    state_labels: &["S", "L1", "I1", "I2"],
    control_labels: &["u1", "u2"],
    required: &[
        "Lambda", "mu", "beta", "g", "f", "h", "sigma", "k1", "r1", "r2", "r3", "d1", "d3",
    ],
    optional: &[("N", "initial-state scale only")],
    fractions: &["g", "f", "h", "r1", "sigma"],
    time_dependent: &[],
    default_cost: CostKind::C2,
    infectious: &[2, 3],
    latent: &[1],
    isolated: &[],
    constant_population: false,
};

pub(super) fn defaults() -> ParameterSet {
    ParameterSet::from_pairs([
        ("Lambda", 143.0),
        ("mu", 0.0143),
        ("beta", 13.0),
        ("g", 0.1),
        ("f", 0.7),
        ("h", 0.8),
        ("sigma", 0.9),
        ("k1", 0.5),
        ("r1", 0.5),
        ("r2", 1.0),
        ("r3", 0.5),
        ("d1", 0.1),
        ("d3", 0.2),
        ("N", 10000.0),
    ])
}

#[derive(Debug, Clone)]
pub(super) struct Bowong {
    lambda: f64,
    mu: f64,
    beta: f64,
    g: f64,
    f: f64,
    h: f64,
    sigma: f64,
    k1: f64,
    r1: f64,
    r2: f64,
    r3: f64,
    d1: f64,
    d3: f64,
}

impl Bowong {
    pub(super) fn from_params(p: &ParameterSet) -> Result<Self> {
        Ok(Self {
            lambda: p.constant("Lambda")?,
            mu: p.constant("mu")?,
            beta: p.constant("beta")?,
            g: p.constant("g")?,
            f: p.constant("f")?,
            h: p.constant("h")?,
            sigma: p.constant("sigma")?,
            k1: p.constant("k1")?,
            r1: p.constant("r1")?,
            r2: p.constant("r2")?,
            r3: p.constant("r3")?,
            d1: p.constant("d1")?,
            d3: p.constant("d3")?,
        })
    }

    /// `K = (k1 + sigma F) L1`, the progression flux out of latency before
    /// chemoprophylaxis.
    fn progression(&self, t: f64, x: &[f64]) -> Result<f64> {
        let n = live_population(t, x)?;
        let force = self.beta * x[2] / n;
        Ok((self.k1 + self.sigma * force) * x[1])
    }
}

impl Equations for Bowong {
    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        let &[s, l1, i1, i2] = x else { unreachable!() };
        let (u1, u2) = (u[0], u[1]);
        let Bowong {
            lambda,
            mu,
            beta,
            g,
            f,
            h,
            sigma,
            k1,
            r1,
            r2,
            r3,
            d1,
            d3,
        } = *self;
        let n = live_population(t, x)?;
        let force = beta * i1 / n;
        let infection = force * s;
        let kk = (k1 + sigma * force) * l1;
        let theta = 1.0 - u1 * r1;
        let detected = u2 * h;
        dx[0] = lambda - infection - mu * s;
        dx[1] = (1.0 - g) * infection + r2 * i1 + r3 * i2 - theta * kk - mu * l1;
        dx[2] = g * f * infection + detected * theta * kk - (mu + d1 + r2) * i1;
        dx[3] = g * (1.0 - f) * infection + (1.0 - detected) * theta * kk - (mu + d3 + r3) * i2;
        Ok(())
    }

    fn costate(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let &[s, l1, i1, _i2] = x else { unreachable!() };
        let &[ls, ll, l_1, l_2] = lam else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let Bowong {
            mu,
            beta,
            g,
            f,
            h,
            sigma,
            k1,
            r1,
            r2,
            r3,
            d1,
            d3,
            ..
        } = *self;
        let n = live_population(t, x)?;
        let force = beta * i1 / n;
        let theta = 1.0 - u1 * r1;
        let detected = u2 * h;
        let c_inf = -ls + (1.0 - g) * ll + g * f * l_1 + g * (1.0 - f) * l_2;
        let c_k = theta * (-ll + detected * l_1 + (1.0 - detected) * l_2);
        let linear = [
            -mu * ls,
            -mu * ll,
            r2 * ll - (mu + d1 + r2) * l_1,
            r3 * ll - (mu + d3 + r3) * l_2,
        ];
        for (j, o) in out.iter_mut().enumerate() {
            let mut g_f = -force / n;
            if j == 2 {
                g_f += beta / n;
            }
            let d_inf = g_f * s + if j == 0 { force } else { 0.0 };
            let d_k = sigma * g_f * l1 + if j == 1 { k1 + sigma * force } else { 0.0 };
            *o = -(c_inf * d_inf + c_k * d_k + linear[j]);
        }
        Ok(())
    }

    fn switching(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let kk = self.progression(t, x)?;
        let &[_, ll, l_1, l_2] = lam else {
            unreachable!()
        };
        let (u1, u2) = (u[0], u[1]);
        let detected = u2 * self.h;
        let theta = 1.0 - u1 * self.r1;
        out[0] = self.r1 * kk * (ll - detected * l_1 - (1.0 - detected) * l_2);
        out[1] = self.h * theta * kk * (l_1 - l_2);
        Ok(())
    }

    fn minimise_control(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        w: &CostWeights,
        out: &mut [f64],
    ) -> Result<()> {
        let kk = self.progression(t, x)?;
        let &[_, ll, l_1, l_2] = lam else {
            unreachable!()
        };
        // u-dependent part of H:
        //   q(u1, u2) = B1/2 u1^2 + B2/2 u2^2 + (1 - r1 u1) K (a + h d u2)
        let a = l_2 - ll;
        let d = l_1 - l_2;
        let (b1, b2) = (w.b[0], w.b[1]);
        let (r1, h) = (self.r1, self.h);
        let q = |u1: f64, u2: f64| {
            0.5 * b1 * u1 * u1 + 0.5 * b2 * u2 * u2 + (1.0 - r1 * u1) * kk * (a + h * d * u2)
        };
        let best_u2 = |u1: f64| w.project(-kk * h * d * (1.0 - r1 * u1) / b2);
        let best_u1 = |u2: f64| w.project(r1 * kk * (a + h * d * u2) / b1);

        let mut candidates = [(0.0, 0.0); 5];
        candidates[0] = (w.lower, best_u2(w.lower));
        candidates[1] = (w.upper, best_u2(w.upper));
        candidates[2] = (best_u1(w.lower), w.lower);
        candidates[3] = (best_u1(w.upper), w.upper);
        let mut count = 4;
        // Interior stationary point, when the quadratic is strictly convex.
        let cross = r1 * kk * h * d;
        let det = b1 * b2 - cross * cross;
        if det > 0.0 {
            let rhs1 = r1 * kk * a;
            let rhs2 = -kk * h * d;
            let u1 = (rhs1 * b2 + cross * rhs2) / det;
            let u2 = (b1 * rhs2 + cross * rhs1) / det;
            if (w.lower..=w.upper).contains(&u1) && (w.lower..=w.upper).contains(&u2) {
                candidates[count] = (u1, u2);
                count += 1;
            }
        }
        let (u1, u2) = candidates[..count]
            .iter()
            .copied()
            .min_by(|p, r| q(p.0, p.1).total_cmp(&q(r.0, r.1)))
            .expect("non-empty candidate set");
        out[0] = u1;
        out[1] = u2;
        Ok(())
    }
}
