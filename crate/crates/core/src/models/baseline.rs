//! Uncontrolled reference systems, written out independently of the
//! controlled models. Each controlled model collapses onto its reference at
//! the neutral control returned by [`neutral_control`], and the two must agree
//! bit for bit there. References always divide by the live compartment sum.

use super::{constant_or, ModelId};
use crate::error::{Error, Result};
use crate::params::ParameterSet;

/// Control value at which a controlled model reduces to its reference.
pub fn neutral_control(model: ModelId) -> Vec<f64> {
    match model {
        ModelId::SeirsControlled | ModelId::ReinfectionControlled => vec![0.0],
        // u1 multiplies latent treatment, u2 scales treatment failure.
        ModelId::TwoStrainControlled => vec![1.0, 0.0],
        ModelId::IsolationImmigration | ModelId::PostExposureControlled => vec![0.0, 0.0],
        ModelId::KoreaTimeDependent => vec![0.0, 0.0, 0.0],
        // 1 - u1 r1 -> 1 - r1 and u2 h -> h.
        ModelId::BowongControlled => vec![1.0, 1.0],
    }
}

/// Right-hand side of the uncontrolled reference system for `model`.
pub fn uncontrolled_rhs(model: ModelId, t: f64, x: &[f64], p: &ParameterSet) -> Result<Vec<f64>> {
    let n: f64 = x.iter().sum();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::DegeneratePopulation { t, population: n });
    }
    let v = |name: &str| p.constant(name);
    let out = match model {
        ModelId::SeirsControlled => {
            let [s, l1, i1, tr] = take4(x);
            let (mu, beta, c, sigma) = (v("mu")?, v("beta")?, v("c")?, v("sigma")?);
            let (k1, r1, r2) = (v("k1")?, v("r1")?, v("r2")?);
            let d1 = constant_or(p, "d1", 0.0)?;
            let lambda = constant_or(p, "Lambda", mu * v("N")?)?;
            let phi = beta * c / n;
            let new_cases = phi * s * i1;
            let treated_cases = sigma * phi * tr * i1;
            vec![
                lambda - new_cases - mu * s,
                new_cases - (mu + r1 + k1) * l1 + treated_cases,
                k1 * l1 - (mu + r2 + d1) * i1,
                r1 * l1 + r2 * i1 - treated_cases - mu * tr,
            ]
        }
        ModelId::TwoStrainControlled => {
            let &[s, l1, i1, l2, i2, tr] = x else {
                return Err(dim(6, x.len()));
            };
            let (mu, beta, beta_star, c) = (v("mu")?, v("beta")?, v("beta_star")?, v("c")?);
            let (sigma, k1, k2, r1, r2) = (v("sigma")?, v("k1")?, v("k2")?, v("r1")?, v("r2")?);
            let (pp, q) = (v("p")?, v("q")?);
            let d1 = constant_or(p, "d1", 0.0)?;
            let d2 = constant_or(p, "d2", 0.0)?;
            let lambda = constant_or(p, "Lambda", mu * v("N")?)?;
            let phi1 = beta * c / n;
            let phi2 = beta_star * c / n;
            let new_cases = phi1 * s * i1;
            let treated_cases = sigma * phi1 * tr * i1;
            vec![
                lambda - new_cases - mu * s - phi2 * s * i2,
                new_cases - (mu + k1 + r1) * l1 + treated_cases + pp * r2 * i1 - phi2 * l1 * i2,
                k1 * l1 - (mu + r2 + d1) * i1,
                q * r2 * i1 - (mu + k2) * l2 + phi2 * (s + l1 + tr) * i2,
                k2 * l2 - (mu + d2) * i2,
                r1 * l1 + (1.0 - (pp + q)) * r2 * i1 - treated_cases - mu * tr - phi2 * tr * i2,
            ]
        }
        ModelId::ReinfectionControlled => {
            let [s, l1, i1, tr] = take4(x);
            let (lambda, mu, beta, c) = (v("Lambda")?, v("mu")?, v("beta")?, v("c")?);
            let (sigma, k1, r2, rho) = (v("sigma")?, v("k1")?, v("r2")?, v("rho")?);
            let d1 = constant_or(p, "d1", 0.0)?;
            let force = beta * c * i1 / n;
            let reinfected = rho * force * l1;
            vec![
                lambda - force * s - mu * s,
                force * s - reinfected - (mu + k1) * l1 + sigma * force * tr,
                reinfected + k1 * l1 - (mu + r2 + d1) * i1,
                r2 * i1 - sigma * force * tr - mu * tr,
            ]
        }
        ModelId::IsolationImmigration => {
            let &[s, l1, i1, j, tr] = x else {
                return Err(dim(5, x.len()));
            };
            let (lambda, a, ps, qs) = (v("Lambda")?, v("immigration")?, v("p_star")?, v("q_star")?);
            let (mu, beta, c, l, m) = (v("mu")?, v("beta")?, v("c")?, v("l")?, v("m")?);
            let (pp, sigma, sigma_star, k1) = (v("p")?, v("sigma")?, v("sigma_star")?, v("k1")?);
            let (d3, d4, r2, r3, xi) = (v("d3")?, v("d4")?, v("r2")?, v("r3")?, v("xi")?);
            let force = beta * c * (i1 + l * j) / n;
            let treated_force = beta * c * (i1 + sigma_star * j) / n;
            vec![
                lambda + (1.0 - (ps + qs)) * a - force * s - mu * s,
                ps * a + (1.0 - m) * (force * s) - pp * force * l1 + sigma * treated_force * tr
                    - (k1 + mu) * l1,
                qs * a + m * (force * s) + pp * force * l1 + k1 * l1
                    - (mu + d3 + r2) * i1
                    - xi * i1,
                xi * i1 - (r3 + mu + d4) * j,
                r2 * i1 + r3 * j - sigma * treated_force * tr - mu * tr,
            ]
        }
        ModelId::KoreaTimeDependent => {
            let [s, l1, i, l5] = take4(x);
            let at = |name: &str| -> Result<f64> {
                p.get(name)
                    .map(|pv| pv.eval(t))
                    .ok_or_else(|| Error::Argument(format!("missing parameter `{name}`")))
            };
            let (b, mu, k, sf, r) = (at("b")?, at("mu")?, at("k")?, at("s")?, at("r")?);
            let beta = v("beta")?;
            let infection = beta * s * i / n;
            vec![
                b * n - mu * s - infection,
                infection - (k + mu) * l1 + sf * r * i,
                k * l1 - (r + mu) * i,
                (1.0 - sf) * r * i - mu * l5,
            ]
        }
        ModelId::BowongControlled => {
            let [s, l1, i1, i2] = take4(x);
            let (lambda, mu, beta, g, f) = (v("Lambda")?, v("mu")?, v("beta")?, v("g")?, v("f")?);
            let (h, sigma, k1, r1) = (v("h")?, v("sigma")?, v("k1")?, v("r1")?);
            let (r2, r3, d1, d3) = (v("r2")?, v("r3")?, v("d1")?, v("d3")?);
            let force = beta * i1 / n;
            let progression = (k1 + sigma * force) * l1;
            let keep = 1.0 - r1;
            vec![
                lambda - force * s - mu * s,
                (1.0 - g) * (force * s) + r2 * i1 + r3 * i2 - keep * progression - mu * l1,
                g * f * (force * s) + h * keep * progression - (mu + d1 + r2) * i1,
                g * (1.0 - f) * (force * s) + (1.0 - h) * keep * progression - (mu + d3 + r3) * i2,
            ]
        }
        ModelId::PostExposureControlled => {
            let &[s, l3, i1, l4, tr] = x else {
                return Err(dim(5, x.len()));
            };
            let (mu, beta, sigma, sigma_r) = (v("mu")?, v("beta")?, v("sigma")?, v("sigma_R")?);
            let (delta, k1, omega, omega_r) = (v("delta")?, v("k1")?, v("omega")?, v("omega_R")?);
            let (tau0, tau1, tau2) = (v("tau0")?, v("tau1")?, v("tau2")?);
            let pop = v("N")?;
            let force = beta / pop * i1;
            vec![
                mu * pop - force * s - mu * s,
                force * (s + sigma * l4 + sigma_r * tr) - (delta + tau1 + mu) * l3,
                k1 * delta * l3 + omega * l4 + omega_r * tr - (tau0 + mu) * i1,
                (1.0 - k1) * delta * l3 - sigma * force * l4 - (omega + tau2 + mu) * l4,
                tau0 * i1 + tau1 * l3 + tau2 * l4 - sigma_r * force * tr - (omega_r + mu) * tr,
            ]
        }
    };
    Ok(out)
}

fn take4(x: &[f64]) -> [f64; 4] {
    let mut a = [0.0; 4];
    a.copy_from_slice(&x[..4]);
    a
}

fn dim(expected: usize, got: usize) -> Error {
    Error::Dimension {
        what: "state",
        expected,
        got,
    }
}
