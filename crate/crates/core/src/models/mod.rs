//! Catalog of controlled tuberculosis transmission models.
//!
//! Every model exposes the same four pieces behind [`Model`]: the state
//! dynamics `f(t, x, u)`, the costate right-hand side `-dH/dx`, the pointwise
//! minimiser of the Hamiltonian over the control box, and the running cost.
//! The Hamiltonian is `H = g(x, u) + <lambda, f(x, u)>`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::costs::{CostKind, CostWeights, Objective};
use crate::error::{Error, Result};
use crate::params::{ParamValue, ParameterSet};

pub mod baseline;
mod bowong;
mod isolation;
mod korea;
mod post_exposure;
mod reinfection;
mod seirs;
mod two_strain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    SeirsControlled,
    TwoStrainControlled,
    ReinfectionControlled,
    IsolationImmigration,
    KoreaTimeDependent,
    BowongControlled,
    PostExposureControlled,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        ModelId::SeirsControlled,
        ModelId::TwoStrainControlled,
        ModelId::ReinfectionControlled,
        ModelId::IsolationImmigration,
        ModelId::KoreaTimeDependent,
        ModelId::BowongControlled,
        ModelId::PostExposureControlled,
    ];

    pub fn slug(self) -> &'static str {
        self.definition().slug
    }

    pub fn definition(self) -> &'static ModelDefinition {
        match self {
            ModelId::SeirsControlled => &seirs::DEFINITION,
            ModelId::TwoStrainControlled => &two_strain::DEFINITION,
            ModelId::ReinfectionControlled => &reinfection::DEFINITION,
            ModelId::IsolationImmigration => &isolation::DEFINITION,
            ModelId::KoreaTimeDependent => &korea::DEFINITION,
            ModelId::BowongControlled => &bowong::DEFINITION,
            ModelId::PostExposureControlled => &post_exposure::DEFINITION,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ModelId::ALL
            .into_iter()
            .find(|m| m.slug() == key)
            .ok_or_else(|| Error::Argument(format!("unknown model `{s}`")))
    }
}

/// Static description of one catalog entry.
#[derive(Debug)]
pub struct ModelDefinition {
    pub id: ModelId,
    pub slug: &'static str,
    pub title: &'static str,
    /// Literature model the equations come from.
    pub source: &'static str,
    pub state_labels: &'static [&'static str],
    pub control_labels: &'static [&'static str],
    pub required: &'static [&'static str],
    /// Optional parameters and what they default to.
    pub optional: &'static [(&'static str, &'static str)],
    /// Parameters that must lie in `[0, 1]`.
    pub fractions: &'static [&'static str],
    /// Parameters that may be given as time tables.
    pub time_dependent: &'static [&'static str],
    pub default_cost: CostKind,
    /// State indices summed into the infectious measure `I`.
    pub infectious: &'static [usize],
    /// State indices summed into the latent measure `L`.
    pub latent: &'static [usize],
    /// State indices weighted by `a_isolated`.
    pub isolated: &'static [usize],
    /// Population is the parameter `N` rather than the live compartment sum.
    pub constant_population: bool,
}

impl ModelDefinition {
    pub fn state_dim(&self) -> usize {
        self.state_labels.len()
    }

    pub fn control_dim(&self) -> usize {
        self.control_labels.len()
    }

    pub fn declares(&self, name: &str) -> bool {
        self.required.contains(&name) || self.optional.iter().any(|(n, _)| *n == name)
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.state_labels.iter().position(|l| *l == label)
    }
}

/// Outcome of parameter validation; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.violations.join("; "))
    }
}

/// Check `p` against the model's declared parameters and range constraints.
pub fn validate_params(model: ModelId, p: &ParameterSet) -> ValidationReport {
    let def = model.definition();
    let mut report = ValidationReport::default();
    for name in def.required {
        if !p.contains(name) {
            report.push(format!("missing parameter `{name}`"));
        }
    }
    for (name, value) in p.iter() {
        if !def.declares(name) {
            report.push(format!("parameter `{name}` is not used by {}", def.slug));
            continue;
        }
        if matches!(value, ParamValue::Table(_)) && !def.time_dependent.contains(&name) {
            report.push(format!("parameter `{name}` cannot be time-dependent"));
        }
        let (lo, hi) = value.range();
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 {
            report.push(format!("`{name}` >= 0 (got {lo})"));
        }
        if def.fractions.contains(&name) && hi > 1.0 {
            report.push(format!("`{name}` <= 1 (got {hi})"));
        }
    }
    let c = |n: &str| p.get(n).and_then(ParamValue::as_constant);
    match model {
        ModelId::TwoStrainControlled => {
            if let (Some(pp), Some(q)) = (c("p"), c("q")) {
                if pp + q > 1.0 {
                    report.push(format!("p+q <= 1 (got {})", pp + q));
                }
            }
        }
        ModelId::IsolationImmigration => {
            if let (Some(ps), Some(qs)) = (c("p_star"), c("q_star")) {
                if ps + qs > 1.0 {
                    report.push(format!("p*+q* <= 1 (got {})", ps + qs));
                }
            }
        }
        _ => {}
    }
    if def.constant_population {
        if let Some(n) = c("N") {
            if n <= 0.0 {
                report.push(format!("N > 0 (got {n})"));
            }
        }
    }
    report
}

/// Check the objective's weights and kind against the model.
pub fn validate_objective(model: ModelId, objective: &Objective) -> ValidationReport {
    let def = model.definition();
    let mut report = ValidationReport {
        violations: objective.weights.violations(def.control_dim()),
    };
    if objective.weights.a_isolated != 0.0 && def.isolated.is_empty() {
        report.push(format!("{} has no isolated class to weight", def.slug));
    }
    report
}

/// Illustrative parameter values for each model. The SEIRS set is the
/// worked example's (mu = 0.0143, c = 1, beta = 13, sigma = 1, r1 = 2,
/// r2 = 1, k1 = 1, N = 10000); the others are plausible desk-scale values.
pub fn default_parameters(model: ModelId) -> ParameterSet {
    match model {
        ModelId::SeirsControlled => seirs::defaults(),
        ModelId::TwoStrainControlled => two_strain::defaults(),
        ModelId::ReinfectionControlled => reinfection::defaults(),
        ModelId::IsolationImmigration => isolation::defaults(),
        ModelId::KoreaTimeDependent => korea::defaults(),
        ModelId::BowongControlled => bowong::defaults(),
        ModelId::PostExposureControlled => post_exposure::defaults(),
    }
}

/// Model-specific equations. Implementations assume validated parameters.
pub(crate) trait Equations: Send + Sync + fmt::Debug {
    /// `dx = f(t, x, u)`.
    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()>;

    /// `out = -(df/dx)^T lambda`, the costate flow without cost terms.
    fn costate(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()>;

    /// `out_i = <lambda, df/du_i>` evaluated at `u`.
    fn switching(&self, t: f64, x: &[f64], lam: &[f64], u: &[f64], out: &mut [f64]) -> Result<()>;

    /// Minimiser of `H` over the control box. The default covers dynamics
    /// affine in each control with no cross terms, where `H` separates into
    /// independent quadratics `B_i/2 u_i^2 + s_i u_i`.
    fn minimise_control(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        w: &CostWeights,
        out: &mut [f64],
    ) -> Result<()> {
        out.fill(0.0);
        let mut s = [0.0; 3];
        let s = &mut s[..out.len()];
        self.switching(t, x, lam, out, s)?;
        for ((o, &si), &b) in out.iter_mut().zip(s.iter()).zip(&w.b) {
            *o = w.project(-si / b);
        }
        Ok(())
    }
}

/// A catalog model bound to a validated parameter set.
#[derive(Debug, Clone)]
pub struct Model {
    id: ModelId,
    params: ParameterSet,
    eq: Arc<dyn Equations>,
}

impl Model {
    pub fn new(id: ModelId, params: &ParameterSet) -> Result<Self> {
        validate_params(id, params).into_result()?;
        let eq: Arc<dyn Equations> = match id {
            ModelId::SeirsControlled => Arc::new(seirs::Seirs::from_params(params)?),
            ModelId::TwoStrainControlled => Arc::new(two_strain::TwoStrain::from_params(params)?),
            ModelId::ReinfectionControlled => {
                Arc::new(reinfection::Reinfection::from_params(params)?)
            }
            ModelId::IsolationImmigration => Arc::new(isolation::Isolation::from_params(params)?),
            ModelId::KoreaTimeDependent => Arc::new(korea::Korea::from_params(params)?),
            ModelId::BowongControlled => Arc::new(bowong::Bowong::from_params(params)?),
            ModelId::PostExposureControlled => {
                Arc::new(post_exposure::PostExposure::from_params(params)?)
            }
        };
        Ok(Self {
            id,
            params: params.clone(),
            eq,
        })
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn definition(&self) -> &'static ModelDefinition {
        self.id.definition()
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn state_dim(&self) -> usize {
        self.definition().state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.definition().control_dim()
    }

    fn check(&self, what: &'static str, v: &[f64], expected: usize) -> Result<()> {
        if v.len() != expected {
            return Err(Error::Dimension {
                what,
                expected,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn dynamics(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
        debug_assert_eq!(x.len(), self.state_dim());
        debug_assert_eq!(u.len(), self.control_dim());
        self.eq.rhs(t, x, u, dx)
    }

    /// Checked, allocating variant of [`Model::dynamics`].
    pub fn eval_dynamics(&self, t: f64, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check("state", x, self.state_dim())?;
        self.check("control", u, self.control_dim())?;
        let mut dx = vec![0.0; x.len()];
        self.dynamics(t, x, u, &mut dx)?;
        Ok(dx)
    }

    /// Costate right-hand side `-dH/dx` for the given objective.
    pub fn adjoint_rhs(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        u: &[f64],
        objective: &Objective,
        out: &mut [f64],
    ) -> Result<()> {
        self.eq.costate(t, x, lam, u, out)?;
        let def = self.definition();
        let wi = objective.infectious_weight();
        let wl = objective.latent_weight();
        let wj = objective.weights.a_isolated;
        for &k in def.infectious {
            out[k] -= wi;
        }
        for &k in def.latent {
            out[k] -= wl;
        }
        for &k in def.isolated {
            out[k] -= wj;
        }
        Ok(())
    }

    pub fn eval_adjoint_rhs(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        u: &[f64],
        objective: &Objective,
    ) -> Result<Vec<f64>> {
        self.check("state", x, self.state_dim())?;
        self.check("adjoint", lam, self.state_dim())?;
        self.check("control", u, self.control_dim())?;
        let mut out = vec![0.0; x.len()];
        self.adjoint_rhs(t, x, lam, u, objective, &mut out)?;
        Ok(out)
    }

    /// Pointwise minimiser of the Hamiltonian over the admissible box.
    pub fn control_characterization(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        objective: &Objective,
        out: &mut [f64],
    ) -> Result<()> {
        self.eq.minimise_control(t, x, lam, &objective.weights, out)
    }

    pub fn eval_control(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        objective: &Objective,
    ) -> Result<Vec<f64>> {
        self.check("state", x, self.state_dim())?;
        self.check("adjoint", lam, self.state_dim())?;
        self.check("control weights", &objective.weights.b, self.control_dim())?;
        let mut u = vec![0.0; self.control_dim()];
        self.control_characterization(t, x, lam, objective, &mut u)?;
        Ok(u)
    }

    /// `dH/du` at `(x, lambda, u)`.
    pub fn control_gradient(
        &self,
        t: f64,
        x: &[f64],
        lam: &[f64],
        u: &[f64],
        objective: &Objective,
        out: &mut [f64],
    ) -> Result<()> {
        self.eq.switching(t, x, lam, u, out)?;
        for ((o, &ui), &b) in out.iter_mut().zip(u).zip(&objective.weights.b) {
            *o += b * ui;
        }
        Ok(())
    }

    pub fn infectious(&self, x: &[f64]) -> f64 {
        self.definition().infectious.iter().map(|&k| x[k]).sum()
    }

    pub fn latent(&self, x: &[f64]) -> f64 {
        self.definition().latent.iter().map(|&k| x[k]).sum()
    }

    /// Integrand of the objective at `(x, u)`.
    pub fn running_cost(&self, x: &[f64], u: &[f64], objective: &Objective) -> f64 {
        let def = self.definition();
        let w = &objective.weights;
        let mut g = objective.infectious_weight() * self.infectious(x)
            + objective.latent_weight() * self.latent(x);
        if w.a_isolated != 0.0 {
            g += w.a_isolated * def.isolated.iter().map(|&k| x[k]).sum::<f64>();
        }
        for (&b, &ui) in w.b.iter().zip(u) {
            g += 0.5 * b * ui * ui;
        }
        g
    }

    /// Total population used by the dynamics: the parameter `N` for the
    /// constant-population models, otherwise the compartment sum.
    pub fn population(&self, x: &[f64]) -> f64 {
        if self.definition().constant_population {
            if let Ok(n) = self.params.constant("N") {
                return n;
            }
        }
        x.iter().sum()
    }
}

/// Compartment sum, rejecting an empty or non-finite population.
#[inline]
pub(crate) fn live_population(t: f64, x: &[f64]) -> Result<f64> {
    let n: f64 = x.iter().sum();
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else {
        Err(Error::DegeneratePopulation { t, population: n })
    }
}

/// Optional constant with a fallback.
pub(crate) fn constant_or(p: &ParameterSet, name: &str, default: f64) -> Result<f64> {
    if p.contains(name) {
        p.constant(name)
    } else {
        Ok(default)
    }
}
