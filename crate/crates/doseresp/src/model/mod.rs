//! Target densities for sampling: every model exposes an unconstrained
//! log-density with an analytic gradient plus the constraining transforms,
//! so the sampler never needs to know which model it is running on.

mod hier;
mod probability;
mod simple;

pub use hier::{HierLrModel, Parameterization};
pub use probability::ProbabilityModel;
pub use simple::SimpleLrModel;

use crate::data::Dataset;
use crate::math::{inverse_logit, ln_choose, log1p_exp};
use crate::prior::{PriorError, PriorSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("position has length {got}, model dimension is {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("position component {index} is not finite")]
    NonFinitePosition { index: usize },
    #[error("prior {prior} is not usable for parameter `{parameter}`: {reason}")]
    UnsupportedPrior { parameter: String, prior: String, reason: String },
    #[error(transparent)]
    Prior(#[from] PriorError),
}

/// Contract every sampled model satisfies: an unconstrained log-density with
/// analytic gradient, plus the map back to named constrained values.
///
/// `log_density_gradient` returns the log of the unnormalized posterior on
/// the unconstrained scale, including all transform log-Jacobian terms, and
/// writes the exact gradient into `grad`.
pub trait ModelDensity {
    fn dim(&self) -> usize;

    fn parameter_names(&self) -> Vec<String>;

    fn log_density_gradient(&self, position: &[f64], grad: &mut [f64]) -> f64;

    /// Maps an unconstrained position to the constrained values named by
    /// [`ModelDensity::parameter_names`].
    fn constrain(&self, position: &[f64]) -> Vec<f64>;

    fn log_density(&self, position: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.dim()];
        self.log_density_gradient(position, &mut grad)
    }
}

/// Checked variant of [`ModelDensity::log_density_gradient`]: validates the
/// position length and finiteness before evaluating.
pub fn log_posterior_with_gradient<M: ModelDensity + ?Sized>(
    model: &M,
    position: &[f64],
) -> Result<(f64, Vec<f64>), ModelError> {
    if position.len() != model.dim() {
        return Err(ModelError::DimensionMismatch { want: model.dim(), got: position.len() });
    }
    if let Some(index) = position.iter().position(|x| !x.is_finite()) {
        return Err(ModelError::NonFinitePosition { index });
    }
    let mut grad = vec![0.0; model.dim()];
    let value = model.log_density_gradient(position, &mut grad);
    Ok((value, grad))
}

/// Log-pmf of `n` successes out of `total` under success log-odds `eta`:
/// `log C(N,n) + n·η − N·log(1 + e^η)`.
pub fn binomial_logit_log_pmf(n: u32, total: u32, eta: f64) -> f64 {
    assert!(n <= total, "n must not exceed total");
    ln_choose(total, n) + n as f64 * eta - total as f64 * log1p_exp(eta)
}

/// Per-coordinate map from the unconstrained sampling scale to the
/// constrained parameter scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamTransform {
    Identity,
    /// `x = exp(u)` for positive parameters.
    Exp,
    /// `x = lo + (hi - lo)·logit⁻¹(u)` for interval-bounded parameters.
    Interval { lo: f64, hi: f64 },
}

impl ParamTransform {
    pub fn for_prior(prior: &PriorSpec) -> Self {
        match prior.interval() {
            Some((lo, hi)) => ParamTransform::Interval { lo, hi },
            None => ParamTransform::Identity,
        }
    }

    /// Constrained value.
    pub fn constrain(&self, u: f64) -> f64 {
        match *self {
            ParamTransform::Identity => u,
            ParamTransform::Exp => u.exp(),
            ParamTransform::Interval { lo, hi } => lo + (hi - lo) * inverse_logit(u),
        }
    }

    /// d(constrained)/d(unconstrained).
    pub fn deriv(&self, u: f64) -> f64 {
        match *self {
            ParamTransform::Identity => 1.0,
            ParamTransform::Exp => u.exp(),
            ParamTransform::Interval { lo, hi } => {
                let s = inverse_logit(u);
                (hi - lo) * s * (1.0 - s)
            }
        }
    }

    /// log |d constrained / d unconstrained| and its derivative in `u`.
    pub fn log_jacobian_and_deriv(&self, u: f64) -> (f64, f64) {
        match *self {
            ParamTransform::Identity => (0.0, 0.0),
            ParamTransform::Exp => (u, 1.0),
            ParamTransform::Interval { lo, hi } => {
                let s = inverse_logit(u);
                ((hi - lo).ln() + s.ln() + (1.0 - s).ln(), 1.0 - 2.0 * s)
            }
        }
    }
}

/// Trial data flattened into the arrays the likelihood loops over. The
/// binomial coefficient term is constant in the parameters, so it is
/// computed once here.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dosages: Vec<f64>,
    pub totals: Vec<f64>,
    pub improved: Vec<f64>,
    pub ln_choose: Vec<f64>,
}

impl PreparedData {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let n = ds.len();
        let mut prepared = PreparedData {
            dosages: Vec::with_capacity(n),
            totals: Vec::with_capacity(n),
            improved: Vec::with_capacity(n),
            ln_choose: Vec::with_capacity(n),
        };
        for r in ds.records() {
            prepared.dosages.push(r.dosage());
            prepared.totals.push(r.total() as f64);
            prepared.improved.push(r.improved() as f64);
            prepared.ln_choose.push(ln_choose(r.total(), r.improved()));
        }
        prepared
    }

    pub fn len(&self) -> usize {
        self.dosages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dosages.is_empty()
    }

    /// Likelihood term and d/dη for one record at log-odds `eta`.
    #[inline]
    pub fn record_log_lik(&self, i: usize, eta: f64) -> (f64, f64) {
        let value =
            self.ln_choose[i] + self.improved[i] * eta - self.totals[i] * log1p_exp(eta);
        let grad_eta = self.improved[i] - self.totals[i] * inverse_logit(eta);
        (value, grad_eta)
    }
}

/// Which sampled model a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Simple,
    HierCentered,
    HierNcp,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Simple => "simple",
            ModelKind::HierCentered => "hier_centered",
            ModelKind::HierNcp => "hier_ncp",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(ModelKind::Simple),
            "hier_centered" => Ok(ModelKind::HierCentered),
            "hier_ncp" => Ok(ModelKind::HierNcp),
            other => Err(format!("unknown model `{other}` (expected simple|hier_centered|hier_ncp)")),
        }
    }
}

fn default_coeff_prior() -> String {
    "normal(0,20)".to_string()
}

fn default_mu_scale() -> f64 {
    20.0
}

fn default_sigma_scale() -> f64 {
    2.0
}

/// JSON model configuration. Priors use the `family(p1,p2)` text syntax,
/// e.g. `{"model":"simple","prior_alpha":"normal(0,20)","prior_beta":"flat"}`.
/// The hyperprior scales apply to the hierarchical models only.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    pub model: ModelKind,
    #[serde(default = "default_coeff_prior")]
    pub prior_alpha: String,
    #[serde(default = "default_coeff_prior")]
    pub prior_beta: String,
    #[serde(default = "default_mu_scale")]
    pub mu_prior_scale: f64,
    #[serde(default = "default_sigma_scale")]
    pub sigma_prior_scale: f64,
}

impl ModelConfig {
    pub fn simple(prior_alpha: &str, prior_beta: &str) -> Self {
        ModelConfig {
            model: ModelKind::Simple,
            prior_alpha: prior_alpha.to_string(),
            prior_beta: prior_beta.to_string(),
            mu_prior_scale: default_mu_scale(),
            sigma_prior_scale: default_sigma_scale(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Instantiates the configured model over a dataset.
    pub fn build(&self, data: &Dataset) -> Result<Box<dyn ModelDensity + Send + Sync>, ModelError> {
        match self.model {
            ModelKind::Simple => {
                let pa: PriorSpec = self.prior_alpha.parse()?;
                let pb: PriorSpec = self.prior_beta.parse()?;
                Ok(Box::new(SimpleLrModel::new(data, pa, pb)?))
            }
            ModelKind::HierCentered => Ok(Box::new(HierLrModel::with_hyperpriors(
                data,
                Parameterization::Centered,
                self.mu_prior_scale,
                self.sigma_prior_scale,
            )?)),
            ModelKind::HierNcp => Ok(Box::new(HierLrModel::with_hyperpriors(
                data,
                Parameterization::NonCentered,
                self.mu_prior_scale,
                self.sigma_prior_scale,
            )?)),
        }
    }
}
