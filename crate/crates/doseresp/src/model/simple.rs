//! Pooled binomial-logit regression: two parameters shared by every
//! experiment, with configurable priors.

use super::{ModelDensity, ModelError, ParamTransform, PreparedData};
use crate::data::Dataset;
use crate::prior::PriorSpec;

/// `improved_i ~ Binomial(total_i, logit⁻¹(α + β·dosage_i))` with
/// independent priors on α and β.
///
/// Sampling happens on the unconstrained scale; interval-bounded priors
/// (uniform) get a scaled inverse-logit transform with its log-Jacobian
/// folded into the density.
#[derive(Debug, Clone)]
pub struct SimpleLrModel {
    data: PreparedData,
    prior_alpha: PriorSpec,
    prior_beta: PriorSpec,
    t_alpha: ParamTransform,
    t_beta: ParamTransform,
}

fn check_coefficient_prior(name: &str, prior: &PriorSpec) -> Result<(), ModelError> {
    if matches!(prior, PriorSpec::HalfNormal { .. }) {
        return Err(ModelError::UnsupportedPrior {
            parameter: name.to_string(),
            prior: prior.to_string(),
            reason: "half-normal is reserved for scale hyperparameters".to_string(),
        });
    }
    Ok(())
}

impl SimpleLrModel {
    pub fn new(
        data: &Dataset,
        prior_alpha: PriorSpec,
        prior_beta: PriorSpec,
    ) -> Result<Self, ModelError> {
        check_coefficient_prior("alpha", &prior_alpha)?;
        check_coefficient_prior("beta", &prior_beta)?;
        Ok(SimpleLrModel {
            data: PreparedData::from_dataset(data),
            t_alpha: ParamTransform::for_prior(&prior_alpha),
            t_beta: ParamTransform::for_prior(&prior_beta),
            prior_alpha,
            prior_beta,
        })
    }

    pub fn prior_alpha(&self) -> &PriorSpec {
        &self.prior_alpha
    }

    pub fn prior_beta(&self) -> &PriorSpec {
        &self.prior_beta
    }

    pub fn data(&self) -> &PreparedData {
        &self.data
    }

    /// Log posterior on the constrained (α, β) scale — the integrand the
    /// grid-quadrature cross-check integrates. No Jacobian terms here;
    /// `-inf` outside a bounded prior's support.
    pub fn log_density_constrained(&self, alpha: f64, beta: f64) -> f64 {
        for (prior, x) in [(&self.prior_alpha, alpha), (&self.prior_beta, beta)] {
            if let Some((lo, hi)) = prior.interval() {
                if x < lo || x > hi {
                    return f64::NEG_INFINITY;
                }
            }
        }
        let mut lp = self.prior_alpha.log_pdf_and_deriv(alpha).0
            + self.prior_beta.log_pdf_and_deriv(beta).0;
        for i in 0..self.data.len() {
            let eta = alpha + beta * self.data.dosages[i];
            lp += self.data.record_log_lik(i, eta).0;
        }
        lp
    }
}

impl ModelDensity for SimpleLrModel {
    fn dim(&self) -> usize {
        2
    }

    fn parameter_names(&self) -> Vec<String> {
        vec!["alpha".to_string(), "beta".to_string()]
    }

    fn log_density_gradient(&self, position: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(position.len(), 2);
        debug_assert_eq!(grad.len(), 2);
        let (u_a, u_b) = (position[0], position[1]);
        let alpha = self.t_alpha.constrain(u_a);
        let beta = self.t_beta.constrain(u_b);

        let mut value = 0.0;
        let mut g_alpha = 0.0; // d value / d alpha (constrained)
        let mut g_beta = 0.0;
        for i in 0..self.data.len() {
            let eta = alpha + beta * self.data.dosages[i];
            let (ll, g_eta) = self.data.record_log_lik(i, eta);
            value += ll;
            g_alpha += g_eta;
            g_beta += g_eta * self.data.dosages[i];
        }

        let (lp_a, dp_a) = self.prior_alpha.log_pdf_and_deriv(alpha);
        let (lp_b, dp_b) = self.prior_beta.log_pdf_and_deriv(beta);
        value += lp_a + lp_b;
        g_alpha += dp_a;
        g_beta += dp_b;

        let (ja, dja) = self.t_alpha.log_jacobian_and_deriv(u_a);
        let (jb, djb) = self.t_beta.log_jacobian_and_deriv(u_b);
        value += ja + jb;

        grad[0] = g_alpha * self.t_alpha.deriv(u_a) + dja;
        grad[1] = g_beta * self.t_beta.deriv(u_b) + djb;
        value
    }

    fn constrain(&self, position: &[f64]) -> Vec<f64> {
        vec![self.t_alpha.constrain(position[0]), self.t_beta.constrain(position[1])]
    }
}
