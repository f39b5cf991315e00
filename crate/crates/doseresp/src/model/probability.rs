//! Single success-probability model with a Beta prior, sampled through a
//! logit transform. Its posterior has the closed form Beta(a+n, b+N−n), so
//! sampled moments can be checked exactly.

use super::ModelDensity;
use crate::conjugate::{BetaParams, ConjugateError};
use crate::math::{inverse_logit, log1p_exp};

/// `improved ~ Binomial(total, q)` with `q ~ Beta(a, b)`, one unconstrained
/// parameter `u = logit(q)`.
///
/// On the unconstrained scale the density (prior × likelihood × Jacobian)
/// collapses to `(n+a)·log q + (N−n+b)·log(1−q)` up to constants.
#[derive(Debug, Clone)]
pub struct ProbabilityModel {
    improved: u32,
    total: u32,
    prior: BetaParams,
}

impl ProbabilityModel {
    pub fn new(improved: u32, total: u32, prior: BetaParams) -> Result<Self, ConjugateError> {
        if improved > total {
            return Err(ConjugateError::CountsExceedTrials { n: improved, total });
        }
        Ok(ProbabilityModel { improved, total, prior })
    }

    /// The exact posterior this model samples from.
    pub fn conjugate_posterior(&self) -> BetaParams {
        crate::conjugate::beta_binomial_posterior(self.prior, self.improved, self.total)
            .expect("validated at construction")
    }
}

impl ModelDensity for ProbabilityModel {
    fn dim(&self) -> usize {
        1
    }

    fn parameter_names(&self) -> Vec<String> {
        vec!["q".to_string()]
    }

    fn log_density_gradient(&self, position: &[f64], grad: &mut [f64]) -> f64 {
        let u = position[0];
        let q = inverse_logit(u);
        let succ = self.improved as f64 + self.prior.a();
        let fail = (self.total - self.improved) as f64 + self.prior.b();
        // log q = -log1p_exp(-u), log(1-q) = -log1p_exp(u)
        let value = -succ * log1p_exp(-u) - fail * log1p_exp(u);
        grad[0] = succ * (1.0 - q) - fail * q;
        value
    }

    fn constrain(&self, position: &[f64]) -> Vec<f64> {
        vec![inverse_logit(position[0])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::logit;
    use approx::assert_abs_diff_eq;

    #[test]
    fn density_matches_direct_evaluation() {
        let m = ProbabilityModel::new(4, 20, BetaParams::new(1.0, 1.0).unwrap()).unwrap();
        for &q in &[0.05, 0.2, 0.5, 0.9] {
            let u = logit(q);
            // prior Beta(1,1) is flat: likelihood + jacobian log(q(1-q))
            let direct = 4.0 * q.ln() + 16.0 * (1.0 - q).ln() + (q * (1.0 - q)).ln();
            assert_abs_diff_eq!(m.log_density(&[u]), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let m = ProbabilityModel::new(7, 9, BetaParams::new(2.0, 3.5).unwrap()).unwrap();
        for &u in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            let mut grad = [0.0];
            m.log_density_gradient(&[u], &mut grad);
            let h = 1e-6;
            let fd = (m.log_density(&[u + h]) - m.log_density(&[u - h])) / (2.0 * h);
            assert_abs_diff_eq!(grad[0], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn conjugate_posterior_shape() {
        let m = ProbabilityModel::new(4, 20, BetaParams::new(1.0, 1.0).unwrap()).unwrap();
        let post = m.conjugate_posterior();
        assert_eq!((post.a(), post.b()), (5.0, 17.0));
    }

    #[test]
    fn rejects_inconsistent_counts() {
        assert!(ProbabilityModel::new(21, 20, BetaParams::new(1.0, 1.0).unwrap()).is_err());
    }
}
