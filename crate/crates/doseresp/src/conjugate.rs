//! Closed-form Beta-Binomial posterior: the exact reference the sampled
//! posteriors are validated against. Quantiles deliberately go through
//! bisection on a quadrature-built CDF rather than an incomplete-beta
//! expansion, so this path stays easy to audit at oracle-grade accuracy.

use crate::math::ln_beta;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConjugateError {
    #[error("beta shape parameters must be positive, got ({a}, {b})")]
    InvalidShape { a: f64, b: f64 },
    #[error("successes ({n}) exceed trials ({total})")]
    CountsExceedTrials { n: u32, total: u32 },
}

/// Shape parameters of a Beta distribution, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self, ConjugateError> {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(ConjugateError::InvalidShape { a, b });
        }
        Ok(BetaParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Log-density at `x ∈ (0, 1)`.
    pub fn log_pdf(&self, x: f64) -> f64 {
        (self.a - 1.0) * x.ln() + (self.b - 1.0) * (1.0 - x).ln() - ln_beta(self.a, self.b)
    }
}

/// Beta(a, b) prior updated with `n` successes out of `total` trials:
/// Beta(a + n, b + total − n). `n = 0` and `n = total` are ordinary inputs.
pub fn beta_binomial_posterior(
    prior: BetaParams,
    n: u32,
    total: u32,
) -> Result<BetaParams, ConjugateError> {
    if n > total {
        return Err(ConjugateError::CountsExceedTrials { n, total });
    }
    BetaParams::new(prior.a + n as f64, prior.b + (total - n) as f64)
}

/// Mean and standard deviation of a Beta distribution.
pub fn beta_moments(p: BetaParams) -> (f64, f64) {
    let (a, b) = (p.a, p.b);
    let s = a + b;
    (a / s, (a * b / (s * s * (s + 1.0))).sqrt())
}

/// CDF at `x` by numerical integration of the density.
///
/// The integrable endpoint singularities (shape < 1) are handled by an
/// analytic series head on `[0, δ]`; the rest is adaptive Simpson. For
/// `x > 1/2` the reflection `F(x; a,b) = 1 − F(1−x; b,a)` keeps the
/// integration on the left half.
pub fn beta_cdf(p: BetaParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > 0.5 {
        return 1.0 - beta_cdf(BetaParams { a: p.b, b: p.a }, 1.0 - x);
    }
    let ln_b = ln_beta(p.a, p.b);
    let delta = x.min(1e-3);
    let head = series_head(p.a, p.b, delta) * (-ln_b).exp();
    let density = |t: f64| (p.log_pdf(t)).exp();
    let tail = if x > delta {
        adaptive_simpson(&density, delta, x, 1e-12, 48)
    } else {
        0.0
    };
    (head + tail).clamp(0.0, 1.0)
}

/// ∫₀^δ t^{a−1}(1−t)^{b−1} dt via the binomial series of (1−t)^{b−1};
/// converges geometrically for δ ≤ 1e-3.
fn series_head(a: f64, b: f64, delta: f64) -> f64 {
    let mut sum = 0.0;
    let mut coef = 1.0; // generalized binomial (b-1 choose k) * (-1)^k
    let mut delta_pow = delta.powf(a);
    for k in 0..64 {
        let term = coef * delta_pow / (a + k as f64);
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
        coef *= -(b - 1.0 - k as f64) / (k as f64 + 1.0);
        delta_pow *= delta;
    }
    sum
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (f_lo, f_mid, f_hi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
    simpson_step(f, lo, hi, f_lo, f_mid, f_hi, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_mid: f64,
    f_hi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (f_lmid, f_rmid) = (f(lmid), f(rmid));
    let left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lmid + f_mid);
    let right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rmid + f_hi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, lo, mid, f_lo, f_lmid, f_mid, left, tol / 2.0, depth - 1)
            + simpson_step(f, mid, hi, f_mid, f_rmid, f_hi, right, tol / 2.0, depth - 1)
    }
}

/// Quantile by bisection on [`beta_cdf`] until the bracket is narrower than
/// 1e-10. `q` must lie strictly inside (0, 1).
pub fn beta_quantile(p: BetaParams, q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "quantile level must be in (0,1)");
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if beta_cdf(p, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn posterior_update_formula() {
        let p = beta_binomial_posterior(BetaParams::new(1.0, 1.0).unwrap(), 4, 10).unwrap();
        assert_eq!((p.a(), p.b()), (5.0, 7.0));

        let p = beta_binomial_posterior(BetaParams::new(2.0, 3.0).unwrap(), 0, 5).unwrap();
        assert_eq!((p.a(), p.b()), (2.0, 8.0));

        let p = beta_binomial_posterior(BetaParams::new(0.5, 0.5).unwrap(), 45, 52).unwrap();
        assert_eq!((p.a(), p.b()), (45.5, 7.5));
    }

    #[test]
    fn posterior_rejects_n_above_total() {
        let err =
            beta_binomial_posterior(BetaParams::new(1.0, 1.0).unwrap(), 6, 5).unwrap_err();
        assert!(matches!(err, ConjugateError::CountsExceedTrials { .. }));
    }

    #[test]
    fn update_is_additive() {
        let prior = BetaParams::new(2.5, 4.0).unwrap();
        let two_step = beta_binomial_posterior(
            beta_binomial_posterior(prior, 3, 9).unwrap(),
            5,
            11,
        )
        .unwrap();
        let one_step = beta_binomial_posterior(prior, 8, 20).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn moments_of_uniform() {
        let (mean, sd) = beta_moments(BetaParams::new(1.0, 1.0).unwrap());
        assert_abs_diff_eq!(mean, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sd, (1.0f64 / 12.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn moments_of_beta_5_7() {
        let (mean, sd) = beta_moments(BetaParams::new(5.0, 7.0).unwrap());
        assert_abs_diff_eq!(mean, 5.0 / 12.0, epsilon = 1e-15);
        // sqrt(35 / (144 * 13))
        assert_abs_diff_eq!(sd, (35.0f64 / 1872.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(sd, 0.136_735, epsilon = 1e-6);
    }

    #[test]
    fn shrinkage_between_prior_mean_and_frequency() {
        let cases = [(1.0, 1.0, 4u32, 10u32), (8.0, 2.0, 1, 20), (0.5, 0.5, 45, 52)];
        for (a, b, n, total) in cases {
            let prior = BetaParams::new(a, b).unwrap();
            let (prior_mean, _) = beta_moments(prior);
            let freq = n as f64 / total as f64;
            let (post_mean, _) =
                beta_moments(beta_binomial_posterior(prior, n, total).unwrap());
            let lo = prior_mean.min(freq);
            let hi = prior_mean.max(freq);
            assert!(
                (lo..=hi).contains(&post_mean),
                "Beta({a},{b}) + {n}/{total}: {post_mean} outside [{lo},{hi}]"
            );
        }
    }

    #[test]
    fn uniform_quantile_is_identity() {
        let p = BetaParams::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(beta_quantile(p, 0.25), 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(beta_quantile(p, 0.9), 0.9, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_beta_median_is_half() {
        let p = BetaParams::new(2.0, 2.0).unwrap();
        assert_abs_diff_eq!(beta_quantile(p, 0.5), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn quantile_matches_fine_grid_inversion() {
        // independent oracle: 1e6-point midpoint-rule CDF, inverted by scan
        let p = BetaParams::new(5.0, 7.0).unwrap();
        let n = 1_000_000usize;
        let h = 1.0 / n as f64;
        let mut cdf = 0.0;
        let mut grid_median = f64::NAN;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            cdf += p.log_pdf(x).exp() * h;
            if cdf >= 0.5 {
                grid_median = x;
                break;
            }
        }
        assert_abs_diff_eq!(beta_quantile(p, 0.5), grid_median, epsilon = 1e-6);
    }

    #[test]
    fn quantile_monotone_in_level_with_endpoint_singularities() {
        let p = BetaParams::new(0.5, 0.5).unwrap();
        let mut last = 0.0;
        for i in 1..20 {
            let q = i as f64 / 20.0;
            let x = beta_quantile(p, q);
            assert!(x > last && x < 1.0, "q={q}: {x}");
            last = x;
        }
        // arcsine distribution median is 1/2
        assert_abs_diff_eq!(beta_quantile(p, 0.5), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn cdf_is_calibrated_against_closed_forms() {
        // Beta(2,1): F(x) = x^2; Beta(1,3): F(x) = 1-(1-x)^3
        let p21 = BetaParams::new(2.0, 1.0).unwrap();
        let p13 = BetaParams::new(1.0, 3.0).unwrap();
        for &x in &[0.05, 0.2, 0.43, 0.5, 0.77, 0.9] {
            assert_abs_diff_eq!(beta_cdf(p21, x), x * x, epsilon = 1e-10);
            assert_abs_diff_eq!(beta_cdf(p13, x), 1.0 - (1.0 - x).powi(3), epsilon = 1e-10);
        }
    }
}
