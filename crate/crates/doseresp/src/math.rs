//! Scalar numerical kernels shared across the crate: stable logistic
//! transforms, log-gamma, and quantile/summary helpers.

use std::f64::consts::PI;

/// Logistic sigmoid `1 / (1 + exp(-x))`, branched on the sign of `x` so that
/// large arguments saturate to 0/1 instead of overflowing.
pub fn inverse_logit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Log-odds transform, inverse of [`inverse_logit`] on (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Stable evaluation of `log(1 + exp(x))`.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 33.3 {
        // exp(-x) underflows the addition entirely
        x
    } else if x >= 0.0 {
        x + (-x).exp().ln_1p()
    } else if x > -37.0 {
        x.exp().ln_1p()
    } else {
        x.exp()
    }
}

const LANCZOS_G: f64 = 7.0;
// published coefficients, kept verbatim
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function (Lanczos approximation, g = 7).
///
/// Relative accuracy is ~1e-13 over the positive reals, which is all the
/// crate needs: binomial coefficients and Beta normalizers.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// `log C(n, k)` via log-gamma.
pub fn ln_choose(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `log B(a, b) = lnΓ(a) + lnΓ(b) − lnΓ(a+b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Linear-interpolation quantile (the type-7 convention used by R's default
/// and NumPy's `linear`): `h = (n-1)p`, interpolate between the two order
/// statistics bracketing `h`. Input must be sorted ascending.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level outside [0,1]");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Arithmetic mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n−1 denominator); 0 for slices shorter than 2.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard normal log-density.
pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * (2.0 * PI).ln() - 0.5 * x * x
}

/// Standard normal CDF via the Abramowitz–Stegun 7.1.26 erf polynomial.
/// Absolute error below 1e-7 — sufficient for the distributional smoke
/// tests that consume it.
pub fn standard_normal_cdf(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let sign = if z < 0.0 { -1.0 } else { 1.0 };
    let z = z.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * z);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erf = 1.0 - poly * (-z * z).exp();
    0.5 * (1.0 + sign * erf)
}

/// Kahan-compensated sum; used where accumulation-order error must stay at
/// machine precision even for long vectors.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn inverse_logit_symmetry_point() {
        assert_eq!(inverse_logit(0.0), 0.5);
    }

    #[test]
    fn inverse_logit_at_posterior_mean_eta() {
        // eta = -14.03 + 9.39 * 1.30
        let eta = -14.03 + 9.39 * 1.30;
        assert_abs_diff_eq!(inverse_logit(eta), 0.139_074_286, epsilon = 1e-6);
    }

    #[test]
    fn inverse_logit_saturates_without_overflow() {
        assert_eq!(inverse_logit(1000.0), 1.0);
        assert_eq!(inverse_logit(-1000.0), 0.0);
        assert!(inverse_logit(f64::MAX).is_finite());
    }

    #[test]
    fn inverse_logit_complement_identity() {
        let mut x = -30.0;
        while x <= 30.0 {
            let s = inverse_logit(x) + inverse_logit(-x);
            assert!((s - 1.0).abs() < 1e-15, "x={x}: {s}");
            x += 0.37;
        }
    }

    #[test]
    fn logit_round_trip() {
        for &p in &[1e-8, 0.2, 0.5, 0.9, 1.0 - 1e-9] {
            assert_abs_diff_eq!(inverse_logit(logit(p)), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn log1p_exp_matches_naive_in_safe_range() {
        let mut x: f64 = -30.0;
        while x <= 30.0 {
            let naive = (1.0 + x.exp()).ln();
            assert_abs_diff_eq!(log1p_exp(x), naive, epsilon = 1e-12);
            x += 0.61;
        }
        // saturation regimes
        assert_eq!(log1p_exp(1000.0), 1000.0);
        assert!(log1p_exp(-800.0).abs() < 1e-300);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..=15u32 {
            assert_abs_diff_eq!(ln_gamma(n as f64), fact.ln(), epsilon = 1e-11);
            fact *= n as f64;
        }
    }

    #[test]
    fn ln_gamma_half() {
        assert_abs_diff_eq!(ln_gamma(0.5), PI.sqrt().ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(1.5), (PI.sqrt() / 2.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn ln_choose_small_table() {
        assert_abs_diff_eq!(ln_choose(20, 4), 4845f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(ln_choose(5, 0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_choose(52, 26), 495_918_532_948_104f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn ln_beta_integer_identity() {
        // B(5,7) = 4! 6! / 11!
        let expect = (24.0f64 * 720.0 / 39_916_800.0).ln();
        assert_abs_diff_eq!(ln_beta(5.0, 7.0), expect, epsilon = 1e-11);
    }

    #[test]
    fn quantile_type7_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(quantile_type7(&xs, 0.25), 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(quantile_type7(&xs, 0.5), 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(quantile_type7(&xs, 0.75), 3.25, epsilon = 1e-12);
        assert_eq!(quantile_type7(&xs, 0.0), 1.0);
        assert_eq!(quantile_type7(&xs, 1.0), 4.0);
        assert_eq!(quantile_type7(&[7.5], 0.3), 7.5);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_abs_diff_eq!(standard_normal_cdf(0.0), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(standard_normal_cdf(1.96), 0.975_002_1, epsilon = 2e-7);
        assert_abs_diff_eq!(standard_normal_cdf(-1.0), 0.158_655_25, epsilon = 2e-7);
        assert_abs_diff_eq!(standard_normal_cdf(8.0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs: Vec<f64> = (0..100_000).map(|i| 1e-6 + (i as f64) * 1e-18).collect();
        let kahan = compensated_sum(xs.iter().copied());
        let expect = 1e-6 * 100_000.0 + 1e-18 * (99_999.0 * 100_000.0 / 2.0);
        assert!((kahan - expect).abs() / expect < 1e-14);
    }
}
