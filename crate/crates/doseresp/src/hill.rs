//! Hill-equation dose-response model: `E(d) = R_max / (1 + (d50/d)^C_H)`
//! with the steepness coefficient `C_H = log 81 / log(d90/d10)`, plus a
//! deterministic two-stage fit (level-crossing initialization on an
//! isotonic-smoothed curve, then coordinate-descent least squares).

use crate::data::Dataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HillError {
    #[error("d10 and d90 must be positive and distinct, got ({d10}, {d90})")]
    DegenerateDoses { d10: f64, d90: f64 },
    #[error("dose must be positive, got {0}")]
    NonPositiveDose(f64),
    #[error("need at least 4 records to fit, got {0}")]
    TooFewRecords(usize),
    #[error("survival ratios are all equal; no curve to fit")]
    FlatRatios,
    #[error("response level {level} (for {name}) is not bracketed by the data")]
    LevelNotBracketed { name: &'static str, level: f64 },
}

/// Fitted Hill curve parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillFit {
    /// Maximum response, in (0, 1].
    pub r_max: f64,
    /// Dose of half-maximal response.
    pub d50: f64,
    /// Hill coefficient.
    pub c_h: f64,
    /// Dose of 10% maximal response.
    pub d10: f64,
    /// Dose of 90% maximal response.
    pub d90: f64,
}

/// `C_H = log(81) / log(d90 / d10)`; positive exactly when `d90 > d10`.
pub fn hill_coefficient(d10: f64, d90: f64) -> Result<f64, HillError> {
    if !(d10 > 0.0) || !(d90 > 0.0) || d10 == d90 {
        return Err(HillError::DegenerateDoses { d10, d90 });
    }
    Ok(81f64.ln() / (d90 / d10).ln())
}

/// Response magnitude at dose `d`.
pub fn hill_response(d: f64, fit: &HillFit) -> Result<f64, HillError> {
    if !(d > 0.0) {
        return Err(HillError::NonPositiveDose(d));
    }
    Ok(fit.r_max / (1.0 + (fit.d50 / d).powf(fit.c_h)))
}

/// Weighted least-squares loss `Σ w_i (n_i/N_i − f(d_i))²`; weights are the
/// subject counts (binomial variance scaling) or 1 when unweighted.
pub fn weighted_residual(ds: &Dataset, weighted: bool, f: impl Fn(f64) -> f64) -> f64 {
    ds.records()
        .iter()
        .map(|r| {
            let w = if weighted { r.total() as f64 } else { 1.0 };
            let e = r.ratio() - f(r.dosage());
            w * e * e
        })
        .sum()
}

/// Weighted pool-adjacent-violators: the nondecreasing sequence closest to
/// `y` in the weighted L2 sense.
fn isotonic_increasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    // blocks of (weighted mean, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&value, &weight) in y.iter().zip(w) {
        blocks.push((value, weight, 1));
        while blocks.len() > 1 {
            let last = blocks[blocks.len() - 1];
            let prev = blocks[blocks.len() - 2];
            if prev.0 <= last.0 {
                break;
            }
            let weight = prev.1 + last.1;
            let mean = (prev.0 * prev.1 + last.0 * last.1) / weight;
            blocks.truncate(blocks.len() - 2);
            blocks.push((mean, weight, prev.2 + last.2));
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (mean, _, count) in blocks {
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}

/// First dose at which the piecewise-linear curve through `(d_i, s_i)`
/// reaches `level`, by interpolation. The sequence `s` must be
/// nondecreasing.
fn crossing_dose(
    doses: &[f64],
    smoothed: &[f64],
    level: f64,
    name: &'static str,
) -> Result<f64, HillError> {
    if smoothed[0] > level {
        return Err(HillError::LevelNotBracketed { name, level });
    }
    for i in 0..smoothed.len() {
        if smoothed[i] >= level {
            if i == 0 || smoothed[i] == smoothed[i - 1] {
                return Ok(doses[i]);
            }
            let t = (level - smoothed[i - 1]) / (smoothed[i] - smoothed[i - 1]);
            return Ok(doses[i - 1] + t * (doses[i] - doses[i - 1]));
        }
    }
    Err(HillError::LevelNotBracketed { name, level })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..64 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Fits the Hill curve to a dataset.
///
/// Stage 1 smooths the survival ratios with weighted isotonic regression
/// and reads `r_max` and the 10%/50%/90% level crossings off the monotone
/// curve. Stage 2 refines `(r_max, d50, c_h)` by coordinate descent (100
/// sweeps of golden-section line searches, each accepted only if the
/// weighted residual does not increase), then back-solves `d10`/`d90` from
/// the refined pair.
pub fn fit_hill(ds: &Dataset) -> Result<HillFit, HillError> {
    fit_hill_impl(ds, true)
}

/// [`fit_hill`] with unit weights instead of subject counts.
pub fn fit_hill_unweighted(ds: &Dataset) -> Result<HillFit, HillError> {
    fit_hill_impl(ds, false)
}

fn fit_hill_impl(ds: &Dataset, weighted: bool) -> Result<HillFit, HillError> {
    if ds.len() < 4 {
        return Err(HillError::TooFewRecords(ds.len()));
    }
    // canonical record order (dose, ratio, weight): the fit is then exactly
    // invariant to the input order, tied dosages included
    let mut triples: Vec<(f64, f64, f64)> = ds
        .records()
        .iter()
        .map(|r| (r.dosage(), r.ratio(), if weighted { r.total() as f64 } else { 1.0 }))
        .collect();
    triples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let doses: Vec<f64> = triples.iter().map(|t| t.0).collect();
    let ratios: Vec<f64> = triples.iter().map(|t| t.1).collect();
    let weights: Vec<f64> = triples.iter().map(|t| t.2).collect();
    if ratios.iter().all(|&r| r == ratios[0]) {
        return Err(HillError::FlatRatios);
    }
    let smoothed = isotonic_increasing(&ratios, &weights);

    let r_max0 = smoothed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(r_max0 > 0.0) {
        return Err(HillError::FlatRatios);
    }
    let d10 = crossing_dose(&doses, &smoothed, 0.1 * r_max0, "d10")?;
    let d50 = crossing_dose(&doses, &smoothed, 0.5 * r_max0, "d50")?;
    let d90 = crossing_dose(&doses, &smoothed, 0.9 * r_max0, "d90")?;
    let c_h0 = hill_coefficient(d10, d90)?;

    // stage 2: coordinate descent on (r_max, d50, c_h), loss summed in
    // canonical order
    let loss = |r_max: f64, d50: f64, c_h: f64| -> f64 {
        let fit = HillFit { r_max, d50, c_h, d10, d90 };
        triples
            .iter()
            .map(|&(d, ratio, w)| {
                let e = ratio - hill_response(d, &fit).expect("doses are positive");
                w * e * e
            })
            .sum()
    };
    let mut r = r_max0.clamp(1e-6, 1.0);
    let mut d = d50;
    let mut c = c_h0.max(1e-6);
    let mut current = loss(r, d, c);
    for _ in 0..100 {
        let before = current;

        let cand = golden_section(|x| loss(x, d, c), (0.5 * r).max(1e-6), (1.5 * r).min(1.0));
        if loss(cand, d, c) <= current {
            r = cand;
            current = loss(r, d, c);
        }
        let cand = golden_section(|x| loss(r, x, c), 0.5 * d, 1.5 * d);
        if loss(r, cand, c) <= current {
            d = cand;
            current = loss(r, d, c);
        }
        let cand = golden_section(|x| loss(r, d, x), 0.5 * c, 1.5 * c);
        if loss(r, d, cand) <= current {
            c = cand;
            current = loss(r, d, c);
        }

        debug_assert!(current <= before + 1e-12, "descent violated: {before} -> {current}");
        if before - current < 1e-14 {
            break;
        }
    }

    // d10/d90 back-solved from the refined (d50, c_h):
    // (d50/d)^c = 9  =>  d10 = d50 9^{-1/c}, d90 = d50 9^{1/c}
    let spread = 9f64.powf(1.0 / c);
    Ok(HillFit { r_max: r, d50: d, c_h: c, d10: d / spread, d90: d * spread })
}

/// `(d, E(d))` sampled on `points` evenly spaced doses across
/// `[0.9·min dose, 1.1·max dose]`, for plotting.
pub fn fitted_curve(fit: &HillFit, min_dose: f64, max_dose: f64, points: usize) -> Vec<(f64, f64)> {
    let lo = 0.9 * min_dose;
    let hi = 1.1 * max_dose;
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let d = lo + i as f64 * step;
            (d, hill_response(d, fit).expect("grid doses positive"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, TrialRecord};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficient_reference_ratios() {
        // d90/d10 = 81 gives exactly 1; 81 = 9^2 gives 2
        assert_abs_diff_eq!(hill_coefficient(1.0, 81.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hill_coefficient(1.0, 9.0).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            hill_coefficient(1.0, 1.5).unwrap(),
            10.838_045_165_405_82,
            epsilon = 1e-10
        );
    }

    #[test]
    fn coefficient_rejects_equal_or_nonpositive_doses() {
        assert!(hill_coefficient(1.0, 1.0).is_err());
        assert!(hill_coefficient(0.0, 2.0).is_err());
        assert!(hill_coefficient(1.0, -3.0).is_err());
    }

    #[test]
    fn response_reference_points() {
        let fit = HillFit { r_max: 0.9, d50: 1.3, c_h: 10.838_045_165_405_82, d10: 1.0, d90: 1.5 };
        // half-max at d50 exactly
        assert_abs_diff_eq!(hill_response(1.3, &fit).unwrap(), 0.45, epsilon = 1e-14);
        // formula evaluation at d = 1.5
        assert_abs_diff_eq!(
            hill_response(1.5, &fit).unwrap(),
            0.742_543_653_475_712_9,
            epsilon = 1e-12
        );
        // asymptote
        assert_abs_diff_eq!(hill_response(1e9, &fit).unwrap(), 0.9, epsilon = 1e-6);
        assert!(hill_response(0.0, &fit).is_err());
        assert!(hill_response(-1.0, &fit).is_err());
    }

    #[test]
    fn coefficient_and_response_close() {
        // c_h computed from (d10, d90) puts the curve through 0.1 r_max and
        // 0.9 r_max at those doses, when d50 is their geometric midpoint
        let (d10, d90) = (0.8, 1.7);
        let c_h = hill_coefficient(d10, d90).unwrap();
        let fit = HillFit { r_max: 0.85, d50: (d10 * d90).sqrt(), c_h, d10, d90 };
        assert_abs_diff_eq!(hill_response(d10, &fit).unwrap(), 0.1 * 0.85, epsilon = 1e-9);
        assert_abs_diff_eq!(hill_response(d90, &fit).unwrap(), 0.9 * 0.85, epsilon = 1e-9);
    }

    #[test]
    fn response_monotone_for_positive_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let fit = HillFit {
                r_max: rng.random_range(0.05..1.0),
                d50: rng.random_range(0.2..5.0),
                c_h: rng.random_range(0.1..25.0),
                d10: 1.0,
                d90: 2.0,
            };
            let d1 = rng.random_range(0.01..10.0);
            let d2 = d1 + rng.random_range(0.0..5.0);
            let r1 = hill_response(d1, &fit).unwrap();
            let r2 = hill_response(d2, &fit).unwrap();
            assert!(r2 >= r1 - 1e-12, "response must be nondecreasing in dose");
            // the open interval (0, r_max) saturates at f64 precision
            assert!((0.0..=fit.r_max).contains(&r1));
        }
    }

    fn curve_dataset(r_max: f64, d50: f64, c_h: f64) -> Dataset {
        // dense dosage grid with responses generated exactly from the curve
        let fit = HillFit { r_max, d50, c_h, d10: 1.0, d90: 2.0 };
        let total = 1000u32;
        let records: Vec<TrialRecord> = (0..40)
            .map(|i| {
                let d = 0.4 + i as f64 * 0.06;
                let e = hill_response(d, &fit).unwrap();
                TrialRecord::new(d, total, (total as f64 * e).round() as u32).unwrap()
            })
            .collect();
        Dataset::new(records).unwrap()
    }

    #[test]
    fn fit_recovers_generating_parameters() {
        let fit = fit_hill(&curve_dataset(0.9, 1.3, 8.0)).unwrap();
        assert!((fit.r_max - 0.9).abs() / 0.9 < 0.05, "r_max {}", fit.r_max);
        assert!((fit.d50 - 1.3).abs() / 1.3 < 0.05, "d50 {}", fit.d50);
        assert!((fit.c_h - 8.0).abs() / 8.0 < 0.05, "c_h {}", fit.c_h);
        // closure of the back-solved crossings
        assert_abs_diff_eq!(
            hill_response(fit.d10, &fit).unwrap(),
            0.1 * fit.r_max,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            hill_response(fit.d90, &fit).unwrap(),
            0.9 * fit.r_max,
            epsilon = 1e-9
        );
    }

    #[test]
    fn fit_step_data_yields_steep_curve() {
        let mut records = Vec::new();
        for i in 0..6 {
            records.push(TrialRecord::new(0.5 + 0.1 * i as f64, 50, 0).unwrap());
        }
        for i in 0..6 {
            records.push(TrialRecord::new(1.3 + 0.1 * i as f64, 50, 50).unwrap());
        }
        let fit = fit_hill(&Dataset::new(records).unwrap()).unwrap();
        assert!(fit.c_h > 20.0, "c_h {}", fit.c_h);
        assert!(fit.d50 > 1.0 && fit.d50 < 1.3, "d50 {} should sit in the jump", fit.d50);
    }

    #[test]
    fn fit_invariant_to_record_order() {
        let ds = curve_dataset(0.8, 1.1, 6.0);
        let mut reversed = ds.records().to_vec();
        reversed.reverse();
        let a = fit_hill(&ds).unwrap();
        let b = fit_hill(&Dataset::new(reversed).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_reports_missing_level() {
        // all ratios above 10% of max: d10 crossing not bracketed
        let records: Vec<TrialRecord> = (0..6)
            .map(|i| TrialRecord::new(1.0 + 0.1 * i as f64, 100, 60 + 5 * i).unwrap())
            .collect();
        let err = fit_hill(&Dataset::new(records).unwrap()).unwrap_err();
        match err {
            HillError::LevelNotBracketed { name, .. } => assert_eq!(name, "d10"),
            other => panic!("expected level error, got {other:?}"),
        }
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        let tiny = Dataset::new(vec![
            TrialRecord::new(1.0, 10, 1).unwrap(),
            TrialRecord::new(1.5, 10, 9).unwrap(),
        ])
        .unwrap();
        assert!(matches!(fit_hill(&tiny), Err(HillError::TooFewRecords(2))));

        let flat = Dataset::new(
            (0..5)
                .map(|i| TrialRecord::new(1.0 + i as f64 * 0.1, 10, 5).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(matches!(fit_hill(&flat), Err(HillError::FlatRatios)));
    }

    #[test]
    fn fitted_curve_spans_padded_range() {
        let fit = HillFit { r_max: 0.9, d50: 1.3, c_h: 8.0, d10: 1.0, d90: 1.7 };
        let curve = fitted_curve(&fit, 0.73, 1.89, 200);
        assert_eq!(curve.len(), 200);
        assert_abs_diff_eq!(curve[0].0, 0.9 * 0.73, epsilon = 1e-12);
        assert_abs_diff_eq!(curve[199].0, 1.1 * 1.89, epsilon = 1e-12);
        assert!(curve.iter().all(|&(_, e)| e > 0.0 && e < 0.9));
    }

    #[test]
    fn isotonic_pools_violators() {
        let y = [0.1, 0.3, 0.2, 0.5, 0.4, 0.9];
        let w = [1.0; 6];
        let s = isotonic_increasing(&y, &w);
        for pair in s.windows(2) {
            assert!(pair[0] <= pair[1] + 1e-15);
        }
        // weighted mean preserved
        let mean_in: f64 = y.iter().sum::<f64>() / 6.0;
        let mean_out: f64 = s.iter().sum::<f64>() / 6.0;
        assert_abs_diff_eq!(mean_in, mean_out, epsilon = 1e-12);
    }
}
