//! Dose-response trial datasets: CSV ingestion and validation, summary
//! statistics, survival ratios, and a seeded synthetic generator.

use crate::math::{inverse_logit, mean, quantile_type7};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Expected CSV header for trial data.
pub const CSV_HEADER: &str = "dosage,total,improved";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: parse error: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: invalid record: {msg}")]
    Validation { line: usize, msg: String },
    #[error("expected header `{CSV_HEADER}`, found `{0}`")]
    Header(String),
    #[error("dataset has no records")]
    Empty,
}

/// One dosage experiment: dose `d` given to `total` subjects, of which
/// `improved` responded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    dosage: f64,
    total: u32,
    improved: u32,
}

impl TrialRecord {
    /// Validated constructor: dosage must be positive and finite, `total`
    /// positive, and `improved <= total`.
    pub fn new(dosage: f64, total: u32, improved: u32) -> Result<Self, String> {
        if !dosage.is_finite() || dosage <= 0.0 {
            return Err(format!("dosage must be positive, got {dosage}"));
        }
        if total == 0 {
            return Err("total subjects must be positive".into());
        }
        if improved > total {
            return Err(format!("improved ({improved}) exceeds total ({total})"));
        }
        Ok(Self { dosage, total, improved })
    }

    pub fn dosage(&self) -> f64 {
        self.dosage
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn improved(&self) -> u32 {
        self.improved
    }

    /// `improved / total`, always in [0, 1].
    pub fn ratio(&self) -> f64 {
        self.improved as f64 / self.total as f64
    }
}

/// A validated, ordered collection of trial records (at least one).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<TrialRecord>,
}

impl Dataset {
    pub fn new(records: Vec<TrialRecord>) -> Result<Self, DataError> {
        if records.is_empty() {
            return Err(DataError::Empty);
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    /// Number of experiments.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Six-number summary of one column (type-7 quartiles, arithmetic mean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl ColumnSummary {
    fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ColumnSummary {
            min: sorted[0],
            q1: quantile_type7(&sorted, 0.25),
            median: quantile_type7(&sorted, 0.5),
            mean: mean(&sorted),
            q3: quantile_type7(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Per-column summaries for dosage, total subjects, and improved subjects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub dosage: ColumnSummary,
    pub total: ColumnSummary,
    pub improved: ColumnSummary,
}

/// Parses trial CSV text: header `dosage,total,improved`, one record per
/// line, `.` decimal separator. Errors carry 1-based line numbers (the
/// header is line 1). Blank lines are skipped.
pub fn parse_trials(csv_text: &str) -> Result<Dataset, DataError> {
    let mut lines = csv_text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line,
            None => return Err(DataError::Header(String::new())),
        }
    };
    if header.trim() != CSV_HEADER {
        return Err(DataError::Header(header.trim().to_string()));
    }

    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(DataError::Parse {
                line: line_no,
                msg: format!("expected 3 comma-separated fields, found {}", fields.len()),
            });
        }
        let dosage: f64 = fields[0].parse().map_err(|_| DataError::Parse {
            line: line_no,
            msg: format!("invalid dosage `{}`", fields[0]),
        })?;
        let total: u32 = fields[1].parse().map_err(|_| DataError::Parse {
            line: line_no,
            msg: format!("invalid total `{}`", fields[1]),
        })?;
        let improved: u32 = fields[2].parse().map_err(|_| DataError::Parse {
            line: line_no,
            msg: format!("invalid improved `{}`", fields[2]),
        })?;
        let record = TrialRecord::new(dosage, total, improved)
            .map_err(|msg| DataError::Validation { line: line_no, msg })?;
        records.push(record);
    }
    Dataset::new(records)
}

/// Serializes a dataset back to the CSV format accepted by
/// [`parse_trials`]; floats use shortest round-trip formatting so
/// parse ∘ serialize is the identity.
pub fn serialize_trials(ds: &Dataset) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in ds.records() {
        out.push_str(&format!("{},{},{}\n", r.dosage(), r.total(), r.improved()));
    }
    out
}

/// Column summaries over the dataset.
pub fn summarize(ds: &Dataset) -> SummaryStats {
    let dosages: Vec<f64> = ds.records().iter().map(|r| r.dosage()).collect();
    let totals: Vec<f64> = ds.records().iter().map(|r| r.total() as f64).collect();
    let improved: Vec<f64> = ds.records().iter().map(|r| r.improved() as f64).collect();
    SummaryStats {
        dosage: ColumnSummary::from_values(&dosages),
        total: ColumnSummary::from_values(&totals),
        improved: ColumnSummary::from_values(&improved),
    }
}

/// `(dosage, improved/total)` pairs sorted ascending by dosage. Tied
/// dosages stay as distinct points in their original relative order.
pub fn survival_ratios(ds: &Dataset) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = ds.records().iter().map(|r| (r.dosage(), r.ratio())).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs
}

/// Dosage range of the generator, matching the observed span of the study
/// data this crate models.
pub const SYNTH_DOSE_RANGE: (f64, f64) = (0.730, 1.890);
/// Subject-count range of the generator.
pub const SYNTH_TOTAL_RANGE: (u32, u32) = (10, 52);

/// Generates a synthetic dataset from the pooled logistic model:
/// dosages uniform over [`SYNTH_DOSE_RANGE`], totals uniform over
/// [`SYNTH_TOTAL_RANGE`], and `improved ~ Binomial(total, logit⁻¹(α + β·d))`.
///
/// Fully determined by `seed`; per record the generator draws dosage,
/// then total, then `total` Bernoulli variates, in that order.
pub fn synthesize(experiments: usize, alpha_true: f64, beta_true: f64, seed: u64) -> Dataset {
    assert!(experiments >= 1, "need at least one experiment");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(experiments);
    for _ in 0..experiments {
        let dosage =
            SYNTH_DOSE_RANGE.0 + rng.random::<f64>() * (SYNTH_DOSE_RANGE.1 - SYNTH_DOSE_RANGE.0);
        let total = rng.random_range(SYNTH_TOTAL_RANGE.0..=SYNTH_TOTAL_RANGE.1);
        let p = inverse_logit(alpha_true + beta_true * dosage);
        let improved = (0..total).filter(|_| rng.random::<f64>() < p).count() as u32;
        records.push(TrialRecord::new(dosage, total, improved).expect("generator invariants"));
    }
    Dataset::new(records).expect("experiments >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn parse_single_record() {
        let ds = parse_trials("dosage,total,improved\n1.30,20,4").unwrap();
        assert_eq!(ds.len(), 1);
        let r = ds.records()[0];
        assert_eq!(r.dosage(), 1.30);
        assert_eq!(r.total(), 20);
        assert_eq!(r.improved(), 4);
    }

    #[test]
    fn parse_rejects_improved_above_total() {
        let err = parse_trials("dosage,total,improved\n1.30,20,25").unwrap_err();
        match err {
            DataError::Validation { line, .. } => assert_eq!(line, 2),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_malformed_number_with_line() {
        let err = parse_trials("dosage,total,improved\n1.30,20,4\nx,20,4").unwrap_err();
        match err {
            DataError::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("dosage"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_nonpositive_dosage() {
        let err = parse_trials("dosage,total,improved\n0.0,20,4").unwrap_err();
        assert!(matches!(err, DataError::Validation { line: 2, .. }));
    }

    #[test]
    fn parse_rejects_empty_body() {
        assert!(matches!(parse_trials("dosage,total,improved\n"), Err(DataError::Empty)));
    }

    #[test]
    fn parse_rejects_wrong_header() {
        assert!(matches!(parse_trials("dose,n,k\n1,2,1"), Err(DataError::Header(_))));
    }

    #[test]
    fn summarize_degenerate_single_record() {
        let ds = parse_trials("dosage,total,improved\n1.3,20,4").unwrap();
        let s = summarize(&ds);
        for c in [s.dosage, s.total, s.improved] {
            assert_eq!(c.min, c.q1);
            assert_eq!(c.q1, c.median);
            assert_eq!(c.median, c.mean);
            assert_eq!(c.mean, c.q3);
            assert_eq!(c.q3, c.max);
        }
        assert_eq!(s.dosage.median, 1.3);
        assert_eq!(s.total.median, 20.0);
        assert_eq!(s.improved.median, 4.0);
    }

    #[test]
    fn summarize_type7_quartiles() {
        let records = vec![
            TrialRecord::new(1.0, 10, 1).unwrap(),
            TrialRecord::new(2.0, 10, 1).unwrap(),
            TrialRecord::new(3.0, 10, 1).unwrap(),
            TrialRecord::new(4.0, 10, 1).unwrap(),
        ];
        let s = summarize(&Dataset::new(records).unwrap());
        assert_abs_diff_eq!(s.dosage.median, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.dosage.q1, 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(s.dosage.q3, 3.25, epsilon = 1e-12);
    }

    #[test]
    fn survival_ratio_edge_values() {
        let records = vec![
            TrialRecord::new(1.3, 20, 4).unwrap(),
            TrialRecord::new(0.9, 15, 0).unwrap(),
            TrialRecord::new(1.8, 12, 12).unwrap(),
        ];
        let ratios = survival_ratios(&Dataset::new(records).unwrap());
        // sorted ascending by dosage
        assert_eq!(ratios[0], (0.9, 0.0));
        assert_eq!(ratios[1], (1.3, 0.2));
        assert_eq!(ratios[2], (1.8, 1.0));
    }

    #[test]
    fn survival_ratio_keeps_tied_dosages() {
        let records = vec![
            TrialRecord::new(1.3, 20, 4).unwrap(),
            TrialRecord::new(1.3, 10, 10).unwrap(),
        ];
        let ratios = survival_ratios(&Dataset::new(records).unwrap());
        assert_eq!(ratios.len(), 2);
        assert_eq!(ratios[0], (1.3, 0.2));
        assert_eq!(ratios[1], (1.3, 1.0));
    }

    #[test]
    fn synthesize_is_deterministic() {
        let a = synthesize(71, -14.03, 9.39, 12345);
        let b = synthesize(71, -14.03, 9.39, 12345);
        assert_eq!(a, b);
        let c = synthesize(71, -14.03, 9.39, 12346);
        assert_ne!(a, c);
    }

    #[test]
    fn synthesize_zero_coefficients_center_near_half() {
        // inverse_logit(0) = 0.5, so pooled ratio over many seeds ~ 0.5
        let mut pooled_improved = 0u64;
        let mut pooled_total = 0u64;
        for seed in 0..200 {
            let ds = synthesize(1, 0.0, 0.0, seed);
            let r = ds.records()[0];
            pooled_improved += r.improved() as u64;
            pooled_total += r.total() as u64;
        }
        let ratio = pooled_improved as f64 / pooled_total as f64;
        assert!((ratio - 0.5).abs() < 0.05, "pooled ratio {ratio}");
    }

    #[test]
    fn synthesize_ratios_rise_with_dose() {
        // Spearman rank correlation between dosage and ratio is positive
        // for a steep positive slope.
        let ds = synthesize(500, -14.03, 9.39, 7);
        let pairs = survival_ratios(&ds);
        let n = pairs.len();
        let rank = |values: &[f64]| -> Vec<f64> {
            let mut idx: Vec<usize> = (0..values.len()).collect();
            idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            let mut ranks = vec![0.0; values.len()];
            let mut i = 0;
            while i < idx.len() {
                let mut j = i;
                while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
                    j += 1;
                }
                let avg = (i + j) as f64 / 2.0 + 1.0;
                for k in i..=j {
                    ranks[idx[k]] = avg;
                }
                i = j + 1;
            }
            ranks
        };
        let doses: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ratios: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let rd = rank(&doses);
        let rr = rank(&ratios);
        let md = mean(&rd);
        let mr = mean(&rr);
        let cov: f64 = rd.iter().zip(&rr).map(|(a, b)| (a - md) * (b - mr)).sum();
        let vd: f64 = rd.iter().map(|a| (a - md) * (a - md)).sum();
        let vr: f64 = rr.iter().map(|b| (b - mr) * (b - mr)).sum();
        let spearman = cov / (vd * vr).sqrt();
        assert!(spearman > 0.0, "spearman {spearman} over {n} records");
    }

    #[test]
    fn synthesize_respects_marginal_ranges() {
        let ds = synthesize(300, -14.03, 9.39, 3);
        for r in ds.records() {
            assert!(r.dosage() >= SYNTH_DOSE_RANGE.0 && r.dosage() <= SYNTH_DOSE_RANGE.1);
            assert!(r.total() >= SYNTH_TOTAL_RANGE.0 && r.total() <= SYNTH_TOTAL_RANGE.1);
        }
    }

    proptest! {
        #[test]
        fn round_trip_parse_serialize(seed in 0u64..1000, n in 1usize..40) {
            let ds = synthesize(n, -10.0, 7.0, seed);
            let text = serialize_trials(&ds);
            let back = parse_trials(&text).unwrap();
            prop_assert_eq!(ds, back);
        }

        #[test]
        fn summarize_is_permutation_invariant(seed in 0u64..1000) {
            let ds = synthesize(23, -14.0, 9.0, seed);
            let mut reversed = ds.records().to_vec();
            reversed.reverse();
            let ds_rev = Dataset::new(reversed).unwrap();
            let a = summarize(&ds);
            let b = summarize(&ds_rev);
            prop_assert_eq!(a, b);
        }
    }
}
