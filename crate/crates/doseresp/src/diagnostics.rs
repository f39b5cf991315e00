//! Convergence diagnostics and posterior summaries: split potential-scale
//! reduction, autocorrelation-based effective sample size, quantile
//! summaries, and kernel density series for plotting.

use crate::math::{mean, quantile_type7, sample_variance};
use crate::sampler::SampleRun;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {want} draws per chain, got {got}")]
    TooFewDraws { want: usize, got: usize },
    #[error("need at least one chain")]
    NoChains,
    #[error("need at least {want} draws for a density estimate, got {got}")]
    TooFewForDensity { want: usize, got: usize },
}

/// A diagnostic that can be degenerate (zero-variance input) instead of a
/// number; degeneracy is reported explicitly, never as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagnosticValue {
    Value(f64),
    Degenerate,
}

impl DiagnosticValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            DiagnosticValue::Value(v) => Some(*v),
            DiagnosticValue::Degenerate => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, DiagnosticValue::Degenerate)
    }
}

impl fmt::Display for DiagnosticValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticValue::Value(v) => write!(f, "{v}"),
            DiagnosticValue::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// Splits each chain in half, dropping the middle draw of odd-length
/// chains. Chains are truncated to the shortest length first.
fn split_halves(chains: &[Vec<f64>]) -> (Vec<&[f64]>, usize) {
    let min_len = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    let half = min_len / 2;
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        halves.push(&chain[..half]);
        halves.push(&chain[min_len - half..min_len]);
    }
    (halves, half)
}

/// Split potential-scale-reduction over chain halves:
/// `sqrt((W·(m−1)/m + B/m) / W)` with `m` draws per half, `W` the mean
/// within-half variance and `B` m times the variance of the half means.
///
/// Splitting makes the statistic sensitive to within-chain drift and lets a
/// single chain be checked against its own halves. All-identical draws make
/// `W` vanish; that is reported as [`DiagnosticValue::Degenerate`].
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<DiagnosticValue, DiagnosticsError> {
    if chains.is_empty() {
        return Err(DiagnosticsError::NoChains);
    }
    let min_len = chains.iter().map(|c| c.len()).min().unwrap();
    if min_len < 4 {
        return Err(DiagnosticsError::TooFewDraws { want: 4, got: min_len });
    }
    let (halves, m) = split_halves(chains);
    let half_means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let within: f64 = mean(&halves.iter().map(|h| sample_variance(h)).collect::<Vec<_>>());
    let between = m as f64 * sample_variance(&half_means);
    if within <= 0.0 || !within.is_finite() {
        return Ok(DiagnosticValue::Degenerate);
    }
    let m = m as f64;
    let var_plus = within * (m - 1.0) / m + between / m;
    Ok(DiagnosticValue::Value((var_plus / within).sqrt()))
}

/// Effective sample size `MN / (1 + 2 Σ ρ̂_t)` with autocorrelations
/// averaged across chains against the pooled variance estimate and the sum
/// truncated by Geyer's initial-positive-pairs rule. Anti-correlated chains
/// can legitimately exceed the nominal draw count.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<DiagnosticValue, DiagnosticsError> {
    if chains.is_empty() {
        return Err(DiagnosticsError::NoChains);
    }
    let n = chains.iter().map(|c| c.len()).min().unwrap();
    if n < 8 {
        return Err(DiagnosticsError::TooFewDraws { want: 8, got: n });
    }
    let m = chains.len();
    let chain_means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let chain_vars: Vec<f64> = chains.iter().map(|c| sample_variance(&c[..n])).collect();
    let within = mean(&chain_vars);
    if within <= 0.0 || !within.is_finite() {
        return Ok(DiagnosticValue::Degenerate);
    }
    let n_f = n as f64;
    let between_over_n = if m >= 2 { sample_variance(&chain_means) } else { 0.0 };
    let var_plus = within * (n_f - 1.0) / n_f + between_over_n;

    // combined autocovariance at one lag, averaged across chains
    let gamma = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for (c, chain) in chains.iter().enumerate() {
            let mu = chain_means[c];
            let mut s = 0.0;
            for t in 0..n - lag {
                s += (chain[t] - mu) * (chain[t + lag] - mu);
            }
            acc += s / n_f;
        }
        acc / m as f64
    };
    let rho = |lag: usize| -> f64 { 1.0 - (within - gamma(lag)) / var_plus };

    // Geyer initial-positive pairs: tau = -1 + 2 sum of P_k while P_k > 0
    let mut tau = -1.0;
    let mut lag = 0usize;
    while lag + 1 < n {
        let pair = if lag == 0 { 1.0 + rho(1) } else { rho(lag) + rho(lag + 1) };
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    let total = (m * n) as f64;
    let tau = tau.max(1.0 / total);
    Ok(DiagnosticValue::Value(total / tau))
}

/// Summary row for one parameter (quantiles are type-7 over pooled draws).
#[derive(Debug, Clone)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub split_rhat: DiagnosticValue,
    pub ess: DiagnosticValue,
    /// Monte-Carlo standard error `sd / sqrt(ESS)`.
    pub mcse: Option<f64>,
}

/// Per-parameter summaries plus run-level divergence accounting.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub parameters: Vec<ParameterSummary>,
    pub divergence_count: usize,
    pub total_draws: usize,
}

impl PosteriorSummary {
    pub fn parameter(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn divergent_fraction(&self) -> f64 {
        self.divergence_count as f64 / self.total_draws as f64
    }

    /// Parameters whose split-Rhat exceeds `threshold` (or is degenerate).
    pub fn failing_rhat(&self, threshold: f64) -> Vec<&ParameterSummary> {
        self.parameters
            .iter()
            .filter(|p| p.split_rhat.value().map(|v| v > threshold).unwrap_or(true))
            .collect()
    }

    /// Smallest effective sample size over parameters with a defined ESS.
    pub fn min_ess(&self) -> Option<f64> {
        self.parameters
            .iter()
            .filter_map(|p| p.ess.value())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

/// Pools chains and produces the per-parameter summary table. Diagnostics
/// that cannot be computed (single draw, zero variance) report as
/// degenerate rather than failing the whole summary.
pub fn summarize_run(run: &SampleRun) -> Result<PosteriorSummary, DiagnosticsError> {
    if run.total_draws() == 0 {
        return Err(DiagnosticsError::TooFewDraws { want: 1, got: 0 });
    }
    let mut parameters = Vec::with_capacity(run.dim());
    for (idx, name) in run.parameter_names.iter().enumerate() {
        let per_chain = run.per_chain_param(idx);
        let mut pooled = run.pooled_param(idx);
        pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean_v = mean(&pooled);
        let sd = sample_variance(&pooled).sqrt();
        let rhat = match split_rhat(&per_chain) {
            Ok(v) => v,
            Err(DiagnosticsError::TooFewDraws { .. }) => DiagnosticValue::Degenerate,
            Err(e) => return Err(e),
        };
        let ess = match effective_sample_size(&per_chain) {
            Ok(v) => v,
            Err(DiagnosticsError::TooFewDraws { .. }) => DiagnosticValue::Degenerate,
            Err(e) => return Err(e),
        };
        let mcse = ess.value().map(|e| sd / e.sqrt());
        parameters.push(ParameterSummary {
            name: name.clone(),
            mean: mean_v,
            sd,
            q25: quantile_type7(&pooled, 0.25),
            median: quantile_type7(&pooled, 0.5),
            q75: quantile_type7(&pooled, 0.75),
            split_rhat: rhat,
            ess,
            mcse,
        });
    }
    Ok(PosteriorSummary {
        parameters,
        divergence_count: run.total_divergences(),
        total_draws: run.total_draws(),
    })
}

/// Kernel density series for plotting, or a single spike for zero-variance
/// draws.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySeries {
    Spike { location: f64 },
    Curve(Vec<(f64, f64)>),
}

/// Gaussian kernel density estimate on an evenly spaced grid spanning
/// `[min − 3h, max + 3h]`. Bandwidth defaults to Silverman's rule
/// `0.9·min(sd, IQR/1.34)·n^{-1/5}` and can be overridden.
pub fn density_series(
    draws: &[f64],
    points: usize,
    bandwidth: Option<f64>,
) -> Result<DensitySeries, DiagnosticsError> {
    if draws.len() < 10 {
        return Err(DiagnosticsError::TooFewForDensity { want: 10, got: draws.len() });
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] == sorted[sorted.len() - 1] {
        return Ok(DensitySeries::Spike { location: sorted[0] });
    }
    let sd = sample_variance(&sorted).sqrt();
    let n = draws.len() as f64;
    let h = bandwidth.unwrap_or_else(|| {
        let iqr = quantile_type7(&sorted, 0.75) - quantile_type7(&sorted, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        0.9 * spread * n.powf(-0.2)
    });
    let lo = sorted[0] - 3.0 * h;
    let hi = sorted[sorted.len() - 1] + 3.0 * h;
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let curve: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = lo + i as f64 * step;
            let density: f64 =
                draws.iter().map(|d| (-0.5 * ((x - d) / h).powi(2)).exp()).sum::<f64>() * norm;
            (x, density)
        })
        .collect();
    Ok(DensitySeries::Curve(curve))
}
