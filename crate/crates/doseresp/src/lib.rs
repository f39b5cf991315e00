//! Bayesian dose-response inference engine.
//!
//! Fits three dose-response models — a Hill-equation curve, a pooled
//! binomial-logit regression, and a hierarchical regression with an
//! optional non-centered parameterization — using a from-scratch
//! Hamiltonian Monte-Carlo sampler, and cross-validates every sampled
//! posterior against two independent references: the closed-form
//! Beta-Binomial conjugate posterior and an adaptive-grid quadrature
//! evaluator.

pub mod conjugate;
pub mod data;
pub mod diagnostics;
pub mod hill;
pub mod math;
pub mod model;
pub mod oracle;
pub mod prior;
pub mod sampler;

pub use conjugate::{beta_binomial_posterior, beta_moments, beta_quantile, BetaParams};
pub use data::{parse_trials, serialize_trials, summarize, survival_ratios, synthesize, Dataset, TrialRecord};
pub use diagnostics::{
    density_series, effective_sample_size, split_rhat, summarize_run, DensitySeries,
    DiagnosticValue, ParameterSummary, PosteriorSummary,
};
pub use hill::{fit_hill, fitted_curve, hill_coefficient, hill_response, weighted_residual, HillFit};
pub use model::{
    binomial_logit_log_pmf, log_posterior_with_gradient, HierLrModel, ModelConfig, ModelDensity,
    ModelKind, Parameterization, ProbabilityModel, SimpleLrModel,
};
pub use oracle::{grid_moments, grid_posterior, grid_posterior_fn, quadrature_1d, GridBounds, GridPosterior};
pub use prior::PriorSpec;
pub use sampler::{run_chains, HmcConfig, SampleRun};
