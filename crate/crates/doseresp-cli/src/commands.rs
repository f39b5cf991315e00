//! Command implementations. Every command writes its artifacts under
//! `--out-dir` plus a `manifest.json`; results are byte-identical across
//! reruns with the same seed and inputs (the manifest's wall-clock duration
//! and the sweep's wall-time column are informative only).

use crate::output::{atomic_write, fmt_f64, sha256_hex, RunManifest};
use crate::svg::{Plot, Series};
use doseresp::data::{parse_trials, serialize_trials, summarize, survival_ratios, DataError, Dataset};
use doseresp::diagnostics::{density_series, summarize_run, DensitySeries, PosteriorSummary};
use doseresp::hill::{fit_hill, fitted_curve, hill_response, weighted_residual};
use doseresp::math::{inverse_logit, ln_beta};
use doseresp::model::{ModelConfig, ModelKind};
use doseresp::oracle::{grid_moments, grid_posterior, quadrature_1d, GridBounds, GridPosterior};
use doseresp::prior::{PriorError, PriorSpec};
use doseresp::sampler::{run_chains, HmcConfig, SampleRun, SamplerError};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Split-Rhat threshold and divergence budget of the convergence gate.
pub const RHAT_GATE: f64 = 1.01;
pub const DIVERGENT_FRACTION_GATE: f64 = 0.01;

#[derive(Debug)]
pub enum CliError {
    /// exit 1: arguments, files, configuration
    Usage(String),
    /// exit 2: the data failed validation
    Data(String),
    /// exit 3: sampling finished but the convergence gate failed
    Convergence { failing: Vec<String>, divergent_fraction: f64 },
    /// exit 4: the sampler found no finite starting point
    Init(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Convergence { .. } => 3,
            CliError::Init(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Convergence { failing, divergent_fraction } => {
                write!(
                    f,
                    "convergence gate failed (split_rhat <= {RHAT_GATE}, divergent fraction <= {DIVERGENT_FRACTION_GATE}): \
                     failing parameters: [{}]; divergent fraction {divergent_fraction:.4}",
                    failing.join(", ")
                )
            }
            CliError::Init(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::InitializationFailed { .. } => CliError::Init(e.to_string()),
            SamplerError::InvalidConfig(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PriorError> for CliError {
    fn from(e: PriorError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<doseresp::model::ModelError> for CliError {
    fn from(e: doseresp::model::ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<doseresp::oracle::OracleError> for CliError {
    fn from(e: doseresp::oracle::OracleError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<doseresp::hill::HillError> for CliError {
    fn from(e: doseresp::hill::HillError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_usage(context: &str, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{context}: {e}"))
}

/// Reads and validates the trial CSV; returns the dataset and the sha256 of
/// the raw bytes for the manifest.
fn read_input(path: &Path) -> Result<(Dataset, String), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| io_usage(&format!("cannot read input `{}`", path.display()), e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Data(format!("input `{}` is not UTF-8", path.display())))?;
    let dataset = parse_trials(&text)?;
    Ok((dataset, format!("sha256:{}", sha256_hex(&bytes))))
}

/// Resolved sampler settings shared by the sampling commands.
#[derive(Debug, Clone)]
pub struct HmcSettings {
    pub chains: usize,
    pub iters: usize,
    pub warmup_frac: f64,
    pub target_accept: f64,
    pub seed: u64,
}

impl HmcSettings {
    pub fn to_config(&self) -> HmcConfig {
        HmcConfig {
            chains: self.chains,
            total_iterations: self.iters,
            warmup_fraction: self.warmup_frac,
            target_accept: self.target_accept,
            seed: self.seed,
            ..HmcConfig::default()
        }
    }
}

fn write_file(out_dir: &Path, name: &str, contents: &str, outputs: &mut Vec<String>) -> Result<PathBuf, CliError> {
    let path = out_dir.join(name);
    atomic_write(&path, contents)
        .map_err(|e| io_usage(&format!("cannot write `{}`", path.display()), e))?;
    outputs.push(name.to_string());
    Ok(path)
}

fn finish_manifest(
    out_dir: &Path,
    command: &str,
    config: serde_json::Value,
    input_digest: Option<String>,
    seed: Option<u64>,
    outputs: Vec<String>,
    started: Instant,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command: command.to_string(),
        config,
        input_digest,
        seed,
        outputs,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest
        .write(out_dir)
        .map_err(|e| io_usage("cannot write manifest.json", e))?;
    Ok(())
}

// ---------------------------------------------------------------- summarize

pub fn cmd_summarize(input: &Path, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let (dataset, digest) = read_input(input)?;
    let stats = summarize(&dataset);
    let ratios = survival_ratios(&dataset);

    let mut csv = String::from("statistic,dosage,total,improved\n");
    let rows: [(&str, fn(&doseresp::data::ColumnSummary) -> f64); 6] = [
        ("min", |c| c.min),
        ("1st_qu", |c| c.q1),
        ("median", |c| c.median),
        ("mean", |c| c.mean),
        ("3rd_qu", |c| c.q3),
        ("max", |c| c.max),
    ];
    for (name, pick) in rows {
        csv.push_str(&format!(
            "{name},{},{},{}\n",
            fmt_f64(pick(&stats.dosage)),
            fmt_f64(pick(&stats.total)),
            fmt_f64(pick(&stats.improved))
        ));
    }

    let plot = Plot {
        title: "Survival ratio vs. dosage".to_string(),
        x_label: "dosage".to_string(),
        y_label: "survival ratio n/N".to_string(),
        series: vec![Series::scatter("experiments", ratios)],
    };

    let mut outputs = Vec::new();
    write_file(out_dir, "summary.csv", &csv, &mut outputs)?;
    write_file(out_dir, "survival_ratios.svg", &plot.render(), &mut outputs)?;
    finish_manifest(
        out_dir,
        "summarize",
        serde_json::json!({"input": input.display().to_string()}),
        Some(digest),
        None,
        outputs,
        started,
    )
}

// ------------------------------------------------------------------- sample

fn summary_csv(summary: &PosteriorSummary) -> String {
    let mut csv = String::from("statistic");
    for p in &summary.parameters {
        csv.push(',');
        csv.push_str(&p.name);
    }
    csv.push('\n');
    let rows: Vec<(&str, Box<dyn Fn(&doseresp::diagnostics::ParameterSummary) -> String>)> = vec![
        ("1st_qu", Box::new(|p| fmt_f64(p.q25))),
        ("mean", Box::new(|p| fmt_f64(p.mean))),
        ("3rd_qu", Box::new(|p| fmt_f64(p.q75))),
        ("sd", Box::new(|p| fmt_f64(p.sd))),
        ("median", Box::new(|p| fmt_f64(p.median))),
        ("split_rhat", Box::new(|p| p.split_rhat.to_string())),
        ("ess", Box::new(|p| p.ess.to_string())),
    ];
    for (name, pick) in rows {
        csv.push_str(name);
        for p in &summary.parameters {
            csv.push(',');
            csv.push_str(&pick(p));
        }
        csv.push('\n');
    }
    csv
}

fn summary_json(summary: &PosteriorSummary, run: &SampleRun) -> String {
    let params: Vec<serde_json::Value> = summary
        .parameters
        .iter()
        .map(|p| {
            serde_json::json!({
                "name": p.name,
                "mean": p.mean,
                "sd": p.sd,
                "q25": p.q25,
                "median": p.median,
                "q75": p.q75,
                "split_rhat": p.split_rhat.value(),
                "ess": p.ess.value(),
                "mcse": p.mcse,
            })
        })
        .collect();
    let body = serde_json::json!({
        "parameters": params,
        "divergence_count": summary.divergence_count,
        "total_draws": summary.total_draws,
        "divergent_fraction": summary.divergent_fraction(),
        "final_step_sizes": run.chains.iter().map(|c| c.final_step_size).collect::<Vec<_>>(),
    });
    format!("{}\n", serde_json::to_string_pretty(&body).expect("summary serializes"))
}

fn draws_csv(run: &SampleRun) -> String {
    let mut csv = String::from("chain,iteration,divergent");
    for name in &run.parameter_names {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for (chain_idx, chain) in run.chains.iter().enumerate() {
        for (iter_idx, row) in chain.draws.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{}",
                chain_idx + 1,
                iter_idx + 1,
                u8::from(chain.divergent[iter_idx])
            ));
            for v in row {
                csv.push(',');
                csv.push_str(&fmt_f64(*v));
            }
            csv.push('\n');
        }
    }
    csv
}

/// Global (population-level) parameters worth plotting.
fn plot_parameters(kind: ModelKind) -> Vec<&'static str> {
    match kind {
        ModelKind::Simple => vec!["alpha", "beta"],
        _ => vec!["mu_alpha", "mu_beta", "sigma_alpha", "sigma_beta"],
    }
}

/// Density series as the plot plus its raw (x, density) CSV.
fn density_outputs(
    name: &str,
    pooled: &[f64],
    bandwidth: Option<f64>,
) -> Option<(Plot, String)> {
    let (points, title) = match density_series(pooled, 400, bandwidth) {
        Ok(DensitySeries::Curve(points)) => (points, format!("Posterior density of {name}")),
        Ok(DensitySeries::Spike { location }) => (
            vec![(location, 1.0)],
            format!("Posterior density of {name} (point mass)"),
        ),
        Err(_) => return None,
    };
    let mut csv = String::from("x,density\n");
    for (x, d) in &points {
        csv.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*d)));
    }
    let plot = Plot {
        title,
        x_label: name.to_string(),
        y_label: "density".to_string(),
        series: vec![Series::line(name, points)],
    };
    Some((plot, csv))
}

fn trace_plot(name: &str, run: &SampleRun, param: usize) -> Plot {
    let series = run
        .per_chain_param(param)
        .into_iter()
        .enumerate()
        .map(|(c, draws)| {
            Series::line(
                &format!("chain {}", c + 1),
                draws.iter().enumerate().map(|(i, v)| ((i + 1) as f64, *v)).collect(),
            )
        })
        .collect();
    Plot {
        title: format!("Trace of {name}"),
        x_label: "iteration".to_string(),
        y_label: name.to_string(),
        series,
    }
}

/// Evaluates the convergence gate; `Ok` means every split-Rhat is at most
/// [`RHAT_GATE`] and the divergent fraction stays within budget.
fn convergence_gate(summary: &PosteriorSummary) -> Result<(), CliError> {
    let mut failing: Vec<String> = summary
        .failing_rhat(RHAT_GATE)
        .iter()
        .map(|p| format!("{} (split_rhat {})", p.name, p.split_rhat))
        .collect();
    let divergent_fraction = summary.divergent_fraction();
    if divergent_fraction > DIVERGENT_FRACTION_GATE {
        failing.push(format!("divergent fraction {divergent_fraction:.4}"));
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Convergence { failing, divergent_fraction })
    }
}

pub struct SampleOutputs {
    pub run: SampleRun,
    pub summary: PosteriorSummary,
}

/// Shared sampling pipeline: run, summarize, write artifacts. The
/// convergence gate is evaluated by the caller so that sweep rows can
/// survive a failing run.
fn sample_pipeline(
    dataset: &Dataset,
    model_config: &ModelConfig,
    settings: &HmcSettings,
    kde_bandwidth: Option<f64>,
    out_dir: &Path,
    outputs: &mut Vec<String>,
) -> Result<SampleOutputs, CliError> {
    let model = model_config.build(dataset)?;
    let run = run_chains(model.as_ref(), &settings.to_config())?;
    let summary = summarize_run(&run)
        .map_err(|e| CliError::Usage(format!("cannot summarize run: {e}")))?;

    write_file(out_dir, "draws.csv", &draws_csv(&run), outputs)?;
    write_file(out_dir, "summary.csv", &summary_csv(&summary), outputs)?;
    write_file(out_dir, "summary.json", &summary_json(&summary, &run), outputs)?;

    for name in plot_parameters(model_config.model) {
        let Some(param) = run.param_index(name) else { continue };
        let pooled = run.pooled_param(param);
        if let Some((plot, csv)) = density_outputs(name, &pooled, kde_bandwidth) {
            write_file(out_dir, &format!("density_{name}.svg"), &plot.render(), outputs)?;
            write_file(out_dir, &format!("density_{name}.csv"), &csv, outputs)?;
        }
        let trace = trace_plot(name, &run, param);
        write_file(out_dir, &format!("trace_{name}.svg"), &trace.render(), outputs)?;
    }
    Ok(SampleOutputs { run, summary })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sample(
    input: &Path,
    model_config: &ModelConfig,
    settings: &HmcSettings,
    kde_bandwidth: Option<f64>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let (dataset, digest) = read_input(input)?;
    let mut outputs = Vec::new();
    let result = sample_pipeline(&dataset, model_config, settings, kde_bandwidth, out_dir, &mut outputs)?;
    finish_manifest(
        out_dir,
        "sample",
        serde_json::json!({
            "input": input.display().to_string(),
            "model": model_config,
            "hmc": result.run.config,
        }),
        Some(digest),
        Some(settings.seed),
        outputs,
        started,
    )?;
    convergence_gate(&result.summary)
}

// ------------------------------------------------------------- priors-sweep

/// One prior family per line, `#` comments and blank lines ignored. Each
/// prior applies to both coefficients.
pub fn parse_sweep_file(text: &str) -> Result<Vec<PriorSpec>, CliError> {
    let mut priors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let prior: PriorSpec = line.parse().map_err(|e: PriorError| {
            CliError::Usage(format!("sweep line {}: {e}", idx + 1))
        })?;
        priors.push(prior);
    }
    if priors.len() < 2 {
        return Err(CliError::Usage(format!(
            "sweep config needs at least 2 prior rows, found {}",
            priors.len()
        )));
    }
    Ok(priors)
}

pub fn cmd_priors_sweep(
    input: &Path,
    priors_file: &Path,
    settings: &HmcSettings,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let sweep_text = std::fs::read_to_string(priors_file)
        .map_err(|e| io_usage(&format!("cannot read sweep file `{}`", priors_file.display()), e))?;
    let priors = parse_sweep_file(&sweep_text)?;
    let (dataset, digest) = read_input(input)?;

    let mut csv = String::from("prior,iterations,wall_time_seconds,alpha_mean,beta_mean,status\n");
    for prior in &priors {
        let config = ModelConfig::simple(&prior.to_string(), &prior.to_string());
        let model = config.build(&dataset)?;
        let row_started = Instant::now();
        match run_chains(model.as_ref(), &settings.to_config()) {
            Ok(run) => {
                let wall = row_started.elapsed().as_secs_f64();
                let summary = summarize_run(&run)
                    .map_err(|e| CliError::Usage(format!("cannot summarize run: {e}")))?;
                let alpha = summary.parameter("alpha").map(|p| p.mean).unwrap_or(f64::NAN);
                let beta = summary.parameter("beta").map(|p| p.mean).unwrap_or(f64::NAN);
                let status = if convergence_gate(&summary).is_ok() { "ok" } else { "not_converged" };
                // the prior name contains commas, so the field is quoted
                csv.push_str(&format!(
                    "\"{}\",{},{:.3},{},{},{status}\n",
                    prior,
                    settings.iters,
                    wall,
                    fmt_f64(alpha),
                    fmt_f64(beta)
                ));
            }
            Err(SamplerError::InitializationFailed { .. }) => {
                let wall = row_started.elapsed().as_secs_f64();
                csv.push_str(&format!(
                    "\"{}\",{},{:.3},,,init_failed\n",
                    prior, settings.iters, wall
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut outputs = Vec::new();
    write_file(out_dir, "sweep.csv", &csv, &mut outputs)?;
    finish_manifest(
        out_dir,
        "priors-sweep",
        serde_json::json!({
            "input": input.display().to_string(),
            "priors": priors.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "hmc": settings.to_config(),
        }),
        Some(digest),
        Some(settings.seed),
        outputs,
        started,
    )
}

// ------------------------------------------------------------------ compare

pub fn cmd_compare(
    input: &Path,
    prior_alpha: &str,
    prior_beta: &str,
    settings: &HmcSettings,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let (dataset, digest) = read_input(input)?;

    let config = ModelConfig::simple(prior_alpha, prior_beta);
    let model = config.build(&dataset)?;
    let run = run_chains(model.as_ref(), &settings.to_config())?;
    let summary = summarize_run(&run)
        .map_err(|e| CliError::Usage(format!("cannot summarize run: {e}")))?;
    let alpha = summary.parameter("alpha").expect("simple model has alpha").mean;
    let beta = summary.parameter("beta").expect("simple model has beta").mean;

    let hill = fit_hill(&dataset)?;
    let ratios = survival_ratios(&dataset);
    let (min_dose, max_dose) = (ratios[0].0, ratios[ratios.len() - 1].0);
    let hill_curve = fitted_curve(&hill, min_dose, max_dose, 200);
    let bayes_curve: Vec<(f64, f64)> = hill_curve
        .iter()
        .map(|&(d, _)| (d, inverse_logit(alpha + beta * d)))
        .collect();

    let hill_residual =
        weighted_residual(&dataset, true, |d| hill_response(d, &hill).expect("positive dose"));
    let bayes_residual = weighted_residual(&dataset, true, |d| inverse_logit(alpha + beta * d));

    let mut residuals = String::from("model,weighted_residual\n");
    residuals.push_str(&format!("hill,{}\n", fmt_f64(hill_residual)));
    residuals.push_str(&format!("bayes_posterior_mean,{}\n", fmt_f64(bayes_residual)));

    let mut hill_csv = String::from("dosage,response\n");
    for (d, e) in &hill_curve {
        hill_csv.push_str(&format!("{},{}\n", fmt_f64(*d), fmt_f64(*e)));
    }

    let plot = Plot {
        title: "Hill fit vs. Bayesian posterior-mean curve".to_string(),
        x_label: "dosage".to_string(),
        y_label: "response".to_string(),
        series: vec![
            Series::scatter("survival ratios", ratios),
            Series::line("hill fit", hill_curve),
            Series::line("bayes posterior mean", bayes_curve),
        ],
    };

    let mut outputs = Vec::new();
    write_file(out_dir, "residuals.csv", &residuals, &mut outputs)?;
    write_file(out_dir, "hill_curve.csv", &hill_csv, &mut outputs)?;
    write_file(out_dir, "compare.svg", &plot.render(), &mut outputs)?;
    finish_manifest(
        out_dir,
        "compare",
        serde_json::json!({
            "input": input.display().to_string(),
            "prior_alpha": prior_alpha,
            "prior_beta": prior_beta,
            "hmc": settings.to_config(),
        }),
        Some(digest),
        Some(settings.seed),
        outputs,
        started,
    )
}

// ------------------------------------------------------------------- oracle

pub struct OracleFlags {
    pub grid_resolution: usize,
    pub grid_refinements: usize,
    pub bounds: GridBounds,
    pub conjugate_record: Option<usize>,
}

fn grid_csv(grid: &GridPosterior) -> String {
    let mut csv = String::from("alpha_lo,alpha_hi,beta_lo,beta_hi,mass\n");
    for c in &grid.cells {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(c.alpha_lo),
            fmt_f64(c.alpha_hi),
            fmt_f64(c.beta_lo),
            fmt_f64(c.beta_hi),
            fmt_f64(c.mass)
        ));
    }
    csv
}

pub fn cmd_oracle(
    input: &Path,
    model_config: &ModelConfig,
    settings: &HmcSettings,
    flags: &OracleFlags,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    if model_config.model != ModelKind::Simple {
        return Err(CliError::Usage(format!(
            "model `{}` is not supported by the oracle: the grid evaluates the 2-parameter \
             pooled model only (the hierarchical posterior has dimension 2E+4, beyond grid \
             quadrature); hierarchical runs are validated through the conjugate and \
             parameterization cross-checks instead",
            model_config.model
        )));
    }
    let (dataset, digest) = read_input(input)?;
    let prior_alpha: PriorSpec = model_config.prior_alpha.parse()?;
    let prior_beta: PriorSpec = model_config.prior_beta.parse()?;
    let model = doseresp::model::SimpleLrModel::new(&dataset, prior_alpha, prior_beta)?;

    let grid = grid_posterior(&model, flags.bounds, flags.grid_resolution, flags.grid_refinements)?;
    let (alpha_m, beta_m) = grid_moments(&grid);

    let run = run_chains(&model, &settings.to_config())?;
    let summary = summarize_run(&run)
        .map_err(|e| CliError::Usage(format!("cannot summarize run: {e}")))?;

    let agreement = |name: &str, grid_mean: f64| -> serde_json::Value {
        let p = summary.parameter(name).expect("simple model parameter");
        let ratio = p.mcse.map(|m| (p.mean - grid_mean).abs() / m);
        serde_json::json!({
            "hmc_mean": p.mean,
            "grid_mean": grid_mean,
            "mcse": p.mcse,
            "abs_diff_over_mcse": ratio,
        })
    };

    let conjugate_check = match flags.conjugate_record {
        None => serde_json::Value::Null,
        Some(idx) => {
            let record = dataset.records().get(idx).ok_or_else(|| {
                CliError::Usage(format!(
                    "--conjugate-record {idx} out of range (dataset has {} records)",
                    dataset.len()
                ))
            })?;
            let posterior = doseresp::conjugate::beta_binomial_posterior(
                doseresp::conjugate::BetaParams::new(1.0, 1.0).expect("valid"),
                record.improved(),
                record.total(),
            )
            .expect("record counts validated");
            let (exact_mean, exact_sd) = doseresp::conjugate::beta_moments(posterior);
            let (a, b) = (posterior.a(), posterior.b());
            let log_pdf = move |x: f64| {
                let t1 = if a == 1.0 { 0.0 } else { (a - 1.0) * x.ln() };
                let t2 = if b == 1.0 { 0.0 } else { (b - 1.0) * (1.0 - x).ln() };
                t1 + t2 - ln_beta(a, b)
            };
            let quad = quadrature_1d(log_pdf, 0.0, 1.0, 4097)?;
            serde_json::json!({
                "record": idx,
                "improved": record.improved(),
                "total": record.total(),
                "posterior": {"a": a, "b": b},
                "closed_form": {"mean": exact_mean, "sd": exact_sd},
                "quadrature": {"mean": quad.mean, "sd": quad.sd},
                "mean_abs_diff": (quad.mean - exact_mean).abs(),
            })
        }
    };

    let axis_json = |m: &doseresp::oracle::AxisMoments| {
        serde_json::json!({
            "mean": m.mean, "sd": m.sd, "q25": m.q25, "median": m.median, "q75": m.q75,
        })
    };
    let report = serde_json::json!({
        "grid": {
            "alpha": axis_json(&alpha_m),
            "beta": axis_json(&beta_m),
            "cells": grid.cells.len(),
            "refinements": grid.refinements,
            "total_mass": grid.total_mass(),
        },
        "agreement": {
            "alpha": agreement("alpha", alpha_m.mean),
            "beta": agreement("beta", beta_m.mean),
        },
        "conjugate_check": conjugate_check,
    });

    let mut outputs = Vec::new();
    write_file(out_dir, "grid.csv", &grid_csv(&grid), &mut outputs)?;
    write_file(
        out_dir,
        "oracle_summary.json",
        &format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")),
        &mut outputs,
    )?;
    finish_manifest(
        out_dir,
        "oracle",
        serde_json::json!({
            "input": input.display().to_string(),
            "model": model_config,
            "grid_resolution": flags.grid_resolution,
            "grid_refinements": flags.grid_refinements,
            "alpha_range": [flags.bounds.alpha_lo, flags.bounds.alpha_hi],
            "beta_range": [flags.bounds.beta_lo, flags.bounds.beta_hi],
            "hmc": settings.to_config(),
        }),
        Some(digest),
        Some(settings.seed),
        outputs,
        started,
    )
}

// -------------------------------------------------------------------- synth

pub fn cmd_synth(
    records: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    if records < 1 {
        return Err(CliError::Usage("--records must be at least 1".to_string()));
    }
    let dataset = doseresp::data::synthesize(records, alpha, beta, seed);
    atomic_write(out, &serialize_trials(&dataset))
        .map_err(|e| io_usage(&format!("cannot write `{}`", out.display()), e))?;
    Ok(())
}
