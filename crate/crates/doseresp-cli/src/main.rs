//! `doseresp`: fit dose-response models by gradient-based MCMC, check the
//! results against closed-form and quadrature references, and emit
//! CSV/JSON/SVG artifacts.
//!
//! Exit codes: 0 success, 1 usage, 2 data validation, 3 convergence
//! failure, 4 sampler initialization failure.

mod commands;
mod output;
mod svg;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use commands::{CliError, HmcSettings, OracleFlags};
use doseresp::model::{ModelConfig, ModelKind};
use doseresp::oracle::GridBounds;
use std::path::PathBuf;
use std::process::ExitCode;

const SEED_ENV: &str = "DOSERESP_SEED";

#[derive(Parser)]
#[command(
    name = "doseresp",
    version,
    about = "Bayesian dose-response inference with built-in cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct HmcArgs {
    /// Number of chains
    #[arg(long, default_value_t = 4)]
    chains: usize,
    /// Total iterations per chain (warmup included)
    #[arg(long, default_value_t = 4000)]
    iters: usize,
    /// Fraction of iterations spent on warmup
    #[arg(long = "warmup-frac", default_value_t = 0.5)]
    warmup_frac: f64,
    /// Target Metropolis acceptance rate
    #[arg(long = "target-accept", default_value_t = 0.8)]
    target_accept: f64,
    /// RNG seed (falls back to $DOSERESP_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
}

impl HmcArgs {
    fn settings(&self) -> Result<HmcSettings, CliError> {
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(text) => text.parse().map_err(|_| {
                    CliError::Usage(format!("{SEED_ENV}=`{text}` is not a valid seed"))
                })?,
                Err(_) => 0,
            },
        };
        Ok(HmcSettings {
            chains: self.chains,
            iters: self.iters,
            warmup_frac: self.warmup_frac,
            target_accept: self.target_accept,
            seed,
        })
    }
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model kind: simple | hier_centered | hier_ncp
    #[arg(long)]
    model: Option<ModelKind>,
    /// Prior for alpha, e.g. "normal(0,20)", "logistic(0,10)",
    /// "uniform(-100,100)", "flat"
    #[arg(long = "prior-alpha")]
    prior_alpha: Option<String>,
    /// Prior for beta (same syntax)
    #[arg(long = "prior-beta")]
    prior_beta: Option<String>,
    /// JSON model configuration file; command-line flags override it
    #[arg(long = "model-config")]
    model_config: Option<PathBuf>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelConfig, CliError> {
        let mut config = match &self.model_config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read model config `{}`: {e}", path.display()))
                })?;
                ModelConfig::from_json(&text).map_err(|e| {
                    CliError::Usage(format!("invalid model config `{}`: {e}", path.display()))
                })?
            }
            None => ModelConfig::simple("normal(0,20)", "normal(0,20)"),
        };
        if let Some(kind) = self.model {
            config.model = kind;
        }
        if let Some(prior) = &self.prior_alpha {
            config.prior_alpha = prior.clone();
        }
        if let Some(prior) = &self.prior_beta {
            config.prior_beta = prior.clone();
        }
        // surface prior syntax errors before any sampling happens
        let _: doseresp::prior::PriorSpec = config.prior_alpha.parse()?;
        let _: doseresp::prior::PriorSpec = config.prior_beta.parse()?;
        Ok(config)
    }
}

fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("`{text}` is not of the form lo,hi"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not a number"))?;
    if lo >= hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics and the survival-ratio scatter plot
    Summarize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Sample a posterior and write draws, summaries and plots
    Sample {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        hmc: HmcArgs,
        /// Kernel density bandwidth override for the density plots
        #[arg(long = "kde-bandwidth")]
        kde_bandwidth: Option<f64>,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Fit the pooled model once per prior in a sweep file
    PriorsSweep {
        #[arg(long)]
        input: PathBuf,
        /// Text file with one prior per line (# comments allowed)
        #[arg(long = "priors-file")]
        priors_file: PathBuf,
        #[command(flatten)]
        hmc: HmcArgs,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Overlay the Hill fit and the Bayesian posterior-mean curve
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "prior-alpha", default_value = "normal(0,20)")]
        prior_alpha: String,
        #[arg(long = "prior-beta", default_value = "normal(0,20)")]
        prior_beta: String,
        #[command(flatten)]
        hmc: HmcArgs,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Grid-quadrature posterior for the pooled model plus the
    /// sampler-agreement report
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        hmc: HmcArgs,
        /// Initial grid resolution per axis
        #[arg(long = "grid-resolution", default_value_t = 384)]
        grid_resolution: usize,
        /// Number of refinement generations
        #[arg(long = "grid-refinements", default_value_t = 10)]
        grid_refinements: usize,
        /// Alpha integration range as lo,hi
        #[arg(long = "alpha-range", value_parser = parse_range, default_value = "-40,10", allow_hyphen_values = true)]
        alpha_range: (f64, f64),
        /// Beta integration range as lo,hi
        #[arg(long = "beta-range", value_parser = parse_range, default_value = "-5,30", allow_hyphen_values = true)]
        beta_range: (f64, f64),
        /// Also check the Beta(1,1) conjugate closed form against 1-D
        /// quadrature on this record index
        #[arg(long = "conjugate-record")]
        conjugate_record: Option<usize>,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Generate a synthetic trial CSV from the pooled logistic model
    Synth {
        #[arg(long, default_value_t = 71)]
        records: usize,
        #[arg(long, default_value_t = -14.03, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 9.39, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Summarize { input, out_dir } => commands::cmd_summarize(&input, &out_dir),
        Command::Sample { input, model, hmc, kde_bandwidth, out_dir } => {
            let config = model.resolve()?;
            let settings = hmc.settings()?;
            commands::cmd_sample(&input, &config, &settings, kde_bandwidth, &out_dir)
        }
        Command::PriorsSweep { input, priors_file, hmc, out_dir } => {
            let settings = hmc.settings()?;
            commands::cmd_priors_sweep(&input, &priors_file, &settings, &out_dir)
        }
        Command::Compare { input, prior_alpha, prior_beta, hmc, out_dir } => {
            let settings = hmc.settings()?;
            commands::cmd_compare(&input, &prior_alpha, &prior_beta, &settings, &out_dir)
        }
        Command::Oracle {
            input,
            model,
            hmc,
            grid_resolution,
            grid_refinements,
            alpha_range,
            beta_range,
            conjugate_record,
            out_dir,
        } => {
            let config = model.resolve()?;
            let settings = hmc.settings()?;
            let flags = OracleFlags {
                grid_resolution,
                grid_refinements,
                bounds: GridBounds {
                    alpha_lo: alpha_range.0,
                    alpha_hi: alpha_range.1,
                    beta_lo: beta_range.0,
                    beta_hi: beta_range.1,
                },
                conjugate_record,
            };
            commands::cmd_oracle(&input, &config, &settings, &flags, &out_dir)
        }
        Command::Synth { records, alpha, beta, seed, out } => {
            commands::cmd_synth(records, alpha, beta, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
