//! Hamiltonian Monte-Carlo engine: leapfrog proposals with Metropolis
//! correction, jittered trajectory lengths, dual-averaging step-size
//! adaptation, windowed diagonal mass estimation, and deterministic
//! multi-chain orchestration (chain `c` runs on stream `seed + c`).

mod adapt;
mod leapfrog;

pub use adapt::{DualAverage, RunningVariance, WarmupSchedule};
pub use leapfrog::{kinetic_energy, leapfrog};

use crate::model::ModelDensity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Hard cap on leapfrog steps per transition, so a collapsing step size
/// (funnel geometry) cannot stall a run.
pub const MAX_LEAPFROG_STEPS: usize = 1024;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("chain {chain}: no finite log-density found in 100 random starts in [-2,2]^dim")]
    InitializationFailed { chain: usize },
}

/// Sampler configuration. Defaults: 4 chains of 4000 iterations, half
/// spent on warmup, 0.8 target acceptance, divergence at 1000 energy units.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HmcConfig {
    pub chains: usize,
    pub total_iterations: usize,
    pub warmup_fraction: f64,
    pub target_accept: f64,
    pub base_trajectory_length: f64,
    pub divergence_threshold: f64,
    pub seed: u64,
}

impl Default for HmcConfig {
    fn default() -> Self {
        HmcConfig {
            chains: 4,
            total_iterations: 4000,
            warmup_fraction: 0.5,
            target_accept: 0.8,
            base_trajectory_length: 1.5,
            divergence_threshold: 1000.0,
            seed: 0,
        }
    }
}

impl HmcConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let fail = |msg: &str| Err(SamplerError::InvalidConfig(msg.to_string()));
        if self.chains < 1 {
            return fail("chains must be >= 1");
        }
        if self.total_iterations < 20 {
            return fail("total_iterations must be >= 20");
        }
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction < 1.0) {
            return fail("warmup_fraction must lie in (0,1)");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return fail("target_accept must lie in (0,1)");
        }
        if !(self.base_trajectory_length > 0.0) {
            return fail("base_trajectory_length must be positive");
        }
        if !(self.divergence_threshold > 0.0) {
            return fail("divergence_threshold must be positive");
        }
        Ok(())
    }

    pub fn warmup_iterations(&self) -> usize {
        ((self.total_iterations as f64) * self.warmup_fraction).round() as usize
    }

    pub fn sampling_iterations(&self) -> usize {
        self.total_iterations - self.warmup_iterations()
    }
}

/// Current point of one chain with its cached density and gradient.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub log_density: f64,
    pub gradient: Vec<f64>,
}

impl ChainState {
    pub fn at<M: ModelDensity + ?Sized>(model: &M, position: Vec<f64>) -> Self {
        let mut gradient = vec![0.0; position.len()];
        let log_density = model.log_density_gradient(&position, &mut gradient);
        ChainState { position, log_density, gradient }
    }
}

/// Outcome of one HMC transition.
#[derive(Debug, Clone, Copy)]
pub struct TransitionInfo {
    pub accept_prob: f64,
    pub divergent: bool,
}

/// One HMC transition: resample momentum from N(0, M), integrate a
/// jittered trajectory (uniform in [0.8, 1.2]× the base length, at least
/// one step, capped at [`MAX_LEAPFROG_STEPS`]), then Metropolis-correct.
///
/// A transition whose energy error exceeds `divergence_threshold` (or is
/// non-finite) is divergent: the proposal is rejected and flagged, which is
/// data rather than an error.
pub fn hmc_transition<M: ModelDensity + ?Sized, R: Rng>(
    state: &mut ChainState,
    model: &M,
    step_size: f64,
    base_trajectory_length: f64,
    divergence_threshold: f64,
    mass_diag: &[f64],
    rng: &mut R,
) -> TransitionInfo {
    let dim = state.position.len();
    let trajectory = base_trajectory_length * rng.random_range(0.8..1.2);
    let steps = ((trajectory / step_size).round() as usize).clamp(1, MAX_LEAPFROG_STEPS);

    let mut momentum: Vec<f64> = (0..dim)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            z * mass_diag[i].sqrt()
        })
        .collect();
    let h0 = -state.log_density + kinetic_energy(&momentum, mass_diag);

    let mut position = state.position.clone();
    let mut gradient = state.gradient.clone();
    let log_density = leapfrog(
        model,
        &mut position,
        &mut momentum,
        &mut gradient,
        step_size,
        steps,
        mass_diag,
    );
    let h1 = -log_density + kinetic_energy(&momentum, mass_diag);
    let delta_h = h1 - h0;

    // metropolis uniform is drawn unconditionally to keep the RNG stream
    // identical whether or not the proposal diverges
    let u: f64 = rng.random();

    if !delta_h.is_finite() || delta_h > divergence_threshold {
        return TransitionInfo { accept_prob: 0.0, divergent: true };
    }
    let accept_prob = (-delta_h).exp().min(1.0);
    if u < accept_prob {
        state.position = position;
        state.gradient = gradient;
        state.log_density = log_density;
    }
    TransitionInfo { accept_prob, divergent: false }
}

/// Step-size search: doubles/halves one-step trial proposals until the
/// acceptance ratio crosses 1/2.
fn find_initial_step<M: ModelDensity + ?Sized, R: Rng>(
    model: &M,
    state: &ChainState,
    mass_diag: &[f64],
    rng: &mut R,
) -> f64 {
    let dim = state.position.len();
    let momentum0: Vec<f64> = (0..dim)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            z * mass_diag[i].sqrt()
        })
        .collect();
    let h0 = -state.log_density + kinetic_energy(&momentum0, mass_diag);
    let mut step = 0.1;

    let ratio_at = |eps: f64| -> f64 {
        let mut q = state.position.clone();
        let mut p = momentum0.clone();
        let mut g = state.gradient.clone();
        let lp = leapfrog(model, &mut q, &mut p, &mut g, eps, 1, mass_diag);
        let h1 = -lp + kinetic_energy(&p, mass_diag);
        (h0 - h1).exp()
    };

    let mut r = ratio_at(step);
    // shrink first if the very first trial explodes
    let mut guard = 0;
    while !r.is_finite() || r == 0.0 {
        step *= 0.5;
        r = ratio_at(step);
        guard += 1;
        if guard > 60 || step < 1e-10 {
            return step.max(1e-10);
        }
    }
    let direction: f64 = if r > 0.5 { 1.0 } else { -1.0 };
    for _ in 0..60 {
        if !(r.powf(direction) > 2f64.powf(-direction)) {
            break;
        }
        step *= 2f64.powf(direction);
        if !(1e-10..=1e2).contains(&step) {
            break;
        }
        r = ratio_at(step);
        if !r.is_finite() {
            step *= 0.5;
            break;
        }
    }
    step.clamp(1e-10, 1e2)
}

/// Draws and per-iteration statistics of one chain, post-warmup, on the
/// constrained scale.
#[derive(Debug, Clone)]
pub struct ChainDraws {
    pub draws: Vec<Vec<f64>>,
    pub divergent: Vec<bool>,
    pub accept_prob: Vec<f64>,
    pub final_step_size: f64,
    pub mass_diagonal: Vec<f64>,
}

impl ChainDraws {
    pub fn divergence_count(&self) -> usize {
        self.divergent.iter().filter(|&&d| d).count()
    }
}

/// A complete multi-chain run.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub chains: Vec<ChainDraws>,
    pub parameter_names: Vec<String>,
    pub config: HmcConfig,
    pub duration: Duration,
}

impl SampleRun {
    pub fn dim(&self) -> usize {
        self.parameter_names.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.parameter_names.iter().position(|n| n == name)
    }

    /// Per-chain draw vectors for one parameter.
    pub fn per_chain_param(&self, param: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.draws.iter().map(|row| row[param]).collect())
            .collect()
    }

    /// All chains pooled, chain order then iteration order.
    pub fn pooled_param(&self, param: usize) -> Vec<f64> {
        self.chains
            .iter()
            .flat_map(|c| c.draws.iter().map(move |row| row[param]))
            .collect()
    }

    pub fn total_divergences(&self) -> usize {
        self.chains.iter().map(|c| c.divergence_count()).sum()
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(|c| c.draws.len()).sum()
    }

    pub fn divergent_fraction(&self) -> f64 {
        self.total_divergences() as f64 / self.total_draws() as f64
    }
}

/// Runs the configured number of chains. Chain `c` is seeded with
/// `config.seed + c` and chains may execute in parallel; results are always
/// assembled in chain order, so a run is reproducible bit-for-bit given
/// `(model, data, config)`.
pub fn run_chains<M: ModelDensity + Sync + ?Sized>(
    model: &M,
    config: &HmcConfig,
) -> Result<SampleRun, SamplerError> {
    config.validate()?;
    let started = Instant::now();
    let chains: Vec<ChainDraws> = (0..config.chains)
        .into_par_iter()
        .map(|c| run_single_chain(model, config, c))
        .collect::<Result<_, _>>()?;
    Ok(SampleRun {
        chains,
        parameter_names: model.parameter_names(),
        config: config.clone(),
        duration: started.elapsed(),
    })
}

fn run_single_chain<M: ModelDensity + Sync + ?Sized>(
    model: &M,
    config: &HmcConfig,
    chain_index: usize,
) -> Result<ChainDraws, SamplerError> {
    let dim = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(chain_index as u64));

    // initialize uniformly in [-2,2]^dim, retrying until the density and
    // gradient are finite
    let mut state = None;
    for _ in 0..100 {
        let position: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let candidate = ChainState::at(model, position);
        if candidate.log_density.is_finite()
            && candidate.gradient.iter().all(|g| g.is_finite())
        {
            state = Some(candidate);
            break;
        }
    }
    let mut state = state.ok_or(SamplerError::InitializationFailed { chain: chain_index })?;

    let warmup = config.warmup_iterations();
    let schedule = WarmupSchedule::new(warmup);
    let mut mass_diag = vec![1.0; dim];
    let mut da =
        DualAverage::new(config.target_accept, find_initial_step(model, &state, &mass_diag, &mut rng));
    let mut var_acc = RunningVariance::new(dim);
    let mut next_window = 0usize;

    for it in 0..warmup {
        let info = hmc_transition(
            &mut state,
            model,
            da.current(),
            config.base_trajectory_length,
            config.divergence_threshold,
            &mass_diag,
            &mut rng,
        );
        da.advance(info.accept_prob);

        if it >= schedule.init_end && it < schedule.term_start {
            var_acc.add(&state.position);
            if next_window < schedule.window_ends.len()
                && it + 1 == schedule.window_ends[next_window]
            {
                if var_acc.count() >= 10 {
                    mass_diag =
                        var_acc.regularized_variance().iter().map(|v| 1.0 / v).collect();
                    let fresh = find_initial_step(model, &state, &mass_diag, &mut rng);
                    da.restart(fresh);
                }
                var_acc.reset();
                next_window += 1;
            }
        }
    }

    let step_size = da.averaged();
    let keep = config.sampling_iterations();
    let mut draws = Vec::with_capacity(keep);
    let mut divergent = Vec::with_capacity(keep);
    let mut accept_prob = Vec::with_capacity(keep);
    for _ in 0..keep {
        let info = hmc_transition(
            &mut state,
            model,
            step_size,
            config.base_trajectory_length,
            config.divergence_threshold,
            &mass_diag,
            &mut rng,
        );
        draws.push(model.constrain(&state.position));
        divergent.push(info.divergent);
        accept_prob.push(info.accept_prob);
    }

    Ok(ChainDraws { draws, divergent, accept_prob, final_step_size: step_size, mass_diagonal: mass_diag })
}
