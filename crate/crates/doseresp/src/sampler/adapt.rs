//! Warmup adaptation machinery: Nesterov dual averaging of the step size
//! toward a target acceptance rate, and windowed diagonal mass estimation
//! from warmup draw variances.

/// Dual-averaging step-size controller with the usual shrinkage anchor at
/// `log(10 ε₀)`; parameters γ = 0.05, t₀ = 10, κ = 0.75.
#[derive(Debug, Clone)]
pub struct DualAverage {
    target: f64,
    gamma: f64,
    t0: f64,
    kappa: f64,
    mu: f64,
    log_step: f64,
    log_step_avg: f64,
    h_bar: f64,
    count: u64,
}

impl DualAverage {
    pub fn new(target: f64, initial_step: f64) -> Self {
        DualAverage {
            target,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
            mu: (10.0 * initial_step).ln(),
            log_step: initial_step.ln(),
            log_step_avg: initial_step.ln(),
            h_bar: 0.0,
            count: 1,
        }
    }

    /// One update from an observed acceptance probability.
    pub fn advance(&mut self, accept_prob: f64) {
        debug_assert!((0.0..=1.0).contains(&accept_prob));
        let n = self.count as f64;
        let w = 1.0 / (n + self.t0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept_prob);
        self.log_step = self.mu - self.h_bar * n.sqrt() / self.gamma;
        let eta = n.powf(-self.kappa);
        self.log_step_avg = eta * self.log_step + (1.0 - eta) * self.log_step_avg;
        self.count += 1;
    }

    /// Step size used while still adapting.
    pub fn current(&self) -> f64 {
        self.log_step.exp()
    }

    /// Averaged iterate, frozen in after warmup.
    pub fn averaged(&self) -> f64 {
        self.log_step_avg.exp()
    }

    /// Re-anchors the controller at a fresh step size (used when the mass
    /// matrix changes under it).
    pub fn restart(&mut self, step: f64) {
        *self = DualAverage::new(self.target, step);
    }
}

/// Welford accumulator for per-coordinate draw variances.
#[derive(Debug, Clone)]
pub struct RunningVariance {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        RunningVariance { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn add(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for (i, &value) in x.iter().enumerate() {
            let delta = value - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (value - self.mean[i]);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Regularized variance estimate (shrunk slightly toward a small
    /// constant, keeping it strictly positive even for stuck coordinates).
    pub fn regularized_variance(&self) -> Vec<f64> {
        let n = self.count as f64;
        let shrink = n / (n + 5.0);
        self.m2
            .iter()
            .map(|m2| {
                let var = if self.count > 1 { m2 / (n - 1.0) } else { 0.0 };
                shrink * var + (1.0 - shrink) * 1e-3
            })
            .collect()
    }

    pub fn reset(&mut self) {
        self.count = 0;
        self.mean.fill(0.0);
        self.m2.fill(0.0);
    }
}

/// Warmup phase boundaries: an initial step-size-only buffer, a sequence of
/// doubling mass-estimation windows, and a terminal step-size buffer.
#[derive(Debug, Clone)]
pub struct WarmupSchedule {
    /// iterations `0..init_end`: step-size adaptation only
    pub init_end: usize,
    /// iteration indices (exclusive) at which a mass window closes
    pub window_ends: Vec<usize>,
    /// iterations `term_start..warmup`: final step-size adaptation
    pub term_start: usize,
    pub warmup: usize,
}

impl WarmupSchedule {
    /// 15% step-size buffer, 75% windowed mass adaptation with doubling
    /// windows (first window 25 iterations), 10% terminal buffer.
    pub fn new(warmup: usize) -> Self {
        let init_end = ((warmup as f64) * 0.15).round() as usize;
        let term_start = warmup - ((warmup as f64) * 0.10).round() as usize;
        let mut window_ends = Vec::new();
        if term_start > init_end {
            let mut start = init_end;
            let mut size = 25usize.min(term_start - init_end);
            loop {
                let mut end = start + size;
                // absorb a remainder too small to double into this window
                if end >= term_start || term_start - end < 2 * size {
                    end = term_start;
                }
                window_ends.push(end);
                if end == term_start {
                    break;
                }
                start = end;
                size *= 2;
            }
        }
        WarmupSchedule { init_end, window_ends, term_start, warmup }
    }
}
