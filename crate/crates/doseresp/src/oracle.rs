//! Sampler-independent posterior evaluation for the two-parameter model:
//! an adaptive grid over (α, β) that repeatedly refines the cells carrying
//! the bulk of the probability mass, plus a composite-Simpson 1-D
//! quadrature used to validate closed forms.

use crate::math::compensated_sum;
use crate::model::SimpleLrModel;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("posterior mass underflows everywhere inside the bounds; widen the alpha/beta ranges")]
    BoundsMissPosterior,
    #[error("density is not finite at node x = {x}")]
    NonFiniteDensity { x: f64 },
    #[error("invalid quadrature arguments: {0}")]
    InvalidArgs(String),
}

/// Rectangular integration domain for the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl GridBounds {
    /// Default box for the pooled dose-response posterior; wide enough to
    /// bracket any plausible fit by many standard deviations.
    pub fn default_pig_bounds() -> Self {
        GridBounds { alpha_lo: -40.0, alpha_hi: 10.0, beta_lo: -5.0, beta_hi: 30.0 }
    }
}

/// One grid cell with its normalized posterior mass.
#[derive(Debug, Clone, Copy)]
pub struct GridCell {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub mass: f64,
    log_unnorm: f64,
}

impl GridCell {
    pub fn midpoint(&self) -> (f64, f64) {
        (0.5 * (self.alpha_lo + self.alpha_hi), 0.5 * (self.beta_lo + self.beta_hi))
    }

    pub fn area(&self) -> f64 {
        (self.alpha_hi - self.alpha_lo) * (self.beta_hi - self.beta_lo)
    }
}

/// A discretized posterior: cells tile the bounding box without overlap and
/// their masses sum to one.
#[derive(Debug, Clone)]
pub struct GridPosterior {
    pub cells: Vec<GridCell>,
    pub refinements: usize,
    pub bounds: GridBounds,
}

impl GridPosterior {
    /// Compensated sum of cell masses (order-independent to machine
    /// precision).
    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.cells.iter().map(|c| c.mass))
    }

    pub fn max_cell_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).fold(0.0, f64::max)
    }
}

fn cell_log_unnorm(log_density: &(impl Fn(f64, f64) -> f64 + Sync), cell: &mut GridCell) {
    let (a, b) = cell.midpoint();
    // midpoint rule: mass ~ density(midpoint) * area
    cell.log_unnorm = log_density(a, b) + cell.area().ln();
}

fn normalize(cells: &mut [GridCell]) -> Result<(), OracleError> {
    let max_log =
        cells.iter().map(|c| c.log_unnorm).fold(f64::NEG_INFINITY, f64::max);
    // every cell underflows exp() on its own: the box missed the posterior
    if !max_log.is_finite() || max_log < -700.0 {
        return Err(OracleError::BoundsMissPosterior);
    }
    let log_total =
        max_log + compensated_sum(cells.iter().map(|c| (c.log_unnorm - max_log).exp())).ln();
    for c in cells.iter_mut() {
        c.mass = (c.log_unnorm - log_total).exp();
    }
    Ok(())
}

/// Builds a discretized posterior for an arbitrary 2-D log-density.
///
/// Starts from a uniform `initial_resolution²` grid with midpoint-rule cell
/// masses; each refinement generation splits the heaviest cells that
/// together hold half the mass into four children and renormalizes, so
/// resolution concentrates in the high-density region.
pub fn grid_posterior_fn(
    log_density: impl Fn(f64, f64) -> f64 + Sync,
    bounds: GridBounds,
    initial_resolution: usize,
    refinements: usize,
) -> Result<GridPosterior, OracleError> {
    if initial_resolution < 8 {
        return Err(OracleError::InvalidArgs(format!(
            "initial_resolution must be at least 8, got {initial_resolution}"
        )));
    }
    if !(bounds.alpha_lo < bounds.alpha_hi) || !(bounds.beta_lo < bounds.beta_hi) {
        return Err(OracleError::InvalidArgs("bounds must be a non-empty box".to_string()));
    }
    let n = initial_resolution;
    let da = (bounds.alpha_hi - bounds.alpha_lo) / n as f64;
    let db = (bounds.beta_hi - bounds.beta_lo) / n as f64;
    let mut cells: Vec<GridCell> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            GridCell {
                alpha_lo: bounds.alpha_lo + i as f64 * da,
                alpha_hi: bounds.alpha_lo + (i + 1) as f64 * da,
                beta_lo: bounds.beta_lo + j as f64 * db,
                beta_hi: bounds.beta_lo + (j + 1) as f64 * db,
                mass: 0.0,
                log_unnorm: f64::NEG_INFINITY,
            }
        })
        .collect();
    cells.par_iter_mut().for_each(|c| cell_log_unnorm(&log_density, c));
    normalize(&mut cells)?;

    for _ in 0..refinements {
        // heaviest cells holding half the mass, ties resolved by index order
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&x, &y| {
            cells[y]
                .mass
                .partial_cmp(&cells[x].mass)
                .unwrap()
                .then(x.cmp(&y))
        });
        let mut cumulative = 0.0;
        let mut split_set = Vec::new();
        for idx in order {
            split_set.push(idx);
            cumulative += cells[idx].mass;
            if cumulative >= 0.5 {
                break;
            }
        }
        split_set.sort_unstable();

        let mut next = Vec::with_capacity(cells.len() + 3 * split_set.len());
        let mut to_split = split_set.iter().peekable();
        let mut fresh = Vec::new();
        for (idx, cell) in cells.iter().enumerate() {
            if to_split.peek() == Some(&&idx) {
                to_split.next();
                let (mid_a, mid_b) = cell.midpoint();
                for (a_lo, a_hi) in [(cell.alpha_lo, mid_a), (mid_a, cell.alpha_hi)] {
                    for (b_lo, b_hi) in [(cell.beta_lo, mid_b), (mid_b, cell.beta_hi)] {
                        fresh.push(next.len());
                        next.push(GridCell {
                            alpha_lo: a_lo,
                            alpha_hi: a_hi,
                            beta_lo: b_lo,
                            beta_hi: b_hi,
                            mass: 0.0,
                            log_unnorm: f64::NEG_INFINITY,
                        });
                    }
                }
            } else {
                next.push(*cell);
            }
        }
        let mut fresh_cells: Vec<GridCell> = fresh.iter().map(|&i| next[i]).collect();
        fresh_cells.par_iter_mut().for_each(|c| cell_log_unnorm(&log_density, c));
        for (slot, cell) in fresh.iter().zip(fresh_cells) {
            next[*slot] = cell;
        }
        cells = next;
        normalize(&mut cells)?;
    }

    Ok(GridPosterior { cells, refinements, bounds })
}

/// Grid posterior of a two-parameter dose-response model, integrating its
/// constrained-scale density over the box.
pub fn grid_posterior(
    model: &SimpleLrModel,
    bounds: GridBounds,
    initial_resolution: usize,
    refinements: usize,
) -> Result<GridPosterior, OracleError> {
    grid_posterior_fn(
        |alpha, beta| model.log_density_constrained(alpha, beta),
        bounds,
        initial_resolution,
        refinements,
    )
}

/// Mean, standard deviation and quartiles of one marginal.
#[derive(Debug, Clone, Copy)]
pub struct AxisMoments {
    pub mean: f64,
    pub sd: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

fn axis_moments(grid: &GridPosterior, pick: impl Fn(&GridCell) -> f64) -> AxisMoments {
    let mean = compensated_sum(grid.cells.iter().map(|c| c.mass * pick(c)));
    let var = compensated_sum(
        grid.cells.iter().map(|c| c.mass * (pick(c) - mean) * (pick(c) - mean)),
    );
    // marginal CDF over sorted cell midpoints, linear interpolation between
    // successive cumulative points
    let mut pairs: Vec<(f64, f64)> = grid.cells.iter().map(|c| (pick(c), c.mass)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (x, m) in pairs {
        match merged.last_mut() {
            Some((last_x, last_m)) if *last_x == x => *last_m += m,
            _ => merged.push((x, m)),
        }
    }
    let quantile = |q: f64| -> f64 {
        let mut cum = 0.0;
        let mut prev_x = merged[0].0;
        let mut prev_cum = 0.0;
        for &(x, m) in &merged {
            cum += m;
            if cum >= q {
                if cum == prev_cum {
                    return x;
                }
                let t = (q - prev_cum) / (cum - prev_cum);
                return prev_x + t * (x - prev_x);
            }
            prev_x = x;
            prev_cum = cum;
        }
        merged[merged.len() - 1].0
    };
    AxisMoments {
        mean,
        sd: var.max(0.0).sqrt(),
        q25: quantile(0.25),
        median: quantile(0.5),
        q75: quantile(0.75),
    }
}

/// Marginal moments of both parameters from mass-weighted cell midpoints.
pub fn grid_moments(grid: &GridPosterior) -> (AxisMoments, AxisMoments) {
    (
        axis_moments(grid, |c| c.midpoint().0),
        axis_moments(grid, |c| c.midpoint().1),
    )
}

/// Composite-Simpson results for an unnormalized 1-D density.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature1d {
    pub log_normalizer: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Integrates `exp(log_density)` on `[lower, upper]` with composite
/// Simpson's rule on `points` nodes (rounded up to an odd count), returning
/// the log-normalizer and the first two moments. Non-finite density values
/// (NaN or +inf) at a node are an error; `-inf` (zero density) is fine.
pub fn quadrature_1d(
    log_density: impl Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    points: usize,
) -> Result<Quadrature1d, OracleError> {
    if points < 64 {
        return Err(OracleError::InvalidArgs(format!("need at least 64 points, got {points}")));
    }
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return Err(OracleError::InvalidArgs("invalid interval".to_string()));
    }
    let nodes = if points % 2 == 1 { points } else { points + 1 };
    let h = (upper - lower) / (nodes - 1) as f64;

    let mut log_vals = Vec::with_capacity(nodes);
    let mut max_log = f64::NEG_INFINITY;
    for i in 0..nodes {
        let x = lower + i as f64 * h;
        let lv = log_density(x);
        if lv.is_nan() || lv == f64::INFINITY {
            return Err(OracleError::NonFiniteDensity { x });
        }
        max_log = max_log.max(lv);
        log_vals.push(lv);
    }
    if !max_log.is_finite() {
        return Err(OracleError::BoundsMissPosterior);
    }

    let weight = |i: usize| -> f64 {
        if i == 0 || i == nodes - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut z = 0.0; // scaled normalizer
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (i, lv) in log_vals.iter().enumerate() {
        let x = lower + i as f64 * h;
        let f = (lv - max_log).exp() * weight(i);
        z += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    let mean = m1 / z;
    let var = m2 / z - mean * mean;
    Ok(Quadrature1d {
        log_normalizer: max_log + (z * h / 3.0).ln(),
        mean,
        sd: var.max(0.0).sqrt(),
    })
}
