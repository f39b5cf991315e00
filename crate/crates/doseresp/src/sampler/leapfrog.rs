//! Leapfrog integration of Hamiltonian dynamics under a diagonal mass
//! matrix: half-kick, drift, half-kick. Symmetric and symplectic, so
//! trajectories are reversible up to floating-point roundoff.

use crate::model::ModelDensity;

/// Integrates `steps` leapfrog steps in place.
///
/// `grad` must hold the gradient at the entry `position` and holds the
/// gradient at the exit position afterwards. `mass_diag` is the diagonal of
/// the mass matrix M; kinetic energy is `½ Σ p_i²/M_i` and the drift uses
/// velocity `p_i/M_i`. Returns the log-density at the final position.
///
/// If the density or gradient turns non-finite mid-trajectory the
/// integration stops early and returns the non-finite value; the caller
/// treats that transition as divergent.
pub fn leapfrog<M: ModelDensity + ?Sized>(
    model: &M,
    position: &mut [f64],
    momentum: &mut [f64],
    grad: &mut [f64],
    step_size: f64,
    steps: usize,
    mass_diag: &[f64],
) -> f64 {
    debug_assert!(step_size > 0.0 && steps >= 1);
    debug_assert!(mass_diag.iter().all(|&m| m > 0.0));
    let half = 0.5 * step_size;
    let mut log_density = f64::NAN;
    for step in 0..steps {
        for i in 0..momentum.len() {
            momentum[i] += half * grad[i];
        }
        for i in 0..position.len() {
            position[i] += step_size * momentum[i] / mass_diag[i];
        }
        log_density = model.log_density_gradient(position, grad);
        if !log_density.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return f64::NAN;
        }
        for i in 0..momentum.len() {
            momentum[i] += half * grad[i];
        }
        let _ = step;
    }
    log_density
}

/// Kinetic energy `½ Σ p_i² / M_i`.
pub fn kinetic_energy(momentum: &[f64], mass_diag: &[f64]) -> f64 {
    momentum
        .iter()
        .zip(mass_diag)
        .map(|(p, m)| 0.5 * p * p / m)
        .sum()
}
