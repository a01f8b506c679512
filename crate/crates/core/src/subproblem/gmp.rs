use crate::numerics::norm;

use super::cone::SocPoint;
use super::ssn::cone_residual;
use super::{cubic_prox, CubicSubproblem};

/// Result of a mirror-prox run.
#[derive(Debug, Clone, PartialEq)]
pub struct GmpOutcome {
    /// Average of the half-step iterates.
    pub average: Vec<f64>,
    /// Last full-step iterate.
    pub last: Vec<f64>,
    pub iterations: usize,
    /// `‖E‖` at the lifted average.
    pub residual: f64,
    /// Whether the switch radius was reached before the budget ran out.
    pub converged: bool,
}

/// Prox step from `anchor` along the model operator evaluated at `probe`.
fn prox_step(sp: &CubicSubproblem, anchor: &[f64], probe: &[f64]) -> Vec<f64> {
    let (m, _) = sp.dims();
    let ell = sp.ell();
    let q = sp.quadratic_gradient(probe);
    let vx: Vec<f64> = (0..m).map(|i| anchor[i] - q[i] / ell).collect();
    let vy: Vec<f64> = (m..anchor.len()).map(|i| anchor[i] + q[i] / ell).collect();
    let mut out = cubic_prox(&vx, ell, sp.rho());
    out.extend(cubic_prox(&vy, ell, sp.rho()));
    out
}

/// One mirror-prox step from `dz`: returns `(half, full)`.
pub fn gmp_iterate(sp: &CubicSubproblem, dz: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half = prox_step(sp, dz, dz);
    let full = prox_step(sp, dz, &half);
    (half, full)
}

/// Runs at least one mirror-prox step from `start`, stopping once `‖E(lift(average))‖ ≤ switch_radius` or `max_iters`.
pub fn gmp_solve(sp: &CubicSubproblem, start: &[f64], max_iters: usize, switch_radius: f64) -> GmpOutcome {
    let (m, _) = sp.dims();
    let residual_of = |dz: &[f64]| norm(&cone_residual(sp, &SocPoint::lift(dz, m).to_flat()));

    let mut current = start.to_vec();
    let mut sum = vec![0.0; start.len()];
    let mut average = start.to_vec();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while !converged && iterations < max_iters.max(1) {
        let (half, full) = gmp_iterate(sp, &current);
        iterations += 1;
        for (s, h) in sum.iter_mut().zip(&half) {
            *s += h;
        }
        average = sum.iter().map(|s| s / iterations as f64).collect();
        current = full;
        residual = residual_of(&average);
        converged = residual <= switch_radius;
    }
    GmpOutcome {
        average,
        last: current,
        iterations,
        residual,
        converged,
    }
}
