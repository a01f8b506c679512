use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{project_ball, symmetric_spectral_norm};

use super::{JointPoint, SaddleProblem};

/// Settings for evaluating the restricted gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    /// Ball radius around the reference saddle.
    pub beta: f64,
    pub inner_iters: usize,
    /// Tolerance on the projected-gradient residual of each inner solve.
    pub inner_tol: f64,
}

impl GapConfig {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            inner_iters: 2000,
            inner_tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || self.inner_iters == 0 || !(self.inner_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gap config needs beta > 0, inner_iters >= 1, inner_tol > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Value of `Gap(x̂, ŷ; β)` plus diagnostics of the two inner problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapValue {
    pub value: f64,
    /// `max_{y ∈ B_β(y*)} f(x̂, y)`
    pub max_term: f64,
    /// `min_{x ∈ B_β(x*)} f(x, ŷ)`
    pub min_term: f64,
    /// Largest projected-gradient residual of the iterative inner solves (0 for closed forms).
    pub residual: f64,
    /// False when an inner solve hit its budget; `value` is then the best value reached.
    pub converged: bool,
}

struct InnerSolve {
    value: f64,
    residual: f64,
    converged: bool,
}

/// Projected gradient over a ball on one block, maximizing when `ascent` is set.
fn projected_gradient(
    problem: &dyn SaddleProblem,
    fixed: &[f64],
    center: &[f64],
    start: &[f64],
    cfg: &GapConfig,
    ascent: bool,
) -> InnerSolve {
    let (m, n) = problem.dims();
    let on_y = ascent;
    let assemble = |var: &[f64]| -> Vec<f64> {
        if on_y {
            [fixed, var].concat()
        } else {
            [var, fixed].concat()
        }
    };
    let block = |v: &[f64]| -> Vec<f64> {
        if on_y {
            v[m..].to_vec()
        } else {
            v[..m].to_vec()
        }
    };
    let sign = if ascent { -1.0 } else { 1.0 };
    // minimize phi = sign * f
    let phi = |var: &[f64]| sign * problem.value(&assemble(var));
    let grad = |var: &[f64]| -> Vec<f64> {
        block(&problem.gradient(&assemble(var)))
            .into_iter()
            .map(|g| sign * g)
            .collect()
    };

    let mut var = start.to_vec();
    project_ball(&mut var, center, cfg.beta);

    let hess = problem.hessian(&assemble(&var));
    let (off, dim) = if on_y { (m, n) } else { (0, m) };
    let sub = hess.block(off, off, dim, dim);
    let mut lip = symmetric_spectral_norm(|v| sub.matvec(v), dim, 50).max(1e-12);

    let mut value = phi(&var);
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.inner_iters {
        let g = grad(&var);
        let (next, next_value) = loop {
            let mut trial: Vec<f64> = var.iter().zip(&g).map(|(v, gi)| v - gi / lip).collect();
            project_ball(&mut trial, center, cfg.beta);
            let tv = phi(&trial);
            // sufficient decrease for an L-smooth model
            let d2: f64 = trial.iter().zip(&var).map(|(a, b)| (a - b) * (a - b)).sum();
            let model = value
                + g.iter()
                    .zip(trial.iter().zip(&var))
                    .map(|(gi, (a, b))| gi * (a - b))
                    .sum::<f64>()
                + 0.5 * lip * d2;
            if tv <= model + 1e-12 * (1.0 + value.abs()) || lip > 1e30 {
                break (trial, tv);
            }
            lip *= 2.0;
        };
        residual = lip * crate::numerics::distance(&next, &var);
        var = next;
        value = value.min(next_value);
        if residual <= cfg.inner_tol {
            return InnerSolve {
                value: sign * value,
                residual,
                converged: true,
            };
        }
    }
    InnerSolve {
        value: sign * value,
        residual,
        converged: false,
    }
}

/// Restricted gap `max_{y∈B_β(y*)} f(x̂,y) − min_{x∈B_β(x*)} f(x,ŷ)`.
///
/// Closed-form inner solutions registered by the problem are used when present;
/// otherwise each side runs projected gradient with step `1/L̂`.
pub fn restricted_gap(
    problem: &dyn SaddleProblem,
    candidate: &JointPoint,
    center: &JointPoint,
    cfg: &GapConfig,
) -> Result<GapValue> {
    cfg.validate()?;
    let (m, n) = problem.dims();
    check_dim(m + n, candidate.len(), "gap candidate")?;
    check_dim(m + n, center.len(), "gap center")?;
    check_dim(m, candidate.x().len(), "gap candidate x-block")?;
    check_dim(m, center.x().len(), "gap center x-block")?;

    let (x_hat, y_hat) = (candidate.x(), candidate.y());
    let (x_star, y_star) = (center.x(), center.y());

    let max_side = match problem.max_over_y_ball(x_hat, y_star, cfg.beta) {
        Some(v) => InnerSolve {
            value: v,
            residual: 0.0,
            converged: true,
        },
        None => projected_gradient(problem, x_hat, y_star, y_hat, cfg, true),
    };
    let min_side = match problem.min_over_x_ball(y_hat, x_star, cfg.beta) {
        Some(v) => InnerSolve {
            value: v,
            residual: 0.0,
            converged: true,
        },
        None => projected_gradient(problem, y_hat, x_star, x_hat, cfg, false),
    };
    Ok(GapValue {
        value: max_side.value - min_side.value,
        max_term: max_side.value,
        min_term: min_side.value,
        residual: max_side.residual.max(min_side.residual),
        converged: max_side.converged && min_side.converged,
    })
}
