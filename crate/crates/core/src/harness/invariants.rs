use serde::{Deserialize, Serialize};

use crate::solvers::{IterateTrace, LambdaWindow};

/// Which family of bounds a trace is replayed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Exact,
    Inexact,
}

impl InvariantKind {
    pub fn window(&self) -> LambdaWindow {
        match self {
            Self::Exact => LambdaWindow::EXACT,
            Self::Inexact => LambdaWindow::INEXACT,
        }
    }

    /// Step-energy constant `C` in `Σ‖z_k − ẑ_{k−1}‖² ≤ C‖z_0 − z*‖²`.
    pub fn energy_factor(&self) -> f64 {
        match self {
            Self::Exact => 12.0,
            Self::Inexact => 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub iter: usize,
    pub check: String,
    pub detail: String,
}

const REL: f64 = 1e-10;

/// Replays the per-iteration bounds of the Newton extragradient analysis on a trace.
///
/// `radius` is `‖z_0 − z*‖`. Anchor drift and the `Σλ` lower bound are only asserted for exact runs.
pub fn replay_invariants(rows: &[IterateTrace], rho: f64, radius: f64, kind: InvariantKind) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |iter: usize, check: &str, detail: String| {
        out.push(Violation {
            iter,
            check: check.to_string(),
            detail,
        })
    };
    let window = kind.window();
    let mut energy = 0.0;
    let mut lambda_sum = 0.0;
    for row in rows {
        let scaled = row.lambda * rho * row.step_norm;
        if scaled < window.lo * (1.0 - REL) || scaled > window.hi * (1.0 + REL) {
            push(row.iter, "lambda_window", format!("λρ‖Δz‖ = {scaled:.6e} outside [{}, {}]", window.lo, window.hi));
        }
        energy += row.step_norm * row.step_norm;
        let energy_cap = kind.energy_factor() * radius * radius;
        if energy > energy_cap * (1.0 + REL) {
            push(row.iter, "step_energy", format!("{energy:.6e} > {energy_cap:.6e}"));
        }
        lambda_sum += row.lambda;
        if kind == InvariantKind::Exact {
            if row.hat_dist > 2.0 * radius * (1.0 + REL) {
                push(row.iter, "anchor_drift", format!("{:.6e} > {:.6e}", row.hat_dist, 2.0 * radius));
            }
            let floor = (row.iter as f64).powf(1.5) / (30.0 * 3f64.sqrt() * rho * radius);
            if lambda_sum < floor * (1.0 - REL) {
                push(row.iter, "lambda_sum", format!("{lambda_sum:.6e} < {floor:.6e}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize, lambda: f64, step: f64, hat: f64) -> IterateTrace {
        IterateTrace {
            iter,
            time_s: None,
            lambda,
            step_norm: step,
            grad_norm: 1.0,
            gap: None,
            hat_dist: hat,
            samples: 0,
            subproblem_iters: 0,
        }
    }

    #[test]
    fn clean_trace_passes() {
        let lambda = 14.0 / 195.0 / 0.1;
        let rows = vec![row(1, lambda, 1.0, 0.5), row(2, lambda, 1.0, 0.5)];
        assert!(replay_invariants(&rows, 0.1, 1.0, InvariantKind::Exact).is_empty());
    }

    #[test]
    fn each_check_fires() {
        let rows = vec![row(1, 1.0, 1.0, 3.0)];
        let v = replay_invariants(&rows, 0.1, 1.0, InvariantKind::Exact);
        let names: Vec<&str> = v.iter().map(|x| x.check.as_str()).collect();
        assert!(names.contains(&"lambda_window"));
        assert!(names.contains(&"anchor_drift"));
        let big = vec![row(1, 1.0 / (14.5 * 0.1 * 5.0), 5.0, 0.0)];
        let v = replay_invariants(&big, 0.1, 1.0, InvariantKind::Inexact);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].check, "step_energy");
    }
}
