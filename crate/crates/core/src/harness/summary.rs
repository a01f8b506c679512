use serde::{Deserialize, Serialize};

use crate::solvers::{IterateTrace, SolverResult, SolverStatus};

/// Fewest positive-gap rows a slope is fitted on.
pub const MIN_SLOPE_ROWS: usize = 10;

/// Least-squares slope of `ln gap` against `ln iter` over rows with a positive gap.
pub fn fit_loglog_slope(rows: &[IterateTrace]) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| match r.gap {
            Some(g) if g > 0.0 && g.is_finite() => Some(((r.iter as f64).ln(), g.ln())),
            _ => None,
        })
        .collect();
    if points.len() < MIN_SLOPE_ROWS {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    pub status: String,
    pub final_gap: Option<f64>,
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub subproblem_iters: usize,
    pub samples: usize,
    pub epochs: f64,
    pub wall_time_s: f64,
    pub slope: Option<f64>,
    /// Set for runs on single-class AUC data.
    pub degenerate: bool,
}

impl RunSummary {
    pub fn from_result(result: &SolverResult, problem: &str, seed: u64) -> Self {
        let trace = &result.trace;
        Self {
            algorithm: result.algorithm.name().to_string(),
            problem: problem.to_string(),
            seed,
            status: status_label(&result.status),
            final_gap: trace.last().and_then(|r| r.gap),
            final_grad_norm: result.final_grad_norm(),
            iterations: trace.len(),
            subproblem_iters: trace.iter().map(|r| r.subproblem_iters).sum(),
            samples: trace.iter().map(|r| r.samples).sum(),
            epochs: result.epochs.last().copied().unwrap_or(0.0),
            wall_time_s: result.wall_times.last().copied().unwrap_or(0.0),
            slope: fit_loglog_slope(trace),
            degenerate: false,
        }
    }
}

pub fn status_label(status: &SolverStatus) -> String {
    match status {
        SolverStatus::Converged => "converged".into(),
        SolverStatus::Budget => "budget".into(),
        SolverStatus::StoppedAtSaddle => "stopped_at_saddle".into(),
        SolverStatus::Aborted(msg) => format!("aborted: {msg}"),
    }
}
