//! Outer solvers: the exact, inexact and subsampled Newton extragradient
//! methods, plus first-order baselines (EG, OGDA and their stochastic versions).

mod first_order;
mod newton;

pub use first_order::{eg_solve, ogda_solve, seg_solve, sogda_solve, StepRule, StochasticSettings};
pub use newton::{
    inexact_newton_minmax, newton_minmax, subsampled_newton_minmax, ExactHessian, HessianOracle,
    HessianRequest, HessianSample, SampleSizeRule, SubsampledHessianOracle, SubsampledSettings,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{axpy, distance};
use crate::saddle::{average_iterates, restricted_gap, GapConfig, JointPoint, SaddleProblem};
use crate::subproblem::{SubproblemOptions, SubproblemStatus};

/// Admissible range `[lo, hi]` for `λρ‖Δz‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaWindow {
    pub lo: f64,
    pub hi: f64,
}

impl LambdaWindow {
    /// `[1/15, 1/13]`, used with exact subproblem solutions.
    pub const EXACT: Self = Self {
        lo: 1.0 / 15.0,
        hi: 1.0 / 13.0,
    };
    /// `[1/15, 1/14]`, used with inexact solutions.
    pub const INEXACT: Self = Self {
        lo: 1.0 / 15.0,
        hi: 1.0 / 14.0,
    };

    pub fn contains(&self, lambda: f64, rho: f64, step_norm: f64) -> bool {
        let v = lambda * rho * step_norm;
        self.lo <= v && v <= self.hi
    }
}

/// `λ` with `λρ‖Δz‖` at the midpoint of the window.
pub fn select_lambda(step_norm: f64, rho: f64, window: LambdaWindow) -> Result<f64> {
    if !(rho > 0.0) || !(window.lo > 0.0 && window.lo < window.hi) {
        return Err(Error::InvalidArgument(format!(
            "select_lambda needs rho > 0 and 0 < lo < hi (rho={rho}, window={window:?})"
        )));
    }
    if !(step_norm > 0.0) {
        return Err(Error::SolverAborted("zero step: the anchor is a saddle point".into()));
    }
    Ok(0.5 * (window.lo + window.hi) / (rho * step_norm))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Hessian-Lipschitz parameter.
    pub rho: f64,
    pub max_iters: usize,
    /// Threshold on `‖F(z_k)‖`; `1e−12·(1 + ‖F(z_0)‖)` when absent.
    pub stop_tol: Option<f64>,
    pub kappa_m: f64,
    /// Cap of the `τ` rule; `ρ/8` when absent.
    pub tau0: Option<f64>,
    /// Bound on `‖H‖` used by the `τ` rule; taken from the Hessian source when absent.
    pub kappa_h: Option<f64>,
    /// Total failure probability of the subsampled method.
    pub delta: f64,
    /// Step-size window; the algorithm's own window when absent.
    pub window: Option<LambdaWindow>,
    pub seed: u64,
    pub subproblem: SubproblemOptions,
    /// Start each subproblem's mirror-prox phase from the previous step.
    pub warm_start: bool,
    /// Record `‖(H − ∇²f)Δz‖` against the exact Hessian each iteration.
    pub check_condition1: bool,
}

impl SolverConfig {
    pub fn new(rho: f64, max_iters: usize) -> Self {
        Self {
            rho,
            max_iters,
            stop_tol: None,
            kappa_m: 0.1,
            tau0: None,
            kappa_h: None,
            delta: 0.01,
            window: None,
            seed: 0,
            subproblem: SubproblemOptions::default(),
            warm_start: true,
            check_condition1: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.kappa_m > 0.0 && self.kappa_m < 1.0) {
            return Err(Error::Config(format!("kappa_m must lie in (0,1), got {}", self.kappa_m)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if let Some(w) = self.window {
            if !(w.lo > 0.0 && w.lo < w.hi) {
                return Err(Error::Config(format!("invalid lambda window {w:?}")));
            }
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0) {
                return Err(Error::Config(format!("tau0 must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn tau0_value(&self) -> f64 {
        self.tau0.unwrap_or(self.rho / 8.0)
    }

    /// `0 < κ_m < min{1, ρ/4}` and `0 < τ0 < ρ/4`, the hypotheses of the inexact analysis.
    pub fn hypotheses_hold(&self) -> bool {
        self.kappa_m < (self.rho / 4.0).min(1.0) && self.tau0_value() < self.rho / 4.0
    }
}

/// Restricted-gap evaluation against a known saddle.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTracking {
    pub reference: JointPoint,
    pub config: GapConfig,
}

impl GapTracking {
    /// Ball radius `factor·‖z_0 − z*‖`.
    pub fn with_radius_factor(reference: JointPoint, z0: &JointPoint, factor: f64) -> Result<Self> {
        let beta = factor * reference.distance(z0);
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument("gap radius is zero: z0 is the reference saddle".into()));
        }
        Ok(Self {
            reference,
            config: GapConfig::new(beta),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Newton,
    InexactNewton,
    SubsampledNewton,
    Eg,
    Ogda,
    Seg,
    Sogda,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Newton => "newton",
            Self::InexactNewton => "inexact-newton",
            Self::SubsampledNewton => "subsampled-newton",
            Self::Eg => "eg",
            Self::Ogda => "ogda",
            Self::Seg => "seg",
            Self::Sogda => "sogda",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "newton" => Self::Newton,
            "inexact-newton" | "inexact" => Self::InexactNewton,
            "subsampled-newton" | "subsampled" => Self::SubsampledNewton,
            "eg" => Self::Eg,
            "ogda" => Self::Ogda,
            "seg" => Self::Seg,
            "sogda" => Self::Sogda,
            other => return Err(Error::Config(format!("unknown algorithm '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    /// `‖F(z_k)‖ ≤ stop_tol` at some `k ≥ 1`.
    Converged,
    /// The iteration budget was used up.
    Budget,
    /// `z_0` itself passed the saddle test.
    StoppedAtSaddle,
    /// A subproblem could not be solved to the required accuracy.
    Aborted(String),
}

/// One row of an iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub iter: usize,
    /// Left empty in solver output so traces stay reproducible; wall times live in [`SolverResult::wall_times`].
    pub time_s: Option<f64>,
    pub lambda: f64,
    /// `‖z_k − ẑ_{k−1}‖`
    pub step_norm: f64,
    /// `‖F(z_k)‖`
    pub grad_norm: f64,
    /// Restricted gap of the averaged iterate, when a reference saddle is known.
    pub gap: Option<f64>,
    /// `‖ẑ_k − z_0‖`
    pub hat_dist: f64,
    pub samples: usize,
    pub subproblem_iters: usize,
}

/// Per-iteration bookkeeping of the Newton-type methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemRecord {
    pub status: SubproblemStatus,
    pub model_grad_norm: f64,
    /// Accuracy threshold the solve had to meet at the returned step.
    pub threshold: f64,
    /// `‖∇f(ẑ_k)‖`
    pub anchor_grad_norm: f64,
    pub gmp_iters: usize,
    pub ssn_iters: usize,
    pub tau: Option<f64>,
    pub kappa_h: Option<f64>,
    /// `‖(H − ∇²f(ẑ_k))Δz_k‖`, when requested.
    pub condition1_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub algorithm: Algorithm,
    /// `Σλ_k z_k / Σλ_k`
    pub averaged: JointPoint,
    /// Last leading iterate `z_T`.
    pub last: JointPoint,
    /// Last anchor `ẑ_T`.
    pub anchor: JointPoint,
    pub trace: Vec<IterateTrace>,
    /// Leading iterates `z_1, …, z_T`.
    pub iterates: Vec<JointPoint>,
    pub status: SolverStatus,
    pub initial_grad_norm: f64,
    /// Cumulative data passes after each iteration.
    pub epochs: Vec<f64>,
    /// Cumulative seconds after each iteration.
    pub wall_times: Vec<f64>,
    pub subproblems: Vec<SubproblemRecord>,
    pub hypotheses_hold: bool,
}

impl SolverResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.lambda).collect()
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.trace.last().map_or(self.initial_grad_norm, |r| r.grad_norm)
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self.status, SolverStatus::Aborted(_))
    }

    /// Copies each iteration's wall time into the trace's `time_s` column.
    pub fn with_timed_trace(mut self) -> Self {
        for (row, t) in self.trace.iter_mut().zip(&self.wall_times) {
            row.time_s = Some(*t);
        }
        self
    }
}

/// Accumulates the ergodic average, trace rows, epochs and timings.
pub(crate) struct Recorder<'a> {
    problem: &'a dyn SaddleProblem,
    z0: JointPoint,
    tracking: Option<&'a GapTracking>,
    weighted_sum: Vec<f64>,
    weight_total: f64,
    trace: Vec<IterateTrace>,
    iterates: Vec<JointPoint>,
    epochs: Vec<f64>,
    wall_times: Vec<f64>,
    epoch_total: f64,
    started: Instant,
}

pub(crate) struct RowData {
    pub lambda: f64,
    pub step_norm: f64,
    pub grad_norm: f64,
    pub anchor: Vec<f64>,
    pub samples: usize,
    pub subproblem_iters: usize,
    pub epochs: f64,
}

impl<'a> Recorder<'a> {
    pub fn new(problem: &'a dyn SaddleProblem, z0: &JointPoint, tracking: Option<&'a GapTracking>) -> Self {
        Self {
            problem,
            z0: z0.clone(),
            tracking,
            weighted_sum: vec![0.0; z0.len()],
            weight_total: 0.0,
            trace: Vec::new(),
            iterates: Vec::new(),
            epochs: Vec::new(),
            wall_times: Vec::new(),
            epoch_total: 0.0,
            started: Instant::now(),
        }
    }

    pub fn push(&mut self, leading: Vec<f64>, row: RowData) -> Result<()> {
        axpy(row.lambda, &leading, &mut self.weighted_sum);
        self.weight_total += row.lambda;
        let gap = match self.tracking {
            Some(t) => {
                let avg: Vec<f64> = self.weighted_sum.iter().map(|v| v / self.weight_total).collect();
                let avg = self.z0.with_coords(avg);
                Some(restricted_gap(self.problem, &avg, &t.reference, &t.config)?.value)
            }
            None => None,
        };
        self.epoch_total += row.epochs;
        self.epochs.push(self.epoch_total);
        self.wall_times.push(self.started.elapsed().as_secs_f64());
        self.trace.push(IterateTrace {
            iter: self.trace.len() + 1,
            time_s: None,
            lambda: row.lambda,
            step_norm: row.step_norm,
            grad_norm: row.grad_norm,
            gap,
            hat_dist: distance(&row.anchor, self.z0.coords()),
            samples: row.samples,
            subproblem_iters: row.subproblem_iters,
        });
        self.iterates.push(self.z0.with_coords(leading));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn finish(
        self,
        algorithm: Algorithm,
        anchor: Vec<f64>,
        status: SolverStatus,
        initial_grad_norm: f64,
        subproblems: Vec<SubproblemRecord>,
        hypotheses_hold: bool,
    ) -> Result<SolverResult> {
        let lambdas: Vec<f64> = self.trace.iter().map(|r| r.lambda).collect();
        let averaged = if self.iterates.is_empty() {
            self.z0.clone()
        } else {
            average_iterates(&self.iterates, &lambdas)?
        };
        let last = self.iterates.last().cloned().unwrap_or_else(|| self.z0.clone());
        Ok(SolverResult {
            algorithm,
            averaged,
            last,
            anchor: self.z0.with_coords(anchor),
            trace: self.trace,
            iterates: self.iterates,
            status,
            initial_grad_norm,
            epochs: self.epochs,
            wall_times: self.wall_times,
            subproblems,
            hypotheses_hold,
        })
    }
}

pub(crate) fn check_start(problem: &dyn SaddleProblem, z0: &JointPoint) -> Result<()> {
    if z0.dims() != problem.dims() {
        let (m, n) = problem.dims();
        return Err(Error::DimensionMismatch {
            expected: m + n,
            got: z0.len(),
            context: "solver start point",
        });
    }
    Ok(())
}
