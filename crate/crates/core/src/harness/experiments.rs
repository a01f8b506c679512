use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::saddle::JointPoint;
use crate::solvers::{
    eg_solve, inexact_newton_minmax, newton_minmax, ogda_solve, seg_solve, sogda_solve, subsampled_newton_minmax,
    Algorithm, ExactHessian, GapTracking, SolverConfig, SolverResult, StepRule, StochasticSettings,
};

use super::config::{BuiltProblem, ExperimentConfig, ProblemSpec, SamplingChoice};
use super::invariants::{replay_invariants, InvariantKind, Violation};
use super::summary::{status_label, RunSummary};
use super::trace::{emit_trace, TraceFormat, TraceHeader};

/// Step constants tried when a stochastic baseline has no `step_c`.
pub const STEP_GRID: [f64; 8] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0];

/// A finished run with everything needed to persist and report it.
#[derive(Debug, Clone)]
pub struct AlgoRun {
    pub result: SolverResult,
    pub summary: RunSummary,
    pub header: TraceHeader,
    /// `‖z_0 − z*‖` when a reference point is known.
    pub radius: Option<f64>,
    /// Solver `ρ`.
    pub rho: f64,
    /// Step constant used by a first-order method.
    pub step_c: Option<f64>,
}

impl AlgoRun {
    pub fn write(&self, path: impl AsRef<Path>, format: TraceFormat) -> Result<()> {
        emit_trace(&self.result.trace, &self.header, path, format)
    }

    /// Replays the Newton invariants; first-order runs have none.
    pub fn violations(&self) -> Vec<Violation> {
        let kind = match self.result.algorithm {
            Algorithm::Newton => InvariantKind::Exact,
            Algorithm::InexactNewton | Algorithm::SubsampledNewton => InvariantKind::Inexact,
            _ => return Vec::new(),
        };
        match self.radius {
            Some(r) => replay_invariants(&self.result.trace, self.rho, r, kind),
            None => Vec::new(),
        }
    }
}

/// Gap radius multiple of `‖z_0 − z*‖` for each algorithm.
pub fn gap_radius_factor(algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::InexactNewton | Algorithm::SubsampledNewton => 8.0,
        _ => 7.0,
    }
}

/// The convergence-theorem constant `C` in `Gap ≤ C·ρ‖z_0 − z*‖³/T^{3/2}`, for methods that have one.
pub fn theorem_constant(algorithm: Algorithm) -> Option<f64> {
    match algorithm {
        Algorithm::Newton => Some(960.0 * 3f64.sqrt()),
        Algorithm::InexactNewton => Some(1215.0 * 5f64.sqrt()),
        _ => None,
    }
}

pub fn theorem_bound(algorithm: Algorithm, rho: f64, radius: f64, iter: usize) -> Option<f64> {
    theorem_constant(algorithm).map(|c| c * rho * radius.powi(3) / (iter as f64).powf(1.5))
}

/// A point with `‖F‖` near zero, used as `z*` for gaps and radii.
pub fn reference_point(problem: &BuiltProblem) -> Result<Option<JointPoint>> {
    Ok(match problem {
        BuiltProblem::Cubic(p) => Some(p.saddle()),
        BuiltProblem::Quadratic(p) => Some(p.saddle()?),
        BuiltProblem::Glm(p) => Some(p.reference_saddle(1e-12)?),
        BuiltProblem::Auc { problem: p, .. } => {
            let mut cfg = SolverConfig::new(p.rho(), 500);
            cfg.stop_tol = Some(1e-11);
            let mut oracle = ExactHessian::new(p);
            let r = inexact_newton_minmax(p, &problem.start(), &cfg, &mut oracle, None)?;
            (r.final_grad_norm() <= 1e-9).then_some(r.last)
        }
    })
}

/// Lipschitz estimate of `F` over the region the iterates visit, for deterministic first-order steps.
pub fn operator_lipschitz(problem: &BuiltProblem, reference: Option<&JointPoint>) -> f64 {
    let z0 = problem.start();
    match (problem, reference) {
        (BuiltProblem::Cubic(p), Some(r)) => {
            let radius = z0.distance(r);
            let x_norm = r.x().iter().map(|v| v * v).sum::<f64>().sqrt();
            1.01 * (p.matrix_a().spectral_norm(500) + p.rho() * (x_norm + 7.0 * radius))
        }
        _ => {
            let mut points = vec![z0.clone()];
            points.extend(reference.cloned());
            let s = problem.saddle();
            1.01 * points
                .iter()
                .map(|z| s.hessian(z.coords()).spectral_norm(500))
                .fold(1e-12, f64::max)
        }
    }
}

fn solver_config(cfg: &ExperimentConfig, problem: &BuiltProblem, seed: u64) -> SolverConfig {
    let mut sc = SolverConfig::new(cfg.solver_rho.unwrap_or_else(|| problem.rho()), cfg.iters);
    sc.kappa_m = cfg.kappa_m;
    sc.delta = cfg.delta;
    sc.stop_tol = cfg.stop_tol;
    sc.seed = seed;
    sc
}

fn stochastic_iters(cfg: &ExperimentConfig, algorithm: Algorithm, components: usize) -> usize {
    let per_iter = match algorithm {
        Algorithm::Seg => 2.0,
        _ => 1.0,
    } * cfg.batch_size.min(components) as f64
        / components as f64;
    match cfg.epoch_budget {
        Some(budget) => (budget / per_iter).floor().max(1.0) as usize,
        None => cfg.iters,
    }
}

/// Picks the grid constant with the smallest final `‖F‖`; ties keep the smaller constant.
pub fn tune_step_c(
    problem: &BuiltProblem,
    algorithm: Algorithm,
    batch_size: usize,
    iters: usize,
    seed: u64,
) -> Result<f64> {
    let fs = problem
        .finite_sum()
        .ok_or_else(|| Error::Config("stochastic baselines need a finite-sum problem".into()))?;
    let z0 = problem.start();
    let mut best = (f64::INFINITY, STEP_GRID[0]);
    for c in STEP_GRID {
        let settings = StochasticSettings::new(batch_size, StepRule::Decaying(c), seed);
        let r = match algorithm {
            Algorithm::Seg => seg_solve(fs, &z0, &settings, iters, None)?,
            _ => sogda_solve(fs, &z0, &settings, iters, None)?,
        };
        let score = if r.is_aborted() { f64::INFINITY } else { r.final_grad_norm() };
        if score < best.0 {
            best = (score, c);
        }
    }
    Ok(best.1)
}

/// Runs one configured algorithm on an already built problem.
pub fn run_single(
    cfg: &ExperimentConfig,
    problem: &BuiltProblem,
    reference: Option<&JointPoint>,
    seed: u64,
) -> Result<AlgoRun> {
    let z0 = problem.start();
    let sp = problem.saddle();
    let sc = solver_config(cfg, problem, seed);
    let tracking = match (cfg.track_gap, reference) {
        (true, Some(r)) if r.distance(&z0) > 0.0 => {
            Some(GapTracking::with_radius_factor(r.clone(), &z0, gap_radius_factor(cfg.algorithm))?)
        }
        _ => None,
    };
    let tracking = tracking.as_ref();
    let need_sum = || {
        problem
            .finite_sum()
            .ok_or_else(|| Error::Config(format!("{} needs a finite-sum problem", cfg.algorithm.name())))
    };
    let mut step_c = None;
    let result = match cfg.algorithm {
        Algorithm::Newton => newton_minmax(sp, &z0, &sc, tracking)?,
        Algorithm::InexactNewton => match problem.finite_sum() {
            Some(fs) => inexact_newton_minmax(sp, &z0, &sc, &mut ExactHessian::finite_sum(fs), tracking)?,
            None => inexact_newton_minmax(sp, &z0, &sc, &mut ExactHessian::new(sp), tracking)?,
        },
        Algorithm::SubsampledNewton => {
            let settings = cfg.sampling.settings(cfg.with_replacement);
            subsampled_newton_minmax(need_sum()?, &z0, &sc, settings, tracking)?
        }
        Algorithm::Eg | Algorithm::Ogda => {
            let c = cfg
                .step_c
                .unwrap_or_else(|| 1.0 / (2.0 * operator_lipschitz(problem, reference)));
            step_c = Some(c);
            let rule = StepRule::Constant(c);
            if cfg.algorithm == Algorithm::Eg {
                eg_solve(sp, &z0, rule, cfg.iters, tracking)?
            } else {
                ogda_solve(sp, &z0, rule, cfg.iters, tracking)?
            }
        }
        Algorithm::Seg | Algorithm::Sogda => {
            let fs = need_sum()?;
            let iters = stochastic_iters(cfg, cfg.algorithm, fs.num_components());
            let c = match cfg.step_c {
                Some(c) => c,
                None => tune_step_c(problem, cfg.algorithm, cfg.batch_size, iters, seed)?,
            };
            step_c = Some(c);
            let settings = StochasticSettings::new(cfg.batch_size, StepRule::Decaying(c), seed);
            if cfg.algorithm == Algorithm::Seg {
                seg_solve(fs, &z0, &settings, iters, tracking)?
            } else {
                sogda_solve(fs, &z0, &settings, iters, tracking)?
            }
        }
    };
    let result = if cfg.timing { result.with_timed_trace() } else { result };
    let label = problem.label();
    let mut summary = RunSummary::from_result(&result, &label, seed);
    summary.degenerate = problem.is_degenerate();
    let mut echo = cfg.clone();
    echo.seed = seed;
    echo.step_c = step_c.or(cfg.step_c);
    echo.output = None;
    let header = TraceHeader::new(
        cfg.algorithm.name(),
        &label,
        seed,
        &status_label(&result.status),
        serde_json::to_value(&echo)?,
    );
    Ok(AlgoRun {
        radius: reference.map(|r| z0.distance(r)),
        rho: sc.rho,
        step_c,
        result,
        summary,
        header,
    })
}

/// Output path of repetition `rep` out of `reps`.
pub fn rep_path(base: &Path, rep: usize, reps: usize) -> PathBuf {
    if reps <= 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_rep{rep}.{ext}"),
        None => format!("{stem}_rep{rep}"),
    };
    base.with_file_name(name)
}

/// Runs every repetition of a configuration, writing traces when `output` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<AlgoRun>> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.reps);
    for rep in 0..cfg.reps {
        let seed = cfg.seed + rep as u64;
        let problem = BuiltProblem::build(&cfg.problem, seed)?;
        let reference = if cfg.track_gap || matches!(cfg.algorithm, Algorithm::Eg | Algorithm::Ogda) {
            reference_point(&problem)?
        } else {
            None
        };
        let run = run_single(cfg, &problem, reference.as_ref(), seed)?;
        if let Some(out) = &cfg.output {
            run.write(rep_path(out, rep, cfg.reps), cfg.format)?;
        }
        runs.push(run);
    }
    Ok(runs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicOptions {
    pub iters: usize,
    pub seed: u64,
    pub timing: bool,
}

impl Default for CubicOptions {
    fn default() -> Self {
        Self {
            iters: 100,
            seed: 0,
            timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CubicExperiment {
    pub n: usize,
    pub rho: f64,
    pub radius: f64,
    pub runs: Vec<AlgoRun>,
}

/// A gap row above its theorem curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub algorithm: Algorithm,
    pub iter: usize,
    pub gap: f64,
    pub bound: f64,
}

impl CubicExperiment {
    /// Rows whose gap exceeds the theorem curve plus `1e−8`.
    pub fn bound_violations(&self) -> Vec<BoundViolation> {
        let mut out = Vec::new();
        for run in &self.runs {
            for row in &run.result.trace {
                let (Some(gap), Some(bound)) =
                    (row.gap, theorem_bound(run.result.algorithm, self.rho, self.radius, row.iter))
                else {
                    continue;
                };
                if gap > bound + 1e-8 {
                    out.push(BoundViolation {
                        algorithm: run.result.algorithm,
                        iter: row.iter,
                        gap,
                        bound,
                    });
                }
            }
        }
        out
    }

    pub fn run(&self, algorithm: Algorithm) -> Option<&AlgoRun> {
        self.runs.iter().find(|r| r.result.algorithm == algorithm)
    }
}

/// The cubic-regularized bilinear benchmark with `ρ = 1/(20n)` from `z_0 = 0`.
pub fn run_cubic_experiment(n: usize, algorithms: &[Algorithm], options: &CubicOptions) -> Result<CubicExperiment> {
    if n < 2 {
        return Err(Error::Config(format!("cubic bilinear needs n >= 2, got {n}")));
    }
    let spec = ProblemSpec::CubicBilinear { n, rho: None };
    let problem = BuiltProblem::build(&spec, options.seed)?;
    let reference = reference_point(&problem)?.expect("analytic saddle");
    let mut runs = Vec::new();
    for &algorithm in algorithms {
        let mut cfg = ExperimentConfig::new(spec.clone(), algorithm);
        cfg.iters = options.iters;
        cfg.seed = options.seed;
        cfg.timing = options.timing;
        cfg.validate()?;
        runs.push(run_single(&cfg, &problem, Some(&reference), options.seed)?);
    }
    Ok(CubicExperiment {
        n,
        rho: problem.rho(),
        radius: problem.start().distance(&reference),
        runs,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AucOptions {
    pub iters: usize,
    pub seed: u64,
    pub sampling: SamplingChoice,
    pub with_replacement: bool,
    pub batch_size: usize,
    /// Evaluate restricted gaps against a numerically computed reference point.
    pub track_gap: bool,
    pub timing: bool,
}

impl Default for AucOptions {
    fn default() -> Self {
        Self {
            iters: 200,
            seed: 0,
            sampling: SamplingChoice::Empirical,
            with_replacement: false,
            batch_size: 16,
            track_gap: false,
            timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AucExperiment {
    pub label: String,
    pub components: usize,
    pub degenerate: bool,
    /// Epoch budget handed to the stochastic baselines.
    pub epoch_budget: f64,
    pub runs: Vec<AlgoRun>,
}

impl AucExperiment {
    pub fn run(&self, algorithm: Algorithm) -> Option<&AlgoRun> {
        self.runs.iter().find(|r| r.result.algorithm == algorithm)
    }
}

/// AUC maximization with `ρ = 1/N`. Newton-type methods run first; stochastic baselines get
/// the largest epoch count any of them used.
pub fn run_auc_experiment(spec: &ProblemSpec, algorithms: &[Algorithm], options: &AucOptions) -> Result<AucExperiment> {
    if !matches!(spec, ProblemSpec::Auc { .. }) {
        return Err(Error::Config(format!("expected an auc problem, got {}", spec.name())));
    }
    let probe = ExperimentConfig::new(spec.clone(), Algorithm::InexactNewton);
    probe.validate()?;
    let problem = BuiltProblem::build(spec, options.seed)?;
    let components = problem.finite_sum().expect("auc is a finite sum").num_components();
    let reference = if options.track_gap { reference_point(&problem)? } else { None };
    let base = |algorithm| {
        let mut cfg = ExperimentConfig::new(spec.clone(), algorithm);
        cfg.iters = options.iters;
        cfg.seed = options.seed;
        cfg.sampling = options.sampling;
        cfg.with_replacement = options.with_replacement;
        cfg.batch_size = options.batch_size;
        cfg.track_gap = options.track_gap;
        cfg.timing = options.timing;
        cfg
    };
    let (second, first): (Vec<Algorithm>, Vec<Algorithm>) = algorithms
        .iter()
        .partition(|a| matches!(a, Algorithm::Newton | Algorithm::InexactNewton | Algorithm::SubsampledNewton));
    let mut runs = Vec::new();
    for algorithm in second {
        runs.push(run_single(&base(algorithm), &problem, reference.as_ref(), options.seed)?);
    }
    let epoch_budget = runs
        .iter()
        .filter_map(|r| r.result.epochs.last().copied())
        .fold(0.0, f64::max);
    let epoch_budget = if epoch_budget > 0.0 { epoch_budget } else { 3.0 * options.iters as f64 };
    for algorithm in first {
        let mut cfg = base(algorithm);
        if matches!(algorithm, Algorithm::Seg | Algorithm::Sogda) {
            cfg.epoch_budget = Some(epoch_budget);
        }
        runs.push(run_single(&cfg, &problem, reference.as_ref(), options.seed)?);
    }
    Ok(AucExperiment {
        label: problem.label(),
        components,
        degenerate: problem.is_degenerate(),
        epoch_budget,
        runs,
    })
}
