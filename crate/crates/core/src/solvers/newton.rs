use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm, DenseMatrix};
use crate::problems::FiniteSum;
use crate::rng::{stream, streams, Rng};
use crate::saddle::{operator_at, JointPoint, SaddleProblem};
use crate::sampling::{
    bound_summary, empirical_sample_size, hessian_from_sample, nonuniform_probs, nonuniform_sample_size,
    per_iteration_delta, tau_rule, uniform_sample_size, SamplingPlan, SamplingScheme,
};
use crate::subproblem::{solve_cubic_subproblem, CubicSubproblem, SolveTarget, SubproblemStatus};

use super::{
    check_start, select_lambda, Algorithm, GapTracking, LambdaWindow, Recorder, RowData, SolverConfig,
    SolverResult, SolverStatus, SubproblemRecord,
};

/// What the outer loop knows when it asks for a Hessian at `ẑ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianRequest {
    /// Accuracy `τ_k` from the forcing rule.
    pub tau: f64,
    /// Per-iteration failure probability.
    pub delta: f64,
    /// `‖∇f(ẑ_k)‖`
    pub anchor_grad_norm: f64,
    /// `‖∇f(z_k)‖` at the latest leading point.
    pub leading_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianSample {
    pub matrix: DenseMatrix,
    /// Component Hessians evaluated.
    pub samples: usize,
    /// Data passes spent, in units of `N` component evaluations.
    pub data_passes: f64,
}

/// Source of the Hessian surrogate `H(ẑ_k)`.
pub trait HessianOracle {
    fn hessian(&mut self, z: &[f64], request: &HessianRequest) -> Result<HessianSample>;

    /// A bound `κ_H ≥ ‖H‖` valid for every call, when one is known.
    fn norm_bound(&self) -> Option<f64> {
        None
    }
}

/// The exact Hessian `∇²f`.
pub struct ExactHessian<'a> {
    problem: &'a dyn SaddleProblem,
    components: usize,
}

impl<'a> ExactHessian<'a> {
    pub fn new(problem: &'a dyn SaddleProblem) -> Self {
        Self { problem, components: 0 }
    }

    /// Counts `N` component Hessians per call.
    pub fn finite_sum(problem: &'a dyn FiniteSum) -> Self {
        Self {
            problem,
            components: problem.num_components(),
        }
    }
}

impl HessianOracle for ExactHessian<'_> {
    fn hessian(&mut self, z: &[f64], _request: &HessianRequest) -> Result<HessianSample> {
        Ok(HessianSample {
            matrix: self.problem.hessian(z),
            samples: self.components,
            data_passes: 1.0,
        })
    }
}

/// How many component Hessians to draw each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "size")]
pub enum SampleSizeRule {
    /// The high-probability thresholds at `(τ_k, per-iteration δ)`.
    Theory,
    /// `5·log(d+3)/min{‖∇f(ẑ_k)‖², ‖∇f(z_k)‖²}`.
    Empirical,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampledSettings {
    pub scheme: SamplingScheme,
    pub rule: SampleSizeRule,
    /// Uniform draws only; nonuniform sampling is always i.i.d.
    #[serde(default = "default_with_replacement")]
    pub with_replacement: bool,
}

fn default_with_replacement() -> bool {
    true
}

impl Default for SubsampledSettings {
    fn default() -> Self {
        Self {
            scheme: SamplingScheme::Uniform,
            rule: SampleSizeRule::Empirical,
            with_replacement: true,
        }
    }
}

/// Subsampled Hessians of a finite sum. Sizes of `N` or more use every component once.
pub struct SubsampledHessianOracle<'a> {
    fs: &'a dyn FiniteSum,
    settings: SubsampledSettings,
    rng: Rng,
    b_max: f64,
    b_avg: f64,
}

impl<'a> SubsampledHessianOracle<'a> {
    pub fn new(fs: &'a dyn FiniteSum, settings: SubsampledSettings, rng: Rng) -> Self {
        let (b_max, b_avg) = bound_summary(&fs.component_hessian_bounds());
        Self {
            fs,
            settings,
            rng,
            b_max,
            b_avg,
        }
    }

    fn sample_size(&self, request: &HessianRequest) -> Result<usize> {
        let (m, n) = self.fs.dims();
        let size = match self.settings.rule {
            SampleSizeRule::Fixed(s) => s,
            SampleSizeRule::Empirical => empirical_sample_size(
                self.fs.feature_dim(),
                &[request.anchor_grad_norm, request.leading_grad_norm],
                self.fs.num_components(),
            ),
            SampleSizeRule::Theory if self.b_max == 0.0 => 1,
            SampleSizeRule::Theory => match self.settings.scheme {
                SamplingScheme::Uniform => uniform_sample_size(self.b_max, request.tau, request.delta, m, n)?,
                SamplingScheme::Nonuniform => nonuniform_sample_size(self.b_avg, request.tau, request.delta, m, n)?,
            },
        };
        Ok(size.max(1))
    }
}

impl HessianOracle for SubsampledHessianOracle<'_> {
    fn hessian(&mut self, z: &[f64], request: &HessianRequest) -> Result<HessianSample> {
        let total = self.fs.num_components();
        let size = self.sample_size(request)?;
        let mut passes = 0.0;
        let plan = if size >= total {
            SamplingPlan::full(total)?
        } else {
            match self.settings.scheme {
                SamplingScheme::Uniform if self.settings.with_replacement => SamplingPlan::uniform(total, size)?,
                SamplingScheme::Uniform => SamplingPlan::uniform(total, size)?.without_replacement()?,
                SamplingScheme::Nonuniform => {
                    passes += 1.0;
                    SamplingPlan::nonuniform(nonuniform_probs(self.fs, z).probs, size)?
                }
            }
        };
        let indices = plan.draw(&mut self.rng);
        let matrix = hessian_from_sample(self.fs, z, &plan, &indices);
        Ok(HessianSample {
            matrix,
            samples: indices.len(),
            data_passes: passes + indices.len() as f64 / total as f64,
        })
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(self.b_max)
    }
}

enum Mode {
    Exact,
    Inexact,
}

#[allow(clippy::too_many_arguments)]
fn newton_core(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    cfg: &SolverConfig,
    oracle: &mut dyn HessianOracle,
    mode: Mode,
    algorithm: Algorithm,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    cfg.validate()?;
    check_start(problem, z0)?;
    let (m, n) = problem.dims();
    let rho = cfg.rho;
    let window = cfg.window.unwrap_or(match mode {
        Mode::Exact => LambdaWindow::EXACT,
        Mode::Inexact => LambdaWindow::INEXACT,
    });
    let delta_iter = per_iteration_delta(cfg.delta, cfg.max_iters.max(1))?;
    let mut recorder = Recorder::new(problem, z0, tracking);
    let mut records = Vec::new();

    let mut anchor = z0.coords().to_vec();
    let initial = norm(&operator_at(problem, &anchor));
    let stop_tol = cfg.stop_tol.unwrap_or(1e-12 * (1.0 + initial));
    if initial <= stop_tol {
        return recorder.finish(algorithm, anchor, SolverStatus::StoppedAtSaddle, initial, records, cfg.hypotheses_hold());
    }

    let mut g = problem.gradient(&anchor);
    let mut leading_norm = initial;
    let mut warm: Option<Vec<f64>> = None;
    let mut status = SolverStatus::Budget;
    for _ in 0..cfg.max_iters {
        let gn = norm(&g);
        if gn == 0.0 {
            status = SolverStatus::Converged;
            break;
        }
        let kappa_h = cfg.kappa_h.or_else(|| oracle.norm_bound());
        let request = HessianRequest {
            tau: kappa_h.map_or(cfg.tau0_value(), |kh| {
                tau_rule(cfg.tau0_value(), cfg.kappa_m, kh, rho, gn).tau
            }),
            delta: delta_iter,
            anchor_grad_norm: gn,
            leading_grad_norm: leading_norm,
        };
        let sample = oracle.hessian(&anchor, &request)?;
        let sp = CubicSubproblem::new(g.clone(), sample.matrix, rho, m, n)?;
        let kappa_h = kappa_h.unwrap_or(sp.ell());
        let tau = match mode {
            Mode::Exact => None,
            Mode::Inexact => Some(tau_rule(cfg.tau0_value(), cfg.kappa_m, kappa_h, rho, gn).tau),
        };
        let target = match mode {
            Mode::Exact => SolveTarget::Exact,
            Mode::Inexact => SolveTarget::Condition2 {
                kappa_m: cfg.kappa_m,
                grad_norm_ref: gn,
            },
        };
        let mut options = cfg.subproblem.clone();
        if cfg.warm_start {
            options.warm_start = warm.clone();
        }
        let sol = solve_cubic_subproblem(&sp, target, &options);
        let condition1_residual = cfg.check_condition1.then(|| {
            let mut diff = sp.h().clone();
            diff.add_scaled(-1.0, &problem.hessian(&anchor)).expect("same shape");
            norm(&diff.matvec(&sol.dz))
        });
        records.push(SubproblemRecord {
            status: sol.status,
            model_grad_norm: sol.model_grad_norm,
            threshold: target.threshold(&sp, &sol.dz),
            anchor_grad_norm: gn,
            gmp_iters: sol.gmp_iters,
            ssn_iters: sol.ssn_iters,
            tau,
            kappa_h: Some(kappa_h),
            condition1_residual,
        });
        let usable = match (sol.status, &mode) {
            (SubproblemStatus::BudgetExhausted, Mode::Exact) => sol.model_grad_norm <= 1e-8 * (1.0 + gn),
            (SubproblemStatus::BudgetExhausted, Mode::Inexact) => false,
            _ => true,
        };
        let step = norm(&sol.dz);
        if !usable || step == 0.0 {
            status = SolverStatus::Aborted(format!(
                "subproblem at iteration {} stopped with model gradient {:.3e} (status {:?})",
                recorder.len() + 1,
                sol.model_grad_norm,
                sol.status
            ));
            break;
        }
        let leading: Vec<f64> = anchor.iter().zip(&sol.dz).map(|(a, d)| a + d).collect();
        let lambda = select_lambda(step, rho, window)?;
        let f_lead = operator_at(problem, &leading);
        leading_norm = norm(&f_lead);
        for (a, f) in anchor.iter_mut().zip(&f_lead) {
            *a -= lambda * f;
        }
        recorder.push(
            leading,
            RowData {
                lambda,
                step_norm: step,
                grad_norm: leading_norm,
                anchor: anchor.clone(),
                samples: sample.samples,
                subproblem_iters: sol.total_iters(),
                epochs: 2.0 + sample.data_passes,
            },
        )?;
        warm = Some(sol.dz);
        if leading_norm <= stop_tol {
            status = SolverStatus::Converged;
            break;
        }
        g = problem.gradient(&anchor);
    }
    recorder.finish(algorithm, anchor, status, initial, records, cfg.hypotheses_hold())
}

/// Newton extragradient with exact Hessians and tightly solved subproblems.
pub fn newton_minmax(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    cfg: &SolverConfig,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    let mut oracle = ExactHessian::new(problem);
    newton_core(problem, z0, cfg, &mut oracle, Mode::Exact, Algorithm::Newton, tracking)
}

/// Newton extragradient with an arbitrary Hessian source and inexact subproblem solves.
pub fn inexact_newton_minmax(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    cfg: &SolverConfig,
    oracle: &mut dyn HessianOracle,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    newton_core(problem, z0, cfg, oracle, Mode::Inexact, Algorithm::InexactNewton, tracking)
}

/// Inexact Newton extragradient with subsampled Hessians drawn from the run seed.
pub fn subsampled_newton_minmax(
    fs: &dyn FiniteSum,
    z0: &JointPoint,
    cfg: &SolverConfig,
    settings: SubsampledSettings,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    if fs.num_components() == 0 {
        return Err(Error::Empty("finite sum without components"));
    }
    let rng = stream(cfg.seed, streams::HESSIAN_SAMPLING);
    let mut oracle = SubsampledHessianOracle::new(fs, settings, rng);
    newton_core(fs, z0, cfg, &mut oracle, Mode::Inexact, Algorithm::SubsampledNewton, tracking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_cubic_bilinear, make_glm_sum, GlmSumOptions, QuadraticProblem};
    use crate::saddle::{average_iterates, restricted_gap};

    fn toy() -> QuadraticProblem {
        QuadraticProblem::new(
            DenseMatrix::identity(1),
            DenseMatrix::zeros(1, 1),
            DenseMatrix::identity(1),
            vec![0.0],
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn start_at_saddle_stops_immediately() {
        let p = toy();
        let z0 = JointPoint::zeros(1, 1).unwrap();
        let r = newton_minmax(&p, &z0, &SolverConfig::new(0.1, 10), None).unwrap();
        assert_eq!(r.status, SolverStatus::StoppedAtSaddle);
        assert!(r.trace.is_empty());
        let mut oracle = ExactHessian::new(&p);
        let r = inexact_newton_minmax(&p, &z0, &SolverConfig::new(0.1, 10), &mut oracle, None).unwrap();
        assert_eq!(r.status, SolverStatus::StoppedAtSaddle);
    }

    #[test]
    fn quadratic_toy_respects_bounds() {
        let p = toy();
        let z0 = JointPoint::from_blocks(&[1.0], &[1.0]).unwrap();
        let zs = JointPoint::zeros(1, 1).unwrap();
        let r0 = z0.distance(&zs);
        let cfg = SolverConfig::new(0.1, 50);
        let tracking = GapTracking::with_radius_factor(zs.clone(), &z0, 7.0).unwrap();
        let r = newton_minmax(&p, &z0, &cfg, Some(&tracking)).unwrap();
        assert!(!r.is_aborted(), "{:?} {:?}", r.status, r.trace.last());
        for (t, row) in r.trace.iter().enumerate() {
            let bound = 960.0 * 3f64.sqrt() * 0.1 * r0.powi(3) / ((t + 1) as f64).powf(1.5);
            assert!(row.gap.unwrap() <= bound + 1e-8);
            assert!(LambdaWindow::EXACT.contains(row.lambda, 0.1, row.step_norm));
        }
        for z in &r.iterates {
            assert!(z.distance(&zs) <= 7.0 * r0 + 1e-12);
        }
    }

    #[test]
    fn averaged_point_matches_average_iterates() {
        let inst = make_cubic_bilinear(6, 1.0 / 120.0, 2).unwrap();
        let z0 = JointPoint::zeros(6, 6).unwrap();
        let r = newton_minmax(&inst, &z0, &SolverConfig::new(inst.rho(), 8), None).unwrap();
        let avg = average_iterates(&r.iterates, &r.lambdas()).unwrap();
        assert_eq!(avg, r.averaged);
    }

    #[test]
    fn inexact_with_tiny_kappa_tracks_exact() {
        let p = toy();
        let z0 = JointPoint::from_blocks(&[1.0], &[1.0]).unwrap();
        let mut cfg = SolverConfig::new(0.1, 20);
        cfg.window = Some(LambdaWindow::EXACT);
        let exact = newton_minmax(&p, &z0, &cfg, None).unwrap();
        cfg.kappa_m = 1e-9;
        let mut oracle = ExactHessian::new(&p);
        let inexact = inexact_newton_minmax(&p, &z0, &cfg, &mut oracle, None).unwrap();
        for (a, b) in exact.iterates.iter().zip(&inexact.iterates) {
            assert!(a.distance(b) < 1e-6);
        }
    }

    #[test]
    fn inexact_run_certifies_condition2() {
        let inst = make_cubic_bilinear(10, 1.0 / 200.0, 5).unwrap();
        let z0 = JointPoint::zeros(10, 10).unwrap();
        let mut oracle = ExactHessian::new(&inst);
        let r = inexact_newton_minmax(&inst, &z0, &SolverConfig::new(inst.rho(), 30), &mut oracle, None).unwrap();
        assert!(!r.is_aborted(), "{:?}", r.status);
        for rec in &r.subproblems {
            assert_eq!(rec.status, SubproblemStatus::Condition2);
            assert!(rec.model_grad_norm <= rec.threshold);
        }
        for row in &r.trace {
            assert!(LambdaWindow::INEXACT.contains(row.lambda, inst.rho(), row.step_norm));
        }
    }

    #[test]
    fn full_sampling_reproduces_exact_source() {
        let fs = make_glm_sum(40, 3, 2, GlmSumOptions::default(), 6).unwrap();
        let z0 = JointPoint::from_blocks(&[1.0, -1.0, 0.5], &[0.3, 0.2]).unwrap();
        let cfg = SolverConfig::new(fs.hessian_lipschitz(), 15);
        let settings = SubsampledSettings {
            scheme: SamplingScheme::Uniform,
            rule: SampleSizeRule::Fixed(40),
            with_replacement: true,
        };
        let sub = subsampled_newton_minmax(&fs, &z0, &cfg, settings, None).unwrap();
        let mut oracle = ExactHessian::finite_sum(&fs);
        let mut cfg2 = cfg.clone();
        cfg2.kappa_h = Some(bound_summary(&fs.component_hessian_bounds()).0);
        let exact = inexact_newton_minmax(&fs, &z0, &cfg2, &mut oracle, None).unwrap();
        assert_eq!(sub.trace, exact.trace);
    }

    #[test]
    fn subsampled_run_converges_on_glm_sum() {
        let fs = make_glm_sum(200, 4, 3, GlmSumOptions::default(), 7).unwrap();
        let z0 = JointPoint::zeros(4, 3).unwrap();
        let mut cfg = SolverConfig::new(fs.hessian_lipschitz(), 60);
        cfg.seed = 3;
        let settings = SubsampledSettings {
            scheme: SamplingScheme::Uniform,
            rule: SampleSizeRule::Empirical,
            with_replacement: true,
        };
        let r = subsampled_newton_minmax(&fs, &z0, &cfg, settings, None).unwrap();
        assert!(!r.is_aborted(), "{:?}", r.status);
        assert!(r.final_grad_norm() < 1e-6, "{}", r.final_grad_norm());
        let star = fs.reference_saddle(1e-12).unwrap();
        let gap = restricted_gap(&fs, &r.averaged, &star, &crate::saddle::GapConfig::new(1.0)).unwrap();
        assert!(gap.value < 1e-3);
    }
}
