use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{distance, norm};
use crate::problems::FiniteSum;
use crate::rng::{stream, streams, Rng};
use crate::saddle::{operator_at, JointPoint, SaddleProblem};
use crate::sampling::SamplingPlan;

use super::{check_start, Algorithm, GapTracking, Recorder, RowData, SolverResult, SolverStatus};

/// Step size per iteration `k` (zero based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum StepRule {
    Constant(f64),
    /// `c/√(k+1)`
    Decaying(f64),
}

impl StepRule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            StepRule::Constant(c) => c,
            StepRule::Decaying(c) => c / ((k + 1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let c = match *self {
            StepRule::Constant(c) | StepRule::Decaying(c) => c,
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {c}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticSettings {
    pub batch_size: usize,
    pub rule: StepRule,
    pub seed: u64,
}

impl StochasticSettings {
    pub fn new(batch_size: usize, rule: StepRule, seed: u64) -> Self {
        Self { batch_size, rule, seed }
    }
}

type Oracle<'a> = dyn FnMut(&[f64]) -> Vec<f64> + 'a;

fn sign_flip(problem: &dyn SaddleProblem, mut g: Vec<f64>) -> Vec<f64> {
    let (m, _) = problem.dims();
    for v in &mut g[m..] {
        *v = -*v;
    }
    g
}

#[allow(clippy::too_many_arguments)]
fn extragradient_core(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    rule: StepRule,
    max_iters: usize,
    oracle: &mut Oracle<'_>,
    passes_per_call: f64,
    samples: usize,
    algorithm: Algorithm,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    rule.validate()?;
    check_start(problem, z0)?;
    let mut recorder = Recorder::new(problem, z0, tracking);
    let mut anchor = z0.coords().to_vec();
    let initial = norm(&operator_at(problem, &anchor));
    if initial == 0.0 {
        return recorder.finish(algorithm, anchor, SolverStatus::StoppedAtSaddle, 0.0, Vec::new(), true);
    }
    let mut status = SolverStatus::Budget;
    for k in 0..max_iters {
        let lambda = rule.at(k);
        let f_anchor = oracle(&anchor);
        let half: Vec<f64> = anchor.iter().zip(&f_anchor).map(|(a, f)| a - lambda * f).collect();
        let f_half = oracle(&half);
        for (a, f) in anchor.iter_mut().zip(&f_half) {
            *a -= lambda * f;
        }
        let grad_norm = norm(&operator_at(problem, &half));
        if !grad_norm.is_finite() {
            status = SolverStatus::Aborted(format!("iterate diverged at iteration {}", k + 1));
            break;
        }
        let step_norm = lambda * norm(&f_anchor);
        recorder.push(
            half,
            RowData {
                lambda,
                step_norm,
                grad_norm,
                anchor: anchor.clone(),
                samples,
                subproblem_iters: 0,
                epochs: 2.0 * passes_per_call,
            },
        )?;
        if grad_norm == 0.0 {
            status = SolverStatus::Converged;
            break;
        }
    }
    recorder.finish(algorithm, anchor, status, initial, Vec::new(), true)
}

#[allow(clippy::too_many_arguments)]
fn optimistic_core(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    rule: StepRule,
    max_iters: usize,
    oracle: &mut Oracle<'_>,
    passes_per_call: f64,
    samples: usize,
    algorithm: Algorithm,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    rule.validate()?;
    check_start(problem, z0)?;
    let mut recorder = Recorder::new(problem, z0, tracking);
    let mut z = z0.coords().to_vec();
    let initial = norm(&operator_at(problem, &z));
    if initial == 0.0 {
        return recorder.finish(algorithm, z, SolverStatus::StoppedAtSaddle, 0.0, Vec::new(), true);
    }
    let mut status = SolverStatus::Budget;
    let mut previous: Option<(f64, Vec<f64>)> = None;
    for k in 0..max_iters {
        let lambda = rule.at(k);
        let f_now = oracle(&z);
        let (lambda_prev, f_prev) = previous.take().unwrap_or((lambda, f_now.clone()));
        let next: Vec<f64> = z
            .iter()
            .zip(f_now.iter().zip(&f_prev))
            .map(|(zi, (fc, fp))| zi - 2.0 * lambda * fc + lambda_prev * fp)
            .collect();
        let step_norm = distance(&next, &z);
        let grad_norm = norm(&operator_at(problem, &next));
        if !grad_norm.is_finite() {
            status = SolverStatus::Aborted(format!("iterate diverged at iteration {}", k + 1));
            break;
        }
        previous = Some((lambda, f_now));
        z = next;
        recorder.push(
            z.clone(),
            RowData {
                lambda,
                step_norm,
                grad_norm,
                anchor: z.clone(),
                samples,
                subproblem_iters: 0,
                epochs: passes_per_call,
            },
        )?;
        if grad_norm == 0.0 {
            status = SolverStatus::Converged;
            break;
        }
    }
    recorder.finish(algorithm, z, status, initial, Vec::new(), true)
}

/// Deterministic extragradient.
pub fn eg_solve(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    rule: StepRule,
    max_iters: usize,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    let mut oracle = |z: &[f64]| operator_at(problem, z);
    extragradient_core(problem, z0, rule, max_iters, &mut oracle, 1.0, 0, Algorithm::Eg, tracking)
}

/// Deterministic optimistic gradient descent ascent.
pub fn ogda_solve(
    problem: &dyn SaddleProblem,
    z0: &JointPoint,
    rule: StepRule,
    max_iters: usize,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    let mut oracle = |z: &[f64]| operator_at(problem, z);
    optimistic_core(problem, z0, rule, max_iters, &mut oracle, 1.0, 0, Algorithm::Ogda, tracking)
}

fn minibatch_oracle<'a>(fs: &'a dyn FiniteSum, settings: &StochasticSettings) -> Result<(impl FnMut(&[f64]) -> Vec<f64> + 'a, f64)> {
    let total = fs.num_components();
    if total == 0 {
        return Err(Error::Empty("finite sum without components"));
    }
    if settings.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let plan = if settings.batch_size >= total {
        SamplingPlan::full(total)?
    } else {
        SamplingPlan::uniform(total, settings.batch_size)?
    };
    let mut rng: Rng = stream(settings.seed, streams::GRADIENT_SAMPLING);
    let fraction = plan.sample_size as f64 / total as f64;
    let oracle = move |z: &[f64]| {
        let indices = plan.draw(&mut rng);
        sign_flip(fs, fs.minibatch_gradient(&indices, z))
    };
    Ok((oracle, fraction))
}

/// Stochastic extragradient with a fresh uniform minibatch at each of the two oracle calls.
pub fn seg_solve(
    fs: &dyn FiniteSum,
    z0: &JointPoint,
    settings: &StochasticSettings,
    max_iters: usize,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    let (mut oracle, fraction) = minibatch_oracle(fs, settings)?;
    let batch = settings.batch_size.min(fs.num_components());
    extragradient_core(fs, z0, settings.rule, max_iters, &mut oracle, fraction, batch, Algorithm::Seg, tracking)
}

/// Stochastic optimistic gradient descent ascent with one minibatch per iteration.
pub fn sogda_solve(
    fs: &dyn FiniteSum,
    z0: &JointPoint,
    settings: &StochasticSettings,
    max_iters: usize,
    tracking: Option<&GapTracking>,
) -> Result<SolverResult> {
    let (mut oracle, fraction) = minibatch_oracle(fs, settings)?;
    let batch = settings.batch_size.min(fs.num_components());
    optimistic_core(fs, z0, settings.rule, max_iters, &mut oracle, fraction, batch, Algorithm::Sogda, tracking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DenseMatrix;
    use crate::problems::{make_glm_sum, GlmSumOptions, QuadraticProblem};

    fn bilinear() -> QuadraticProblem {
        QuadraticProblem::new(
            DenseMatrix::zeros(1, 1),
            DenseMatrix::identity(1),
            DenseMatrix::zeros(1, 1),
            vec![0.0],
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn eg_contracts_on_bilinear() {
        let p = bilinear();
        let z0 = JointPoint::from_blocks(&[1.0], &[1.0]).unwrap();
        let r = eg_solve(&p, &z0, StepRule::Constant(0.5), 200, None).unwrap();
        assert!(r.anchor.coords().iter().all(|v| v.abs() < 1e-6));
        assert_eq!(r.epochs.last().copied(), Some(400.0));
    }

    #[test]
    fn ogda_contracts_on_bilinear() {
        let p = bilinear();
        let z0 = JointPoint::from_blocks(&[1.0], &[1.0]).unwrap();
        let r = ogda_solve(&p, &z0, StepRule::Constant(0.25), 1000, None).unwrap();
        assert!(r.final_grad_norm() < 1e-6, "{}", r.final_grad_norm());
    }

    #[test]
    fn gda_style_first_step_of_ogda() {
        let p = bilinear();
        let z0 = JointPoint::from_blocks(&[1.0], &[0.0]).unwrap();
        let r = ogda_solve(&p, &z0, StepRule::Constant(0.1), 1, None).unwrap();
        // F(z0) = (y, -x) = (0, -1); first step is z0 - λF(z0).
        assert!((r.last.x()[0] - 1.0).abs() < 1e-15);
        assert!((r.last.y()[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn decaying_rule() {
        assert_eq!(StepRule::Decaying(2.0).at(3), 1.0);
        assert_eq!(StepRule::Constant(2.0).at(3), 2.0);
        assert!(StepRule::Constant(-1.0).validate().is_err());
    }

    #[test]
    fn full_batch_seg_matches_eg() {
        let fs = make_glm_sum(30, 3, 2, GlmSumOptions::default(), 1).unwrap();
        let z0 = JointPoint::from_blocks(&[0.5, 0.5, 0.5], &[0.5, -0.5]).unwrap();
        let rule = StepRule::Constant(0.05);
        let eg = eg_solve(&fs, &z0, rule, 20, None).unwrap();
        let seg = seg_solve(&fs, &z0, &StochasticSettings::new(30, rule, 0), 20, None).unwrap();
        assert!(eg.anchor.distance(&seg.anchor) < 1e-10);
        assert_eq!(seg.epochs.last().copied(), Some(40.0));
    }

    #[test]
    fn stochastic_runs_are_seeded() {
        let fs = make_glm_sum(50, 3, 2, GlmSumOptions::default(), 2).unwrap();
        let z0 = JointPoint::zeros(3, 2).unwrap();
        let s = StochasticSettings::new(5, StepRule::Decaying(0.1), 9);
        let a = sogda_solve(&fs, &z0, &s, 30, None).unwrap();
        let b = sogda_solve(&fs, &z0, &s, 30, None).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!((a.epochs[29] - 3.0).abs() < 1e-12);
        let c = sogda_solve(&fs, &z0, &StochasticSettings::new(5, StepRule::Decaying(0.1), 10), 30, None).unwrap();
        assert_ne!(a.trace, c.trace);
    }
}
