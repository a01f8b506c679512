//! Subsampled Hessians for finite sums: sampling plans, the uniform and
//! nonuniform sample-size thresholds, and the forcing rule for `τ`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::problems::FiniteSum;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    Uniform,
    Nonuniform,
}

/// How component indices are drawn for one subsampled Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub scheme: SamplingScheme,
    pub probs: Vec<f64>,
    pub sample_size: usize,
    pub with_replacement: bool,
}

impl SamplingPlan {
    pub fn uniform(components: usize, sample_size: usize) -> Result<Self> {
        if components == 0 || sample_size == 0 {
            return Err(Error::InvalidArgument(format!(
                "uniform plan needs components >= 1 and sample_size >= 1 (got {components}, {sample_size})"
            )));
        }
        Ok(Self {
            scheme: SamplingScheme::Uniform,
            probs: vec![1.0 / components as f64; components],
            sample_size,
            with_replacement: true,
        })
    }

    /// Every index exactly once, which reproduces the full Hessian.
    pub fn full(components: usize) -> Result<Self> {
        Ok(Self {
            with_replacement: false,
            ..Self::uniform(components, components)?
        })
    }

    pub fn nonuniform(probs: Vec<f64>, sample_size: usize) -> Result<Self> {
        if probs.is_empty() || sample_size == 0 {
            return Err(Error::InvalidArgument("nonuniform plan needs probabilities and a positive size".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            scheme: SamplingScheme::Nonuniform,
            probs,
            sample_size,
            with_replacement: true,
        })
    }

    /// Switches a uniform plan to sampling without replacement.
    pub fn without_replacement(mut self) -> Result<Self> {
        if self.scheme != SamplingScheme::Uniform || self.sample_size > self.probs.len() {
            return Err(Error::InvalidArgument(
                "sampling without replacement needs a uniform plan with sample_size <= N".into(),
            ));
        }
        self.with_replacement = false;
        Ok(self)
    }

    pub fn components(&self) -> usize {
        self.probs.len()
    }

    /// Uniform, without replacement, every index drawn.
    pub fn is_full(&self) -> bool {
        self.scheme == SamplingScheme::Uniform && !self.with_replacement && self.sample_size == self.probs.len()
    }

    pub fn draw(&self, rng: &mut Rng) -> Vec<usize> {
        let n = self.probs.len();
        if self.is_full() {
            return (0..n).collect();
        }
        match (self.scheme, self.with_replacement) {
            (SamplingScheme::Uniform, true) => (0..self.sample_size).map(|_| rng.gen_range(0..n)).collect(),
            (SamplingScheme::Uniform, false) => rand::seq::index::sample(rng, n, self.sample_size).into_vec(),
            (SamplingScheme::Nonuniform, _) => {
                let dist = WeightedIndex::new(&self.probs).expect("validated probabilities");
                (0..self.sample_size).map(|_| dist.sample(rng)).collect()
            }
        }
    }
}

/// A subsampled Hessian together with the indices that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHessian {
    pub matrix: DenseMatrix,
    pub indices: Vec<usize>,
}

/// `(1/(N|S|)) Σ_{i∈S} (1/p_i)∇²f_i(z) + ∇²d(z)` for given indices.
pub fn hessian_from_sample(fs: &dyn FiniteSum, z: &[f64], plan: &SamplingPlan, indices: &[usize]) -> DenseMatrix {
    let mut h = if plan.is_full() {
        fs.sum_hessian(z)
    } else {
        let d = fs.dim();
        let mut h = DenseMatrix::zeros(d, d);
        let scale = (fs.num_components() * indices.len()) as f64;
        for &i in indices {
            fs.add_component_hessian(i, z, 1.0 / (scale * plan.probs[i]), &mut h);
        }
        h
    };
    fs.add_deterministic_hessian(z, &mut h);
    h.symmetrize();
    h
}

pub fn subsampled_hessian(fs: &dyn FiniteSum, z: &[f64], plan: &SamplingPlan, rng: &mut Rng) -> SampledHessian {
    let indices = plan.draw(rng);
    SampledHessian {
        matrix: hessian_from_sample(fs, z, plan, &indices),
        indices,
    }
}

/// Sampling distribution proportional to per-component curvature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NonuniformProbs {
    pub probs: Vec<f64>,
    /// Set when every weight was zero and the uniform distribution was used.
    pub uniform_fallback: bool,
}

/// `p_i ∝ ‖f_i″(a_iᵀx, b_iᵀy)‖(‖a_i‖² + ‖b_i‖²)` for generalized-linear sums,
/// `p_i ∝ B_i` otherwise.
pub fn nonuniform_probs(fs: &dyn FiniteSum, z: &[f64]) -> NonuniformProbs {
    let n = fs.num_components();
    let weights: Vec<f64> = match fs.glm_term(0, z) {
        Some(_) => (0..n)
            .map(|i| fs.glm_term(i, z).map_or(0.0, |t| t.weight()))
            .collect(),
        None => fs.component_hessian_bounds(),
    };
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return NonuniformProbs {
            probs: vec![1.0 / n as f64; n],
            uniform_fallback: true,
        };
    }
    NonuniformProbs {
        probs: weights.iter().map(|w| w / total).collect(),
        uniform_fallback: false,
    }
}

fn check_size_args(bound: f64, tau: f64, delta: f64, m: usize, n: usize) -> Result<()> {
    if !(bound > 0.0) || !(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 1.0) || m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "sample size needs B > 0, tau and delta in (0,1), m,n >= 1 (B={bound}, tau={tau}, delta={delta})"
        )));
    }
    Ok(())
}

fn to_count(value: f64) -> usize {
    value.ceil().clamp(1.0, usize::MAX as f64) as usize
}

/// `(16·B_max²/τ²)·log(2(m+n)/δ)` before rounding up.
pub fn uniform_sample_bound(b_max: f64, tau: f64, delta: f64, m: usize, n: usize) -> Result<f64> {
    check_size_args(b_max, tau, delta, m, n)?;
    Ok(16.0 * b_max * b_max / (tau * tau) * (2.0 * (m + n) as f64 / delta).ln())
}

pub fn uniform_sample_size(b_max: f64, tau: f64, delta: f64, m: usize, n: usize) -> Result<usize> {
    uniform_sample_bound(b_max, tau, delta, m, n).map(to_count)
}

/// `(4·B_avg²/τ²)·log(2(m+n)/δ)` before rounding up.
pub fn nonuniform_sample_bound(b_avg: f64, tau: f64, delta: f64, m: usize, n: usize) -> Result<f64> {
    check_size_args(b_avg, tau, delta, m, n)?;
    Ok(4.0 * b_avg * b_avg / (tau * tau) * (2.0 * (m + n) as f64 / delta).ln())
}

pub fn nonuniform_sample_size(b_avg: f64, tau: f64, delta: f64, m: usize, n: usize) -> Result<usize> {
    nonuniform_sample_bound(b_avg, tau, delta, m, n).map(to_count)
}

/// `⌈5·log(d+3) / min{‖∇f(ẑ)‖², ‖∇f(z)‖²}⌉`, clamped to `[1, N]`.
pub fn empirical_sample_size(feature_dim: usize, grad_norms: &[f64], components: usize) -> usize {
    let smallest = grad_norms.iter().fold(f64::INFINITY, |a, g| a.min(g * g));
    let raw = 5.0 * ((feature_dim + 3) as f64).ln() / smallest;
    if raw.is_nan() {
        return components.max(1);
    }
    (raw.ceil().min(components as f64) as usize).max(1)
}

/// `(B_max, B_avg)` of a list of component bounds.
pub fn bound_summary(bounds: &[f64]) -> (f64, f64) {
    let max = bounds.iter().fold(0.0_f64, |a, b| a.max(*b));
    let avg = bounds.iter().sum::<f64>() / bounds.len().max(1) as f64;
    (max, avg)
}

/// Outcome of the `τ` forcing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauValue {
    pub tau: f64,
    /// The gradient was zero, so the cap `τ0` was returned.
    pub at_saddle: bool,
}

/// `min{τ0, ρ(1−κ_m)‖∇f‖ / (4(κ_H + 6ρ))}`
pub fn tau_rule(tau0: f64, kappa_m: f64, kappa_h: f64, rho: f64, grad_norm: f64) -> TauValue {
    if grad_norm == 0.0 {
        return TauValue {
            tau: tau0,
            at_saddle: true,
        };
    }
    TauValue {
        tau: tau0.min(rho * (1.0 - kappa_m) * grad_norm / (4.0 * (kappa_h + 6.0 * rho))),
        at_saddle: false,
    }
}

/// `1 − (1−δ)^{1/T}`, so that `T` independent successes have probability `1 − δ`.
pub fn per_iteration_delta(delta_total: f64, iterations: usize) -> Result<f64> {
    if !(delta_total > 0.0 && delta_total < 1.0) || iterations == 0 {
        return Err(Error::InvalidArgument(format!(
            "need delta in (0,1) and T >= 1 (delta={delta_total}, T={iterations})"
        )));
    }
    Ok(-((-delta_total).ln_1p() / iterations as f64).exp_m1())
}
