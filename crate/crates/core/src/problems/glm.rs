use rand::Rng as _;

use crate::error::{Error, Result};
use crate::numerics::{direct_solve, dot, norm, DenseMatrix};
use crate::rng::{stream, streams};
use crate::saddle::{JointPoint, SaddleProblem};

use super::{FiniteSum, GlmTerm};

/// Largest `|σ''|` of the logistic function `σ`.
const LOGISTIC_SECOND_DERIVATIVE_MAX: f64 = 0.096_225_044_864_937_63;

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Largest absolute eigenvalue of `[[p, q], [q, r]]`.
fn sym2_norm(p: f64, q: f64, r: f64) -> f64 {
    0.5 * (p + r).abs() + (0.25 * (p - r) * (p - r) + q * q).sqrt()
}

/// One component `φ(s, t)` evaluated at `s = aᵀx`, `t = bᵀy`:
/// `w·softplus(s) + ½κ s² + c·s·t − ½γ t² + ℓ_x s + ℓ_y t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmComponent {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub softplus_weight: f64,
    pub convex_curvature: f64,
    pub coupling: f64,
    pub concave_curvature: f64,
    pub linear_x: f64,
    pub linear_y: f64,
}

impl GlmComponent {
    fn value(&self, s: f64, t: f64) -> f64 {
        self.softplus_weight * softplus(s) + 0.5 * self.convex_curvature * s * s + self.coupling * s * t
            - 0.5 * self.concave_curvature * t * t
            + self.linear_x * s
            + self.linear_y * t
    }

    fn first(&self, s: f64, t: f64) -> (f64, f64) {
        (
            self.softplus_weight * logistic(s) + self.convex_curvature * s + self.coupling * t + self.linear_x,
            self.coupling * s - self.concave_curvature * t + self.linear_y,
        )
    }

    /// Entries `(φ_ss, φ_st, φ_tt)`.
    fn second(&self, s: f64) -> (f64, f64, f64) {
        let sg = logistic(s);
        (
            self.softplus_weight * sg * (1.0 - sg) + self.convex_curvature,
            self.coupling,
            -self.concave_curvature,
        )
    }

    fn hessian_bound(&self) -> f64 {
        let lo = self.convex_curvature;
        let hi = self.convex_curvature + 0.25 * self.softplus_weight;
        let q = self.coupling;
        let r = -self.concave_curvature;
        let curv = sym2_norm(lo, q, r).max(sym2_norm(hi, q, r));
        curv * (dot(&self.a, &self.a) + dot(&self.b, &self.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmSumOptions {
    /// Weight `μ` of the deterministic `(μ/2)‖x‖² − (μ/2)‖y‖²`.
    pub ridge: f64,
    /// Upper end of the softplus weights; 0 gives a quadratic finite sum.
    pub softplus_scale: f64,
    /// Row norms are spread as `exp(spread·u)`, `u ~ U[−1, 1]`, making `B_i` heterogeneous.
    pub norm_spread: f64,
}

impl Default for GlmSumOptions {
    fn default() -> Self {
        Self {
            ridge: 0.1,
            softplus_scale: 1.0,
            norm_spread: 0.0,
        }
    }
}

/// `f(x, y) = (1/N) Σ φ_i(a_iᵀx, b_iᵀy) + (μ/2)‖x‖² − (μ/2)‖y‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmSum {
    m: usize,
    n: usize,
    ridge: f64,
    components: Vec<GlmComponent>,
}

pub fn make_glm_sum(
    count: usize,
    m: usize,
    n: usize,
    opts: GlmSumOptions,
    seed: u64,
) -> Result<GlmSum> {
    if count == 0 || m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "generalized-linear sum needs N, m, n >= 1 (N={count}, m={m}, n={n})"
        )));
    }
    if !(opts.ridge >= 0.0) || !(opts.softplus_scale >= 0.0) || !(opts.norm_spread >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad options {opts:?}")));
    }
    let mut rng = stream(seed, streams::PROBLEM_DATA);
    let components = (0..count)
        .map(|_| {
            let scale = (opts.norm_spread * rng.gen_range(-1.0..=1.0)).exp();
            let a = (0..m).map(|_| scale * rng.gen_range(-1.0..=1.0) / (m as f64).sqrt()).collect();
            let b = (0..n).map(|_| scale * rng.gen_range(-1.0..=1.0) / (n as f64).sqrt()).collect();
            GlmComponent {
                a,
                b,
                softplus_weight: opts.softplus_scale * rng.gen_range(0.0..=1.0),
                convex_curvature: rng.gen_range(0.0..=0.5),
                coupling: rng.gen_range(-1.0..=1.0),
                concave_curvature: rng.gen_range(0.0..=0.5),
                linear_x: rng.gen_range(-1.0..=1.0),
                linear_y: rng.gen_range(-1.0..=1.0),
            }
        })
        .collect();
    GlmSum::new(m, n, opts.ridge, components)
}

impl GlmSum {
    pub fn new(m: usize, n: usize, ridge: f64, components: Vec<GlmComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("generalized-linear components"));
        }
        for c in &components {
            crate::error::check_dim(m, c.a.len(), "component a_i")?;
            crate::error::check_dim(n, c.b.len(), "component b_i")?;
            if c.softplus_weight < 0.0 || c.convex_curvature < 0.0 || c.concave_curvature < 0.0 {
                return Err(Error::InvalidArgument(
                    "component curvatures must be nonnegative for convex-concavity".into(),
                ));
            }
        }
        Ok(Self {
            m,
            n,
            ridge,
            components,
        })
    }

    pub fn components(&self) -> &[GlmComponent] {
        &self.components
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// A valid Hessian-Lipschitz constant: `(1/N) Σ w_i·max|σ''|·‖a_i‖³`.
    pub fn hessian_lipschitz(&self) -> f64 {
        let n = self.components.len() as f64;
        self.components
            .iter()
            .map(|c| c.softplus_weight * LOGISTIC_SECOND_DERIVATIVE_MAX * norm(&c.a).powi(3))
            .sum::<f64>()
            / n
    }

    fn args(&self, c: &GlmComponent, z: &[f64]) -> (f64, f64) {
        (dot(&c.a, &z[..self.m]), dot(&c.b, &z[self.m..]))
    }

    /// The saddle point by damped Newton iterations on `∇f = 0`.
    pub fn reference_saddle(&self, tol: f64) -> Result<JointPoint> {
        let d = self.m + self.n;
        let mut z = vec![0.0; d];
        let mut g = self.gradient(&z);
        for _ in 0..200 {
            let gn = norm(&g);
            if gn <= tol {
                return JointPoint::new(self.m, self.n, z);
            }
            let step = direct_solve(&self.hessian(&z), &g)?;
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                let tg = self.gradient(&trial);
                if norm(&tg) < (1.0 - 1e-4 * t) * gn || t < 1e-10 {
                    z = trial;
                    g = tg;
                    break;
                }
                t *= 0.5;
            }
        }
        Err(Error::SolverAborted(format!(
            "reference saddle did not reach ‖∇f‖ ≤ {tol:e}"
        )))
    }
}

impl SaddleProblem for GlmSum {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn value(&self, z: &[f64]) -> f64 {
        let n = self.components.len() as f64;
        let sum: f64 = self
            .components
            .iter()
            .map(|c| {
                let (s, t) = self.args(c, z);
                c.value(s, t)
            })
            .sum();
        let (x, y) = z.split_at(self.m);
        sum / n + 0.5 * self.ridge * (dot(x, x) - dot(y, y))
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.components.len()).collect();
        self.minibatch_gradient(&all, z)
    }

    fn hessian(&self, z: &[f64]) -> DenseMatrix {
        let mut h = self.sum_hessian(z);
        self.add_deterministic_hessian(z, &mut h);
        h
    }
}

impl FiniteSum for GlmSum {
    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn component_gradient(&self, i: usize, z: &[f64]) -> Vec<f64> {
        let c = &self.components[i];
        let (s, t) = self.args(c, z);
        let (ds, dt) = c.first(s, t);
        c.a.iter().map(|v| ds * v).chain(c.b.iter().map(|v| dt * v)).collect()
    }

    fn add_component_hessian(&self, i: usize, z: &[f64], weight: f64, out: &mut DenseMatrix) {
        let c = &self.components[i];
        let (s, _) = self.args(c, z);
        let (pss, pst, ptt) = c.second(s);
        let m = self.m;
        for (r, ar) in c.a.iter().enumerate() {
            for (k, ak) in c.a.iter().enumerate() {
                out[(r, k)] += weight * pss * ar * ak;
            }
            for (k, bk) in c.b.iter().enumerate() {
                out[(r, m + k)] += weight * pst * ar * bk;
                out[(m + k, r)] += weight * pst * ar * bk;
            }
        }
        for (r, br) in c.b.iter().enumerate() {
            for (k, bk) in c.b.iter().enumerate() {
                out[(m + r, m + k)] += weight * ptt * br * bk;
            }
        }
    }

    fn deterministic_gradient(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(i, v)| if i < self.m { self.ridge * v } else { -self.ridge * v })
            .collect()
    }

    fn add_deterministic_hessian(&self, _z: &[f64], out: &mut DenseMatrix) {
        for i in 0..self.m + self.n {
            out[(i, i)] += if i < self.m { self.ridge } else { -self.ridge };
        }
    }

    fn component_hessian_bounds(&self) -> Vec<f64> {
        self.components.iter().map(GlmComponent::hessian_bound).collect()
    }

    fn glm_term(&self, i: usize, z: &[f64]) -> Option<GlmTerm> {
        let c = &self.components[i];
        let (s, _) = self.args(c, z);
        let (pss, pst, ptt) = c.second(s);
        Some(GlmTerm {
            curvature_norm: sym2_norm(pss, pst, ptt),
            a_norm_sq: dot(&c.a, &c.a),
            b_norm_sq: dot(&c.b, &c.b),
        })
    }
}
