//! Problem instances: the cubic-regularized bilinear game, AUC maximization,
//! convex-concave quadratics, generalized-linear finite sums and LIBSVM data.

mod auc;
mod cubic;
mod cubic_bilinear;
mod glm;
mod libsvm;
mod quadratic;

pub use auc::{make_auc_problem, AucProblem};
pub use cubic::{add_cubic_hessian, cubic_gradient, cubic_value};
pub use cubic_bilinear::{make_cubic_bilinear, CubicBilinearInstance};
pub use glm::{make_glm_sum, GlmComponent, GlmSum, GlmSumOptions};
pub use libsvm::{
    parse_libsvm, parse_libsvm_str, scale_features, synthetic_a9a_like, write_libsvm, LibsvmDataset,
    ScalingMeta, SparseRow,
};
pub use quadratic::{make_random_cc_quadratic, QuadraticProblem};

use crate::numerics::DenseMatrix;
use crate::saddle::SaddleProblem;

/// `cubic_bilinear_saddle(inst)`; same as [`CubicBilinearInstance::saddle`].
pub fn cubic_bilinear_saddle(inst: &CubicBilinearInstance) -> crate::saddle::JointPoint {
    inst.saddle()
}

/// Curvature data of one generalized-linear component `f_i(a_iᵀx, b_iᵀy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmTerm {
    /// Spectral norm of the 2×2 second derivative `f_i″` at the current point.
    pub curvature_norm: f64,
    pub a_norm_sq: f64,
    pub b_norm_sq: f64,
}

impl GlmTerm {
    /// `‖f_i″‖(‖a_i‖² + ‖b_i‖²)`
    pub fn weight(&self) -> f64 {
        self.curvature_norm * (self.a_norm_sq + self.b_norm_sq)
    }
}

/// `f(z) = (1/N) Σ f_i(z) + d(z)` where only the sum part is ever subsampled.
pub trait FiniteSum: SaddleProblem {
    fn num_components(&self) -> usize;

    /// `∇f_i(z)` (not divided by `N`).
    fn component_gradient(&self, i: usize, z: &[f64]) -> Vec<f64>;

    /// `out += weight · ∇²f_i(z)`
    fn add_component_hessian(&self, i: usize, z: &[f64], weight: f64, out: &mut DenseMatrix);

    /// Gradient of the deterministic part `d`.
    fn deterministic_gradient(&self, z: &[f64]) -> Vec<f64>;

    /// `out += ∇²d(z)`
    fn add_deterministic_hessian(&self, z: &[f64], out: &mut DenseMatrix);

    /// `B_i ≥ sup_z ‖∇²f_i(z)‖` (or the generalized-linear bound when [`FiniteSum::glm_term`] exists).
    fn component_hessian_bounds(&self) -> Vec<f64>;

    /// Generalized-linear curvature data, for problems of that special form.
    fn glm_term(&self, _i: usize, _z: &[f64]) -> Option<GlmTerm> {
        None
    }

    /// Data dimension used by the empirical sample-size rule.
    fn feature_dim(&self) -> usize {
        self.dims().0
    }

    /// `(1/N)Σ ∇²f_i(z)`, the exact Hessian of the sum part.
    fn sum_hessian(&self, z: &[f64]) -> DenseMatrix {
        let d = self.dim();
        let n = self.num_components();
        let mut h = DenseMatrix::zeros(d, d);
        for i in 0..n {
            self.add_component_hessian(i, z, 1.0 / n as f64, &mut h);
        }
        h
    }

    /// Sampled gradient `(1/|S|)Σ_{i∈S} ∇f_i(z) + ∇d(z)`.
    fn minibatch_gradient(&self, indices: &[usize], z: &[f64]) -> Vec<f64> {
        let mut g = self.deterministic_gradient(z);
        let w = 1.0 / indices.len().max(1) as f64;
        for &i in indices {
            crate::numerics::axpy(w, &self.component_gradient(i, z), &mut g);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{distance, norm};

    fn points(dim: usize, count: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|k| (0..dim).map(|i| ((i * 13 + k * 7) as f64 * 0.61).sin() * 1.5).collect())
            .collect()
    }

    fn assert_monotone(p: &dyn SaddleProblem) {
        let pts = points(p.dim(), 12);
        for a in &pts {
            for b in &pts {
                let fa = crate::saddle::operator_at(p, a);
                let fb = crate::saddle::operator_at(p, b);
                let diff = crate::numerics::sub(a, b);
                let inner = crate::numerics::dot(&diff, &crate::numerics::sub(&fa, &fb));
                assert!(inner >= -1e-10 * crate::numerics::dot(&diff, &diff), "{inner}");
            }
        }
    }

    #[test]
    fn operators_are_monotone() {
        assert_monotone(&make_cubic_bilinear(8, 0.05, 1).unwrap());
        assert_monotone(&make_random_cc_quadratic(4, 3, 2).unwrap());
        assert_monotone(&make_glm_sum(30, 4, 3, GlmSumOptions::default(), 3).unwrap());
        let ds = synthetic_a9a_like(60, 4);
        assert_monotone(&make_auc_problem(&ds, 1.0 / 60.0).unwrap());
    }

    #[test]
    fn norms_of_operator_and_gradient_agree() {
        let inst = make_cubic_bilinear(5, 0.1, 9).unwrap();
        for z in points(10, 5) {
            let f = crate::saddle::operator_at(&inst, &z);
            assert_eq!(norm(&f), norm(&inst.gradient(&z)));
        }
    }

    fn check_derivatives(p: &dyn SaddleProblem, tol: f64) {
        for z in points(p.dim(), 3) {
            let fd_g = crate::numerics::finite_diff_gradient(|w| p.value(w), &z, 1e-5);
            let g = p.gradient(&z);
            assert!(distance(&g, &fd_g) <= tol * (1.0 + norm(&g)), "gradient");
            let fd_h = crate::numerics::finite_diff_jacobian(|w| p.gradient(w), &z, 1e-5);
            let h = p.hessian(&z);
            assert!(h.is_symmetric(1e-12));
            assert!(h.max_abs_diff(&fd_h) <= tol * (1.0 + h.frobenius_norm()), "hessian");
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        check_derivatives(&make_cubic_bilinear(6, 0.2, 4).unwrap(), 1e-6);
        check_derivatives(&make_random_cc_quadratic(3, 4, 5).unwrap(), 1e-6);
        check_derivatives(&make_glm_sum(25, 3, 2, GlmSumOptions::default(), 6).unwrap(), 1e-6);
        let ds = synthetic_a9a_like(40, 7);
        check_derivatives(&make_auc_problem(&ds, 0.025).unwrap(), 1e-6);
    }

    fn check_finite_sum(fs: &dyn FiniteSum) {
        for z in points(fs.dim(), 3) {
            let n = fs.num_components();
            let all: Vec<usize> = (0..n).collect();
            let g = fs.minibatch_gradient(&all, &z);
            assert!(distance(&g, &fs.gradient(&z)) <= 1e-12 * (1.0 + norm(&g)));
            let mut h = fs.sum_hessian(&z);
            fs.add_deterministic_hessian(&z, &mut h);
            assert!(h.max_abs_diff(&fs.hessian(&z)) <= 1e-12 * (1.0 + h.frobenius_norm()));
            let bounds = fs.component_hessian_bounds();
            for (i, b) in bounds.iter().enumerate() {
                let mut hi = DenseMatrix::zeros(fs.dim(), fs.dim());
                fs.add_component_hessian(i, &z, 1.0, &mut hi);
                let actual = crate::numerics::symmetric_eigenvalues(&hi)
                    .into_iter()
                    .fold(0.0_f64, |a, e| a.max(e.abs()));
                assert!(actual <= b * (1.0 + 1e-10) + 1e-12, "component {i}: {actual} > {b}");
            }
        }
    }

    #[test]
    fn finite_sums_decompose() {
        check_finite_sum(&make_glm_sum(20, 3, 2, GlmSumOptions::default(), 8).unwrap());
        let ds = synthetic_a9a_like(30, 9);
        check_finite_sum(&make_auc_problem(&ds, 1.0 / 30.0).unwrap());
    }
}
