//! The cubic-regularized saddle subproblem
//! `min_Δx max_Δy Δzᵀg + ½ΔzᵀHΔz + 2ρ‖Δx‖³ − 2ρ‖Δy‖³`
//! and its solvers: a mirror-prox warm start followed by a regularized
//! semismooth Newton method on a second-order-cone fixed-point equation.

mod cone;
mod gmp;
mod ssn;

pub use cone::{cone_projection_jacobian, project_cone, soc_project, soc_projection_jacobian, SocPoint};
pub use gmp::{gmp_iterate, gmp_solve, GmpOutcome};
pub use ssn::{
    cone_residual, residual_jacobian, solve_cubic_subproblem, ssn_solve, SolveTarget, SsnSettings,
    SubproblemOptions,
};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, norm, symmetric_spectral_norm, DenseMatrix};

/// Multiplicative safety margin on the power-iteration estimate of `‖H‖`.
pub const ELL_SAFETY: f64 = 1.01;
/// Power iterations used to estimate `‖H‖`.
pub const ELL_POWER_ITERS: usize = 50;
const ELL_FLOOR: f64 = 1e-8;

/// The model `m(Δz) = Δzᵀg + ½ΔzᵀHΔz + 2ρ‖Δx‖³ − 2ρ‖Δy‖³`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSubproblem {
    g: Vec<f64>,
    h: DenseMatrix,
    rho: f64,
    m: usize,
    n: usize,
    ell: f64,
}

impl CubicSubproblem {
    /// `H` must be symmetric to `1e−12` (relative to its size); it is symmetrized exactly.
    pub fn new(g: Vec<f64>, mut h: DenseMatrix, rho: f64, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("block dimensions must be positive".into()));
        }
        check_dim(m + n, g.len(), "subproblem gradient")?;
        check_dim(m + n, h.rows(), "subproblem Hessian rows")?;
        check_dim(m + n, h.cols(), "subproblem Hessian columns")?;
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        if !h.is_symmetric(1e-12 * h.inf_norm().max(1.0)) {
            return Err(Error::InvalidArgument("subproblem Hessian is not symmetric".into()));
        }
        if !h.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite subproblem data".into()));
        }
        h.symmetrize();
        let est = symmetric_spectral_norm(|v| h.matvec(v), m + n, ELL_POWER_ITERS);
        let ell = (ELL_SAFETY * est).max(ELL_FLOOR);
        Ok(Self { g, h, rho, m, n, ell })
    }

    /// Replaces the smoothness constant used by the mirror-prox steps.
    pub fn with_ell(mut self, ell: f64) -> Result<Self> {
        if !(ell > 0.0) {
            return Err(Error::InvalidArgument(format!("ell must be positive, got {ell}")));
        }
        self.ell = ell;
        Ok(self)
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// Smoothness constant `ℓ ≥ ‖H‖` of the quadratic part.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn model_value(&self, dz: &[f64]) -> f64 {
        let (dx, dy) = dz.split_at(self.m);
        dot(dz, &self.g) + 0.5 * dot(dz, &self.h.matvec(dz)) + 2.0 * self.rho * norm(dx).powi(3)
            - 2.0 * self.rho * norm(dy).powi(3)
    }

    /// `g + HΔz`, the gradient of the quadratic part.
    pub(crate) fn quadratic_gradient(&self, dz: &[f64]) -> Vec<f64> {
        let mut out = self.h.matvec(dz);
        crate::numerics::axpy(1.0, &self.g, &mut out);
        out
    }
}

/// `∇m(Δz) = g + HΔz + (6ρ‖Δx‖Δx, −6ρ‖Δy‖Δy)`.
pub fn model_gradient(sp: &CubicSubproblem, dz: &[f64]) -> Vec<f64> {
    let mut out = sp.quadratic_gradient(dz);
    let m = sp.m;
    let rx = 6.0 * sp.rho * norm(&dz[..m]);
    let ry = 6.0 * sp.rho * norm(&dz[m..]);
    for (i, v) in out.iter_mut().enumerate() {
        if i < m {
            *v += rx * dz[i];
        } else {
            *v -= ry * dz[i];
        }
    }
    out
}

/// `argmin_x −ℓvᵀx + (ℓ/2)‖x‖² + 2ρ‖x‖³`, which is `x = λv` with
/// `λ = 2ℓ/(ℓ + √(ℓ² + 24ρ‖v‖ℓ))`.
pub fn cubic_prox(v: &[f64], ell: f64, rho: f64) -> Vec<f64> {
    let nv = norm(v);
    if nv == 0.0 {
        return vec![0.0; v.len()];
    }
    let lambda = 2.0 * ell / (ell + (ell * ell + 24.0 * rho * nv * ell).sqrt());
    v.iter().map(|x| lambda * x).collect()
}

/// Termination state of a subproblem solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubproblemStatus {
    Exact,
    Condition2,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub dz: Vec<f64>,
    pub model_grad_norm: f64,
    pub gmp_iters: usize,
    pub ssn_iters: usize,
    pub status: SubproblemStatus,
    /// `‖F(ẑ) + DF(ẑ)Δz + 6ρ(‖Δx‖Δx, ‖Δy‖Δy)‖`, the saddle-operator form of `∇m`.
    pub optimality_residual: f64,
}

impl SubproblemSolution {
    pub fn total_iters(&self) -> usize {
        self.gmp_iters + self.ssn_iters
    }
}

/// `κ·min{‖Δz‖², reference}`, the right-hand side of the sufficient-accuracy test.
pub fn condition2_bound(kappa_m: f64, dz: &[f64], reference: f64) -> f64 {
    kappa_m * dot(dz, dz).min(reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_sp(g: [f64; 2], h: f64, rho: f64) -> CubicSubproblem {
        CubicSubproblem::new(g.to_vec(), DenseMatrix::diag(&[h, h]), rho, 1, 1).unwrap()
    }

    #[test]
    fn model_gradient_at_zero_is_g() {
        let sp = scalar_sp([0.3, -0.7], 2.0, 0.5);
        assert_eq!(model_gradient(&sp, &[0.0, 0.0]), vec![0.3, -0.7]);
    }

    #[test]
    fn model_gradient_pure_cubic() {
        let sp = scalar_sp([0.0, 0.0], 0.0, 0.25);
        let dz = [2.0, -3.0];
        // (6ρ|Δx|Δx, −6ρ|Δy|Δy)
        assert_eq!(model_gradient(&sp, &dz), vec![6.0, 13.5]);
    }

    #[test]
    fn scalar_root() {
        // −1 + |Δx|Δx = 0 and 1 − |Δy|Δy = 0
        let sp = scalar_sp([-1.0, 1.0], 0.0, 1.0 / 6.0);
        let r = model_gradient(&sp, &[1.0, 1.0]);
        assert!(norm(&r) < 1e-15);
    }

    #[test]
    fn model_gradient_matches_finite_differences() {
        let h = DenseMatrix::from_rows(&[
            vec![2.0, 0.5, 1.0],
            vec![0.5, 1.0, -0.3],
            vec![1.0, -0.3, -1.5],
        ]);
        let sp = CubicSubproblem::new(vec![0.1, -0.2, 0.4], h, 0.3, 2, 1).unwrap();
        let dz = [0.4, -0.9, 0.7];
        let fd = crate::numerics::finite_diff_gradient(|d| sp.model_value(d), &dz, 1e-5);
        assert!(crate::numerics::distance(&fd, &model_gradient(&sp, &dz)) < 1e-8);
    }

    #[test]
    fn prox_golden_ratio() {
        let x = cubic_prox(&[1.0], 1.0, 1.0 / 6.0);
        let lambda = x[0];
        assert!((lambda - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        // stationarity −ℓv + ℓx + 6ρ‖x‖x
        let res = -1.0 + lambda + lambda * lambda;
        assert!(res.abs() <= 1e-12 * 2.0);
    }

    #[test]
    fn prox_limits() {
        assert_eq!(cubic_prox(&[0.0, 0.0], 1.0, 1.0), vec![0.0, 0.0]);
        let x = cubic_prox(&[1.0, -2.0], 3.0, 1e-14);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn prox_stationarity_random() {
        for k in 0..50 {
            let v: Vec<f64> = (0..4).map(|i| ((i * 5 + k * 3) as f64).sin() * (k as f64 + 1.0)).collect();
            let ell = 0.1 + k as f64 * 0.3;
            let rho = 0.01 * (k as f64 + 1.0);
            let x = cubic_prox(&v, ell, rho);
            let nx = norm(&x);
            let res: Vec<f64> = v
                .iter()
                .zip(&x)
                .map(|(vi, xi)| -ell * vi + ell * xi + 6.0 * rho * nx * xi)
                .collect();
            assert!(norm(&res) <= 1e-12 * ell * (1.0 + norm(&v)));
        }
    }

    #[test]
    fn rejects_bad_data() {
        let asym = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(CubicSubproblem::new(vec![0.0; 2], asym, 1.0, 1, 1).is_err());
        assert!(CubicSubproblem::new(vec![0.0; 2], DenseMatrix::identity(2), 0.0, 1, 1).is_err());
        assert!(CubicSubproblem::new(vec![0.0; 3], DenseMatrix::identity(2), 1.0, 1, 1).is_err());
    }

    #[test]
    fn ell_bounds_spectral_norm() {
        let h = DenseMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, -4.0]]);
        let sp = CubicSubproblem::new(vec![1.0, 1.0], h.clone(), 1.0, 1, 1).unwrap();
        let exact = crate::numerics::symmetric_eigenvalues(&h)
            .into_iter()
            .fold(0.0_f64, |a, e| a.max(e.abs()));
        assert!(sp.ell() >= exact && sp.ell() <= 1.02 * exact);
    }
}
