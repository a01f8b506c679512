use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, DenseMatrix};

use super::JointPoint;

/// A smooth convex-concave objective `f(x, y)` on `R^m × R^n`.
///
/// Points are passed as the concatenation `[x; y]`. Gradients and Hessians are
/// those of `f` itself; the saddle operator applies the sign flip.
pub trait SaddleProblem: Send + Sync {
    /// `(m, n)`
    fn dims(&self) -> (usize, usize);

    fn value(&self, z: &[f64]) -> f64;

    /// `∇f(z) = (∇_x f, ∇_y f)`
    fn gradient(&self, z: &[f64]) -> Vec<f64>;

    /// `∇²f(z)`, symmetric `(m+n) × (m+n)`.
    fn hessian(&self, z: &[f64]) -> DenseMatrix;

    /// Closed form of `max_{‖y − center‖ ≤ β} f(x, y)`, when the problem has one.
    fn max_over_y_ball(&self, _x: &[f64], _center: &[f64], _beta: f64) -> Option<f64> {
        None
    }

    /// Closed form of `min_{‖x − center‖ ≤ β} f(x, y)`, when the problem has one.
    fn min_over_x_ball(&self, _y: &[f64], _center: &[f64], _beta: f64) -> Option<f64> {
        None
    }

    fn dim(&self) -> usize {
        let (m, n) = self.dims();
        m + n
    }
}

/// `F(z) = (∇_x f, −∇_y f)` on a raw coordinate slice.
pub fn operator_at(problem: &dyn SaddleProblem, z: &[f64]) -> Vec<f64> {
    let (m, _) = problem.dims();
    let mut g = problem.gradient(z);
    g[m..].iter_mut().for_each(|v| *v = -*v);
    g
}

/// Applies `S = diag(I_m, −I_n)` on the left of a Hessian.
fn sign_flip_rows(h: &mut DenseMatrix, m: usize) {
    let cols = h.cols();
    for i in m..h.rows() {
        for j in 0..cols {
            h[(i, j)] = -h[(i, j)];
        }
    }
}

/// The saddle operator of a problem; a pure evaluator.
#[derive(Clone, Copy)]
pub struct SaddleOperator<'a> {
    problem: &'a dyn SaddleProblem,
}

impl<'a> SaddleOperator<'a> {
    pub fn new(problem: &'a dyn SaddleProblem) -> Self {
        Self { problem }
    }

    pub fn problem(&self) -> &'a dyn SaddleProblem {
        self.problem
    }

    pub fn value(&self, z: &JointPoint) -> Result<Vec<f64>> {
        operator_value(self.problem, z)
    }

    pub fn jacobian(&self, z: &JointPoint) -> Result<OperatorJacobian> {
        operator_jacobian(self.problem, z)
    }
}

/// `DF(z) = S·∇²f(z)`; generally asymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorJacobian {
    pub entries: DenseMatrix,
}

fn check_point(problem: &dyn SaddleProblem, z: &JointPoint) -> Result<()> {
    let (m, n) = problem.dims();
    let (zm, zn) = z.dims();
    check_dim(m, zm, "x-block of point")?;
    check_dim(n, zn, "y-block of point")
}

pub fn operator_value(problem: &dyn SaddleProblem, z: &JointPoint) -> Result<Vec<f64>> {
    check_point(problem, z)?;
    Ok(operator_at(problem, z.coords()))
}

pub fn operator_jacobian(problem: &dyn SaddleProblem, z: &JointPoint) -> Result<OperatorJacobian> {
    check_point(problem, z)?;
    let (m, _) = problem.dims();
    let mut entries = problem.hessian(z.coords());
    sign_flip_rows(&mut entries, m);
    Ok(OperatorJacobian { entries })
}

fn check_weights(len: usize, weights: &[f64]) -> Result<f64> {
    if len == 0 {
        return Err(Error::Empty("no points to average"));
    }
    check_dim(len, weights.len(), "weights")?;
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "averaging weights must be positive and finite, got {w}"
        )));
    }
    Ok(weights.iter().sum())
}

/// Ergodic average `Σ λ_i z_i / Σ λ_i`.
pub fn average_iterates(points: &[JointPoint], weights: &[f64]) -> Result<JointPoint> {
    let total = check_weights(points.len(), weights)?;
    let first = &points[0];
    let mut acc = vec![0.0; first.len()];
    for p in points {
        if p.dims() != first.dims() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                got: p.len(),
                context: "average_iterates point",
            });
        }
    }
    for (p, w) in points.iter().zip(weights) {
        crate::numerics::axpy(*w, p.coords(), &mut acc);
    }
    acc.iter_mut().for_each(|v| *v /= total);
    Ok(first.with_coords(acc))
}

/// `Σ λ_i (z_i − z)ᵀF(z_i) / Σ λ_i`.
pub fn weighted_regret(
    problem: &dyn SaddleProblem,
    points: &[JointPoint],
    weights: &[f64],
    comparator: &JointPoint,
) -> Result<f64> {
    let total = check_weights(points.len(), weights)?;
    check_point(problem, comparator)?;
    let mut acc = 0.0;
    for (p, w) in points.iter().zip(weights) {
        let f = operator_value(problem, p)?;
        let diff = crate::numerics::sub(p.coords(), comparator.coords());
        acc += w * dot(&diff, &f);
    }
    Ok(acc / total)
}
