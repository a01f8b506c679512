use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigenvalues, DenseMatrix};
use crate::saddle::SaddleProblem;

use super::cubic::{add_cubic_hessian, cubic_gradient, cubic_value};
use super::{FiniteSum, LibsvmDataset, SparseRow};

/// AUC maximization as a min-max problem over `x = (θ, u, v) ∈ R^{d+2}` and scalar `y`.
///
/// Positive rows contribute `(1−p̂)(θᵀa − u)² − 2(1+y)(1−p̂)θᵀa`, negative rows
/// `p̂(θᵀa − v)² + 2(1+y)p̂θᵀa`. The cubic `(ρ/6)‖x‖³` and `−p̂(1−p̂)y²` terms form the
/// deterministic part.
#[derive(Debug, Clone, PartialEq)]
pub struct AucProblem {
    features: usize,
    rho: f64,
    p_hat: f64,
    rows: Vec<SparseRow>,
    positive: Vec<bool>,
    bounds: Vec<f64>,
}

pub fn make_auc_problem(ds: &LibsvmDataset, rho: f64) -> Result<AucProblem> {
    if ds.is_empty() {
        return Err(Error::Empty("AUC problem needs at least one sample"));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let p_hat = ds.positive_fraction();
    let positive: Vec<bool> = ds.labels.iter().map(|l| *l > 0.0).collect();
    let bounds = ds
        .rows
        .iter()
        .zip(&positive)
        .map(|(row, &pos)| {
            let c = if pos { 2.0 * (1.0 - p_hat) } else { 2.0 * p_hat };
            let a = row.norm_sq().sqrt();
            // the component Hessian lives on span{a, e_u or e_v, e_y}
            let reduced = DenseMatrix::from_rows(&[
                vec![a * a, -a, -a],
                vec![-a, 1.0, 0.0],
                vec![-a, 0.0, 0.0],
            ]);
            c * symmetric_eigenvalues(&reduced)
                .into_iter()
                .fold(0.0_f64, |m, e| m.max(e.abs()))
        })
        .collect();
    Ok(AucProblem {
        features: ds.num_features,
        rho,
        p_hat,
        rows: ds.rows.clone(),
        positive,
        bounds,
    })
}

impl AucProblem {
    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn features(&self) -> usize {
        self.features
    }

    /// All labels equal, so one class contributes nothing.
    pub fn is_degenerate(&self) -> bool {
        self.p_hat == 0.0 || self.p_hat == 1.0
    }

    fn u_index(&self) -> usize {
        self.features
    }

    fn v_index(&self) -> usize {
        self.features + 1
    }

    fn y_index(&self) -> usize {
        self.features + 2
    }

    fn component_value(&self, i: usize, z: &[f64]) -> f64 {
        let s = self.rows[i].dot(z);
        let y = z[self.y_index()];
        let p = self.p_hat;
        if self.positive[i] {
            let r = s - z[self.u_index()];
            (1.0 - p) * r * r - 2.0 * (1.0 + y) * (1.0 - p) * s
        } else {
            let r = s - z[self.v_index()];
            p * r * r + 2.0 * (1.0 + y) * p * s
        }
    }

    /// Coefficient of `y` in the sum part, `(1/N)Σ ∂f_i/∂y`.
    fn y_slope(&self, z: &[f64]) -> f64 {
        let p = self.p_hat;
        let total: f64 = (0..self.rows.len())
            .map(|i| {
                let s = self.rows[i].dot(z);
                if self.positive[i] {
                    -2.0 * (1.0 - p) * s
                } else {
                    2.0 * p * s
                }
            })
            .sum();
        total / self.rows.len() as f64
    }
}

impl SaddleProblem for AucProblem {
    fn dims(&self) -> (usize, usize) {
        (self.features + 2, 1)
    }

    fn value(&self, z: &[f64]) -> f64 {
        let n = self.rows.len() as f64;
        let sum: f64 = (0..self.rows.len()).map(|i| self.component_value(i, z)).sum();
        let y = z[self.y_index()];
        sum / n + cubic_value(self.rho, &z[..self.features + 2])
            - self.p_hat * (1.0 - self.p_hat) * y * y
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.rows.len()).collect();
        self.minibatch_gradient(&all, z)
    }

    fn hessian(&self, z: &[f64]) -> DenseMatrix {
        let mut h = self.sum_hessian(z);
        self.add_deterministic_hessian(z, &mut h);
        h
    }

    fn max_over_y_ball(&self, x: &[f64], center: &[f64], beta: f64) -> Option<f64> {
        let mut z = x.to_vec();
        z.push(0.0);
        let slope = self.y_slope(&z);
        let q = self.p_hat * (1.0 - self.p_hat);
        let (lo, hi) = (center[0] - beta, center[0] + beta);
        let y = if q > 0.0 {
            (slope / (2.0 * q)).clamp(lo, hi)
        } else if slope > 0.0 {
            hi
        } else if slope < 0.0 {
            lo
        } else {
            center[0]
        };
        z[self.y_index()] = y;
        Some(self.value(&z))
    }
}

impl FiniteSum for AucProblem {
    fn num_components(&self) -> usize {
        self.rows.len()
    }

    fn component_gradient(&self, i: usize, z: &[f64]) -> Vec<f64> {
        let row = &self.rows[i];
        let s = row.dot(z);
        let y = z[self.y_index()];
        let p = self.p_hat;
        let mut g = vec![0.0; self.features + 3];
        let coef_theta;
        if self.positive[i] {
            let r = s - z[self.u_index()];
            coef_theta = 2.0 * (1.0 - p) * r - 2.0 * (1.0 + y) * (1.0 - p);
            g[self.u_index()] = -2.0 * (1.0 - p) * r;
            g[self.y_index()] = -2.0 * (1.0 - p) * s;
        } else {
            let r = s - z[self.v_index()];
            coef_theta = 2.0 * p * r + 2.0 * (1.0 + y) * p;
            g[self.v_index()] = -2.0 * p * r;
            g[self.y_index()] = 2.0 * p * s;
        }
        for (&j, &a) in row.indices.iter().zip(&row.values) {
            g[j] = coef_theta * a;
        }
        g
    }

    fn add_component_hessian(&self, i: usize, _z: &[f64], weight: f64, out: &mut DenseMatrix) {
        let row = &self.rows[i];
        let p = self.p_hat;
        let (c, slot, y_sign) = if self.positive[i] {
            (2.0 * (1.0 - p) * weight, self.u_index(), -1.0)
        } else {
            (2.0 * p * weight, self.v_index(), 1.0)
        };
        let yi = self.y_index();
        for (&j, &aj) in row.indices.iter().zip(&row.values) {
            for (&k, &ak) in row.indices.iter().zip(&row.values) {
                out[(j, k)] += c * aj * ak;
            }
            out[(j, slot)] -= c * aj;
            out[(slot, j)] -= c * aj;
            out[(j, yi)] += y_sign * c * aj;
            out[(yi, j)] += y_sign * c * aj;
        }
        out[(slot, slot)] += c;
    }

    fn deterministic_gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = cubic_gradient(self.rho, &z[..self.features + 2]);
        g.push(-2.0 * self.p_hat * (1.0 - self.p_hat) * z[self.y_index()]);
        g
    }

    fn add_deterministic_hessian(&self, z: &[f64], out: &mut DenseMatrix) {
        add_cubic_hessian(self.rho, &z[..self.features + 2], out, 0);
        let yi = self.y_index();
        out[(yi, yi)] -= 2.0 * self.p_hat * (1.0 - self.p_hat);
    }

    fn component_hessian_bounds(&self) -> Vec<f64> {
        self.bounds.clone()
    }

    fn feature_dim(&self) -> usize {
        self.features
    }
}
