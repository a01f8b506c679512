use crate::numerics::{norm, DenseMatrix};

/// `(ρ/6)‖x‖³`
pub fn cubic_value(rho: f64, x: &[f64]) -> f64 {
    rho / 6.0 * norm(x).powi(3)
}

/// `∇(ρ/6)‖x‖³ = (ρ/2)‖x‖x`
pub fn cubic_gradient(rho: f64, x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    x.iter().map(|v| 0.5 * rho * r * v).collect()
}

/// Adds `∇²(ρ/6)‖x‖³ = (ρ/2)(‖x‖I + xxᵀ/‖x‖)` to the block of `out` at `(offset, offset)`.
/// The Hessian is zero at `x = 0`.
pub fn add_cubic_hessian(rho: f64, x: &[f64], out: &mut DenseMatrix, offset: usize) {
    let r = norm(x);
    if r == 0.0 {
        return;
    }
    let c = 0.5 * rho;
    for i in 0..x.len() {
        out[(offset + i, offset + i)] += c * r;
        for j in 0..x.len() {
            out[(offset + i, offset + j)] += c * x[i] * x[j] / r;
        }
    }
}
