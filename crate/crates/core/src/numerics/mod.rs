//! Dense linear-algebra kernels used by the solvers.
//!
//! Everything here is self-contained: row-major dense matrices, partial-pivoting
//! elimination, restarted GMRES, power-iteration norm estimates, a cyclic Jacobi
//! eigensolver for small symmetric matrices and central finite differences.

mod dense;
mod eigen;
mod finite_diff;
mod krylov;
mod power;

pub use dense::{direct_solve, DenseMatrix};
pub use eigen::symmetric_eigenvalues;
pub use finite_diff::{finite_diff_gradient, finite_diff_jacobian};
pub use krylov::{krylov_solve, KrylovOutcome, DEFAULT_RESTART};
pub use power::{spectral_norm, symmetric_spectral_norm};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean projection onto the closed ball of radius `radius` around `center`.
pub fn project_ball(w: &mut [f64], center: &[f64], radius: f64) {
    let d = distance(w, center);
    if d > radius {
        let s = radius / d;
        for (wi, ci) in w.iter_mut().zip(center) {
            *wi = ci + s * (*wi - ci);
        }
    }
}
