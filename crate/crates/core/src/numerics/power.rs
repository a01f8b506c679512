use super::norm;

fn start_vector(dim: usize) -> Vec<f64> {
    // Deterministic, generic start: avoids being orthogonal to structured top singular vectors.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| {
            let h = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            1.0 + ((h >> 40) as f64 / (1u64 << 24) as f64 - 0.5) * 0.5
        })
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Largest singular value of a linear map, by power iteration on `AᵀA`.
///
/// The returned Rayleigh estimate `‖A v‖` never exceeds the true norm.
pub fn spectral_norm(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    apply_transpose: impl Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    iters: usize,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut v = start_vector(dim);
    let mut best = 0.0f64;
    for _ in 0..iters.max(1) {
        let av = apply(&v);
        let sigma = norm(&av);
        best = best.max(sigma);
        if sigma == 0.0 {
            break;
        }
        let mut w = apply_transpose(&av);
        let wn = norm(&w);
        if wn == 0.0 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= wn);
        v = w;
    }
    best
}

/// Spectral norm of a symmetric map (`Aᵀ = A`).
pub fn symmetric_spectral_norm(apply: impl Fn(&[f64]) -> Vec<f64>, dim: usize, iters: usize) -> f64 {
    spectral_norm(&apply, &apply, dim, iters)
}

#[cfg(test)]
mod tests {
    use crate::numerics::DenseMatrix;

    #[test]
    fn diagonal_norm() {
        let a = DenseMatrix::diag(&[3.0, 1.0]);
        assert!((a.spectral_norm(100) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_zero_norm() {
        assert_eq!(DenseMatrix::zeros(5, 5).spectral_norm(10), 0.0);
    }

    #[test]
    fn rectangular_map() {
        // singular values of [[3,0],[0,4],[0,0]] are 4 and 3
        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0], vec![0.0, 0.0]]);
        assert!((a.spectral_norm(200) - 4.0).abs() < 1e-10);
    }
}
