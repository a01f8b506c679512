use super::DenseMatrix;

/// Central-difference gradient of a scalar function.
pub fn finite_diff_gradient(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0, "finite difference step must be positive");
    let mut x = at.to_vec();
    (0..at.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let fp = f(&x);
            x[i] = orig - h;
            let fm = f(&x);
            x[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian of a vector map; column `j` is `∂F/∂x_j`.
pub fn finite_diff_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, at: &[f64], h: f64) -> DenseMatrix {
    assert!(h > 0.0, "finite difference step must be positive");
    let n = at.len();
    let rows = f(at).len();
    let mut jac = DenseMatrix::zeros(rows, n);
    let mut x = at.to_vec();
    for j in 0..n {
        let orig = x[j];
        x[j] = orig + h;
        let fp = f(&x);
        x[j] = orig - h;
        let fm = f(&x);
        x[j] = orig;
        for i in 0..rows {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_is_exact() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 4.0]]);
        let jac = finite_diff_jacobian(|x| a.matvec(x), &[0.3, -0.7], 1e-3);
        assert!(jac.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn square_at_one() {
        let g = finite_diff_gradient(|x| x[0] * x[0], &[1.0], 1e-4);
        assert!((g[0] - 2.0).abs() < 1e-7);
    }
}
