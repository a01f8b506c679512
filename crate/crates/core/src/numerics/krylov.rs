use super::{axpy, dot, norm};

pub const DEFAULT_RESTART: usize = 50;

/// Result of a restarted GMRES run.
#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub solution: Vec<f64>,
    /// True residual `‖A·x − rhs‖` at return.
    pub residual_norm: f64,
    /// Total Arnoldi steps taken.
    pub iterations: usize,
    pub converged: bool,
    /// Set when the Arnoldi process produced a zero next vector.
    pub breakdown: bool,
}

/// Restarted GMRES from a zero initial guess.
///
/// Stops when `‖A·x − rhs‖ ≤ tol·‖rhs‖` or after `max_iters` Arnoldi steps.
pub fn krylov_solve(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    tol: f64,
    restart: usize,
    max_iters: usize,
) -> KrylovOutcome {
    let n = rhs.len();
    let restart = restart.clamp(1, n.max(1));
    let rhs_norm = norm(rhs);
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return KrylovOutcome {
            solution: x,
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
            breakdown: false,
        };
    }
    let target = tol * rhs_norm;
    let mut total = 0usize;
    let mut breakdown = false;

    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = apply(x);
        rhs.iter().zip(&ax).map(|(b, v)| b - v).collect()
    };

    let mut r = residual(&x);
    let mut beta = norm(&r);

    while beta > target && total < max_iters && !breakdown {
        // Arnoldi basis and Hessenberg factor, column-major in `h`.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; restart + 1]; restart];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..restart {
            if total >= max_iters {
                break;
            }
            total += 1;
            let mut w = apply(&basis[k]);
            // modified Gram-Schmidt
            for (i, v) in basis.iter().enumerate() {
                let hik = dot(&w, v);
                h[k][i] = hik;
                axpy(-hik, v, &mut w);
            }
            let wn = norm(&w);
            h[k][k + 1] = wn;

            for i in 0..k {
                let tmp = cs[i] * h[k][i] + sn[i] * h[k][i + 1];
                h[k][i + 1] = -sn[i] * h[k][i] + cs[i] * h[k][i + 1];
                h[k][i] = tmp;
            }
            let denom = h[k][k].hypot(h[k][k + 1]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k][k + 1] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k][k + 1];
            h[k][k + 1] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;

            let lucky = wn <= 1e-14 * (1.0 + h[k][k].abs());
            if lucky {
                breakdown = true;
            } else {
                basis.push(w.iter().map(|v| v / wn).collect());
            }
            if g[k + 1].abs() <= target || lucky {
                break;
            }
        }

        // back-substitute the triangular least-squares system
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut x);
        }
        r = residual(&x);
        beta = norm(&r);
        if k_used == 0 {
            break;
        }
    }

    KrylovOutcome {
        converged: beta <= target,
        residual_norm: beta,
        solution: x,
        iterations: total,
        breakdown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{direct_solve, DenseMatrix};

    #[test]
    fn identity_converges_in_one_step() {
        let rhs = vec![1.0, 2.0, -3.0];
        let out = krylov_solve(|v| v.to_vec(), &rhs, 1e-12, 50, 100);
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        for (a, b) in out.solution.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let a = DenseMatrix::diag(&[2.0, 3.0]);
        let out = krylov_solve(|v| a.matvec(v), &[2.0, 3.0], 1e-12, 50, 100);
        assert!((out.solution[0] - 1.0).abs() < 1e-12);
        assert!((out.solution[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn restarted_run_matches_direct_solve() {
        // nonsymmetric, diagonally dominant, deterministic
        let n = 60;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0 + (i % 3) as f64
            } else {
                (((i * 31 + j * 17) % 11) as f64 - 5.0) / 40.0
            }
        });
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let out = krylov_solve(|v| a.matvec(v), &rhs, 1e-12, 10, 2000);
        assert!(out.converged, "residual {}", out.residual_norm);
        let exact = direct_solve(&a, &rhs).unwrap();
        let err = crate::numerics::distance(&out.solution, &exact) / crate::numerics::norm(&exact);
        assert!(err < 1e-10);
    }

    #[test]
    fn zero_rhs_is_trivial() {
        let out = krylov_solve(|v| v.to_vec(), &[0.0; 4], 1e-8, 5, 10);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution, vec![0.0; 4]);
    }
}
