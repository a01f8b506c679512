use rand::Rng as _;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, DenseMatrix};
use crate::rng::{stream, streams};
use crate::saddle::{JointPoint, SaddleProblem};

use super::cubic::{add_cubic_hessian, cubic_gradient, cubic_value};

/// `f(x, y) = (ρ/6)‖x‖³ + yᵀ(Ax − b)` with `A` upper bidiagonal (`1` on the
/// diagonal, `−1` above it) and `b` uniform on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicBilinearInstance {
    n: usize,
    rho: f64,
    b: Vec<f64>,
    seed: u64,
}

pub fn make_cubic_bilinear(n: usize, rho: f64, seed: u64) -> Result<CubicBilinearInstance> {
    if n == 0 || !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cubic-bilinear instance needs n >= 1 and rho > 0 (n={n}, rho={rho})"
        )));
    }
    let mut rng = stream(seed, streams::PROBLEM_DATA);
    let b = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    Ok(CubicBilinearInstance { n, rho, b, seed })
}

impl CubicBilinearInstance {
    /// Builds an instance with a caller-chosen `b`.
    pub fn with_b(rho: f64, b: Vec<f64>) -> Result<Self> {
        if b.is_empty() || !(rho > 0.0) {
            return Err(Error::InvalidArgument("need n >= 1 and rho > 0".into()));
        }
        Ok(Self {
            n: b.len(),
            rho,
            b,
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix_a(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                1.0
            } else if j == i + 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// `A x`
    pub fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| x[i] - if i + 1 < self.n { x[i + 1] } else { 0.0 })
            .collect()
    }

    /// `Aᵀ y`
    pub fn apply_at(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| y[j] - if j > 0 { y[j - 1] } else { 0.0 })
            .collect()
    }

    /// `A⁻¹ r` by back-substitution.
    pub fn solve_a(&self, r: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            x[i] = r[i] + if i + 1 < self.n { x[i + 1] } else { 0.0 };
        }
        x
    }

    /// `A⁻ᵀ r` by forward substitution.
    pub fn solve_at(&self, r: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        for j in 0..self.n {
            w[j] = r[j] + if j > 0 { w[j - 1] } else { 0.0 };
        }
        w
    }

    /// The unique saddle `x* = A⁻¹b`, `y* = −(ρ/2)‖x*‖A⁻ᵀx*`.
    pub fn saddle(&self) -> JointPoint {
        let x = self.solve_a(&self.b);
        let scale = -0.5 * self.rho * norm(&x);
        let y: Vec<f64> = self.solve_at(&x).into_iter().map(|v| scale * v).collect();
        JointPoint::from_blocks(&x, &y).expect("n >= 1")
    }
}

/// `argmin_{‖x − c‖ ≤ β} (ρ/6)‖x‖³ + qᵀx`; returns the minimizer.
///
/// The prox-path `x(μ)` of `(ρ/6)‖x‖³ + qᵀx + (μ/2)‖x − c‖²` is explicit:
/// `x = s·r/‖s‖` with `s = μc − q` and `r` the positive root of `(ρ/2)r² + μr = ‖s‖`.
/// Its distance to `c` decreases in `μ`, so the multiplier is found by bisection.
pub(crate) fn cubic_linear_ball_min(rho: f64, q: &[f64], center: &[f64], beta: f64) -> Vec<f64> {
    let path = |mu: f64| -> Vec<f64> {
        let s: Vec<f64> = center.iter().zip(q).map(|(c, qi)| mu * c - qi).collect();
        let sn = norm(&s);
        if sn == 0.0 {
            return vec![0.0; q.len()];
        }
        let r = 2.0 * sn / (mu + (mu * mu + 2.0 * rho * sn).sqrt());
        s.into_iter().map(|v| v * r / sn).collect()
    };
    let dist = |x: &[f64]| crate::numerics::distance(x, center);

    let free = path(0.0);
    if dist(&free) <= beta {
        return free;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dist(&path(hi)) > beta {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist(&path(mid)) > beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = path(hi);
    crate::numerics::project_ball(&mut x, center, beta);
    x
}

impl SaddleProblem for CubicBilinearInstance {
    fn dims(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    fn value(&self, z: &[f64]) -> f64 {
        let (x, y) = z.split_at(self.n);
        let r: Vec<f64> = self.apply_a(x).iter().zip(&self.b).map(|(a, b)| a - b).collect();
        cubic_value(self.rho, x) + dot(y, &r)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (x, y) = z.split_at(self.n);
        let mut gx = cubic_gradient(self.rho, x);
        crate::numerics::axpy(1.0, &self.apply_at(y), &mut gx);
        let ax = self.apply_a(x);
        gx.extend(ax.iter().zip(&self.b).map(|(a, b)| a - b));
        gx
    }

    fn hessian(&self, z: &[f64]) -> DenseMatrix {
        let n = self.n;
        let mut h = DenseMatrix::zeros(2 * n, 2 * n);
        add_cubic_hessian(self.rho, &z[..n], &mut h, 0);
        for i in 0..n {
            // y-x block holds A, x-y block holds Aᵀ
            h[(n + i, i)] = 1.0;
            h[(i, n + i)] = 1.0;
            if i + 1 < n {
                h[(n + i, i + 1)] = -1.0;
                h[(i + 1, n + i)] = -1.0;
            }
        }
        h
    }

    fn max_over_y_ball(&self, x: &[f64], center: &[f64], beta: f64) -> Option<f64> {
        let r: Vec<f64> = self.apply_a(x).iter().zip(&self.b).map(|(a, b)| a - b).collect();
        Some(cubic_value(self.rho, x) + dot(center, &r) + beta * norm(&r))
    }

    fn min_over_x_ball(&self, y: &[f64], center: &[f64], beta: f64) -> Option<f64> {
        let q = self.apply_at(y);
        let x = cubic_linear_ball_min(self.rho, &q, center, beta);
        Some(self.value(&[x.as_slice(), y].concat()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::direct_solve;
    use crate::saddle::operator_value;

    #[test]
    fn matrix_for_n_two() {
        let inst = make_cubic_bilinear(2, 0.1, 0).unwrap();
        assert_eq!(
            inst.matrix_a(),
            DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 1.0]])
        );
    }

    #[test]
    fn same_seed_same_instance() {
        let a = make_cubic_bilinear(50, 1.0 / (20.0 * 50.0), 42).unwrap();
        let b = make_cubic_bilinear(50, 1.0 / (20.0 * 50.0), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rho(), 1e-3);
        assert!(a.b().iter().all(|v| (-1.0..=1.0).contains(v)));
        let c = make_cubic_bilinear(50, 1e-3, 43).unwrap();
        assert_ne!(a.b(), c.b());
    }

    #[test]
    fn saddle_of_small_instance() {
        let inst = CubicBilinearInstance::with_b(0.3, vec![1.0, 1.0]).unwrap();
        let s = inst.saddle();
        assert_eq!(s.x(), &[2.0, 1.0]);
        assert_eq!(inst.apply_a(s.x()), vec![1.0, 1.0]);
    }

    #[test]
    fn zero_b_gives_zero_saddle() {
        let inst = CubicBilinearInstance::with_b(0.3, vec![0.0; 5]).unwrap();
        assert!(inst.saddle().coords().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn operator_vanishes_at_saddle() {
        for seed in 0..5 {
            let inst = make_cubic_bilinear(40, 1.0 / 800.0, seed).unwrap();
            let f = operator_value(&inst, &inst.saddle()).unwrap();
            assert!(norm(&f) <= 1e-10 * (1.0 + norm(inst.b())));
        }
    }

    #[test]
    fn substitution_matches_dense_solve() {
        let inst = make_cubic_bilinear(15, 0.01, 3).unwrap();
        let a = inst.matrix_a();
        let dense = direct_solve(&a, inst.b()).unwrap();
        let sub = inst.solve_a(inst.b());
        assert!(crate::numerics::distance(&dense, &sub) < 1e-12);
        let dense_t = direct_solve(&a.transpose(), inst.b()).unwrap();
        assert!(crate::numerics::distance(&dense_t, &inst.solve_at(inst.b())) < 1e-12);
    }

    #[test]
    fn hessian_lipschitz_in_x_block() {
        let inst = make_cubic_bilinear(6, 0.2, 1).unwrap();
        for k in 0..20 {
            let z: Vec<f64> = (0..12).map(|i| ((i * 7 + k * 3) as f64 * 0.9).sin() * 2.0).collect();
            let w: Vec<f64> = (0..12).map(|i| ((i * 5 + k * 11) as f64 * 0.4).cos()).collect();
            let mut d = inst.hessian(&z);
            d.add_scaled(-1.0, &inst.hessian(&w)).unwrap();
            let lhs = d.spectral_norm(200);
            assert!(lhs <= inst.rho() * crate::numerics::distance(&z, &w) + 1e-8);
        }
    }

    #[test]
    fn ball_min_is_feasible_and_stationary() {
        let rho = 0.3;
        let q = [1.0, -2.0, 0.5];
        let center = [3.0, 0.0, -1.0];
        let x = cubic_linear_ball_min(rho, &q, &center, 0.5);
        assert!(crate::numerics::distance(&x, &center) <= 0.5 + 1e-12);
        // unconstrained case: gradient vanishes
        let x = cubic_linear_ball_min(rho, &q, &[0.0; 3], 100.0);
        let g: Vec<f64> = cubic_gradient(rho, &x).iter().zip(&q).map(|(a, b)| a + b).collect();
        assert!(norm(&g) < 1e-12);
    }
}
