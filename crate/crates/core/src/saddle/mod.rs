//! Joint points, the saddle operator `F = (∇_x f, −∇_y f)`, its Jacobian,
//! ergodic averaging and the restricted gap.

mod gap;
mod operator;
mod point;

pub use gap::{restricted_gap, GapConfig, GapValue};
pub use operator::{
    average_iterates, operator_at, operator_jacobian, operator_value, weighted_regret,
    OperatorJacobian, SaddleOperator, SaddleProblem,
};
pub use point::JointPoint;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_jacobian, norm, DenseMatrix};
    use crate::problems::{make_cubic_bilinear, make_random_cc_quadratic, QuadraticProblem};

    fn scalar_quadratic(p: f64, q: f64, r: f64) -> QuadraticProblem {
        QuadraticProblem::new(
            DenseMatrix::from_rows(&[vec![p]]),
            DenseMatrix::from_rows(&[vec![q]]),
            DenseMatrix::from_rows(&[vec![r]]),
            vec![0.0],
            vec![0.0],
        )
        .unwrap()
    }

    fn pt(x: f64, y: f64) -> JointPoint {
        JointPoint::new(1, 1, vec![x, y]).unwrap()
    }

    #[test]
    fn bilinear_operator_value() {
        // f = x·y
        let f = scalar_quadratic(0.0, 1.0, 0.0);
        assert_eq!(operator_value(&f, &pt(2.0, 3.0)).unwrap(), vec![3.0, -2.0]);
    }

    #[test]
    fn quadratic_operator_value() {
        // f = x²/2 − y²/2
        let f = scalar_quadratic(1.0, 0.0, 1.0);
        assert_eq!(operator_value(&f, &pt(1.0, 1.0)).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn operator_vanishes_at_cubic_bilinear_saddle() {
        let inst = make_cubic_bilinear(20, 1.0 / 400.0, 7).unwrap();
        let saddle = inst.saddle();
        let f = operator_value(&inst, &saddle).unwrap();
        assert!(norm(&f) <= 1e-10 * (1.0 + norm(inst.b())));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = scalar_quadratic(1.0, 0.0, 1.0);
        let z = JointPoint::new(2, 1, vec![0.0; 3]).unwrap();
        assert!(operator_value(&f, &z).is_err());
        assert!(operator_jacobian(&f, &z).is_err());
    }

    #[test]
    fn jacobians_of_scalar_toys() {
        let bilinear = scalar_quadratic(0.0, 1.0, 0.0);
        let j = operator_jacobian(&bilinear, &pt(0.3, -0.2)).unwrap();
        assert_eq!(j.entries, DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]));
        let quad = scalar_quadratic(1.0, 0.0, 1.0);
        let j = operator_jacobian(&quad, &pt(0.3, -0.2)).unwrap();
        assert_eq!(j.entries, DenseMatrix::identity(2));
    }

    #[test]
    fn cubic_bilinear_jacobian_matches_finite_differences() {
        let inst = make_cubic_bilinear(6, 0.05, 11).unwrap();
        let z = JointPoint::new(6, 6, (0..12).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let analytic = operator_jacobian(&inst, &z).unwrap().entries;
        let fd = finite_diff_jacobian(|c| operator_at(&inst, c), z.coords(), 1e-5);
        let scale = analytic.frobenius_norm();
        assert!(analytic.max_abs_diff(&fd) <= 1e-5 * scale);
        // diagonal blocks of DF are symmetric
        assert!(analytic.block(0, 0, 6, 6).is_symmetric(1e-14));
        assert!(analytic.block(6, 6, 6, 6).is_symmetric(1e-14));
    }

    #[test]
    fn averaging_examples() {
        let a = pt(0.0, 0.0);
        let b = pt(2.0, 2.0);
        assert_eq!(average_iterates(&[b.clone()], &[0.3]).unwrap(), b);
        assert_eq!(
            average_iterates(&[a, b], &[1.0, 1.0]).unwrap().coords(),
            &[1.0, 1.0]
        );
        let avg = average_iterates(&[pt(1.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0)], &[1.0, 2.0, 3.0])
            .unwrap();
        assert!((avg.x()[0] - 4.0 / 6.0).abs() < 1e-15);
        assert!((avg.y()[0] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn averaging_rejects_bad_input() {
        assert!(average_iterates(&[], &[]).is_err());
        assert!(average_iterates(&[pt(0.0, 0.0)], &[0.0]).is_err());
        assert!(average_iterates(&[pt(0.0, 0.0)], &[-1.0]).is_err());
        assert!(average_iterates(&[pt(0.0, 0.0)], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn regret_definitions() {
        let f = make_random_cc_quadratic(2, 2, 3).unwrap();
        let z = JointPoint::new(2, 2, vec![0.1, -0.4, 0.9, 0.2]).unwrap();
        let r = weighted_regret(&f, &[z.clone(), z.clone()], &[1.0, 5.0], &z).unwrap();
        assert_eq!(r, 0.0);
        let z1 = JointPoint::new(2, 2, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let direct = {
            let fz = operator_value(&f, &z1).unwrap();
            crate::numerics::dot(&crate::numerics::sub(z1.coords(), z.coords()), &fz)
        };
        let r = weighted_regret(&f, &[z1], &[1.0], &z).unwrap();
        assert!((r - direct).abs() < 1e-15);
    }

    #[test]
    fn gap_vanishes_at_saddle() {
        let inst = make_cubic_bilinear(10, 0.005, 5).unwrap();
        let saddle = inst.saddle();
        let g = restricted_gap(&inst, &saddle, &saddle, &GapConfig::new(3.0)).unwrap();
        assert!(g.value.abs() <= 1e-9, "gap {}", g.value);

        let quad = make_random_cc_quadratic(3, 2, 9).unwrap();
        let s = quad.saddle().unwrap();
        let g = restricted_gap(&quad, &s, &s, &GapConfig::new(1.0)).unwrap();
        assert!(g.converged);
        assert!(g.value.abs() <= 1e-9);
    }

    #[test]
    fn gap_of_scalar_quadratic() {
        // f = x²/2 − y²/2, candidate (1, 0), center 0, β = 2: gap = 1/2 − 0
        let f = scalar_quadratic(1.0, 0.0, 1.0);
        let g = restricted_gap(&f, &pt(1.0, 0.0), &pt(0.0, 0.0), &GapConfig::new(2.0)).unwrap();
        assert!(g.converged);
        assert!((g.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cubic_bilinear_max_term_vanishes_when_x_is_optimal() {
        // at x̂ = x* = A⁻¹b the y-linear term disappears
        let inst = make_cubic_bilinear(8, 0.01, 3).unwrap();
        let saddle = inst.saddle();
        let beta = 2.5;
        let y_any: Vec<f64> = (0..8).map(|i| (i as f64) - 3.0).collect();
        let candidate = JointPoint::from_blocks(saddle.x(), &y_any).unwrap();
        let closed = inst
            .max_over_y_ball(candidate.x(), saddle.y(), beta)
            .unwrap();
        let cubic = inst.rho() / 6.0 * norm(saddle.x()).powi(3);
        assert!((closed - cubic).abs() < 1e-10);

        // generic projected-gradient path agrees with the closed form
        let generic = QuadraticLike(&inst);
        let g = restricted_gap(&generic, &candidate, &saddle, &GapConfig::new(beta)).unwrap();
        assert!((g.max_term - closed).abs() < 1e-7, "{} vs {}", g.max_term, closed);
    }

    #[test]
    fn cubic_bilinear_min_term_closed_form_matches_projected_gradient() {
        let inst = make_cubic_bilinear(6, 0.05, 21).unwrap();
        let saddle = inst.saddle();
        let candidate = JointPoint::new(6, 6, (0..12).map(|i| (i as f64 * 0.71).cos()).collect()).unwrap();
        for beta in [0.1, 1.0, 50.0] {
            let closed = inst.min_over_x_ball(candidate.y(), saddle.x(), beta).unwrap();
            let mut cfg = GapConfig::new(beta);
            cfg.inner_iters = 200_000;
            cfg.inner_tol = 1e-11;
            let g = restricted_gap(&QuadraticLike(&inst), &candidate, &saddle, &cfg).unwrap();
            assert!((g.min_term - closed).abs() < 1e-7 * (1.0 + closed.abs()), "beta {beta}: {} vs {closed}", g.min_term);
        }
    }

    /// Hides the closed forms so the projected-gradient path is exercised.
    struct QuadraticLike<'a>(&'a crate::problems::CubicBilinearInstance);

    impl SaddleProblem for QuadraticLike<'_> {
        fn dims(&self) -> (usize, usize) {
            self.0.dims()
        }
        fn value(&self, z: &[f64]) -> f64 {
            self.0.value(z)
        }
        fn gradient(&self, z: &[f64]) -> Vec<f64> {
            self.0.gradient(z)
        }
        fn hessian(&self, z: &[f64]) -> DenseMatrix {
            self.0.hessian(z)
        }
    }
}
