//! Extragradient and optimistic gradient on a bilinear game, then their
//! stochastic versions on a finite sum.

use saddle_newton::problems::{make_glm_sum, GlmSumOptions, QuadraticProblem};
use saddle_newton::numerics::DenseMatrix;
use saddle_newton::saddle::JointPoint;
use saddle_newton::solvers::{eg_solve, ogda_solve, seg_solve, sogda_solve, StepRule, StochasticSettings};

fn main() -> saddle_newton::Result<()> {
    // f(x, y) = xᵀQy − cxᵀx + cyᵀy
    let q = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![-0.3, 2.0]]);
    let bilinear = QuadraticProblem::new(DenseMatrix::zeros(2, 2), q, DenseMatrix::zeros(2, 2), vec![1.0, -1.0], vec![0.5, 0.0])?;
    let z0 = JointPoint::zeros(2, 2)?;
    let rule = StepRule::Constant(0.2);
    for (name, result) in [
        ("eg", eg_solve(&bilinear, &z0, rule, 500, None)?),
        ("ogda", ogda_solve(&bilinear, &z0, rule, 500, None)?),
    ] {
        println!("{name:<6} |F(z_T)| after 500 steps: {:.3e}", result.final_grad_norm());
    }

    let fs = make_glm_sum(1000, 5, 5, GlmSumOptions::default(), 1)?;
    let z0 = JointPoint::zeros(5, 5)?;
    let settings = StochasticSettings::new(32, StepRule::Decaying(0.5), 9);
    for (name, result) in [
        ("seg", seg_solve(&fs, &z0, &settings, 2000, None)?),
        ("sogda", sogda_solve(&fs, &z0, &settings, 2000, None)?),
    ] {
        println!(
            "{name:<6} |F(z_T)| {:.3e} after {:.1} epochs",
            result.final_grad_norm(),
            result.epochs.last().unwrap()
        );
    }
    Ok(())
}
