//! Inexact Newton extragradient: subproblems are only solved to the accuracy
//! `‖∇m(Δz)‖ ≤ κ_m·min{‖Δz‖², ‖∇f(ẑ)‖}`. Prints each solve's certificate.

use saddle_newton::problems::make_random_cc_quadratic;
use saddle_newton::saddle::{JointPoint, SaddleProblem};
use saddle_newton::solvers::{inexact_newton_minmax, ExactHessian, SolverConfig};

fn main() -> saddle_newton::Result<()> {
    let problem = make_random_cc_quadratic(6, 4, 11)?;
    let (m, n) = problem.dims();
    let mut z0 = JointPoint::zeros(m, n)?;
    z0.coords_mut().iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64 * 0.7).sin() * 3.0);

    let mut cfg = SolverConfig::new(0.05, 60);
    cfg.kappa_m = 0.1;
    let mut hessians = ExactHessian::new(&problem);
    let result = inexact_newton_minmax(&problem, &z0, &cfg, &mut hessians, None)?;

    println!("{:>3} {:>11} {:>11} {:>11} {:>6}", "k", "|grad m|", "bound", "|F(z_k)|", "iters");
    for (row, rec) in result.trace.iter().zip(&result.subproblems) {
        println!(
            "{:>3} {:>11.3e} {:>11.3e} {:>11.3e} {:>6}",
            row.iter, rec.model_grad_norm, rec.threshold, row.grad_norm, row.subproblem_iters
        );
    }
    let saddle = problem.saddle()?;
    println!("status {:?}, distance to saddle {:.3e}", result.status, result.last.distance(&saddle));
    Ok(())
}
