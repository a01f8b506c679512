//! One cubic-regularized saddle subproblem, solved by mirror-prox alone and by
//! the mirror-prox + semismooth Newton pipeline.

use saddle_newton::numerics::{norm, DenseMatrix};
use saddle_newton::subproblem::{
    cone_residual, gmp_solve, model_gradient, solve_cubic_subproblem, CubicSubproblem, SocPoint, SolveTarget,
    SubproblemOptions,
};

fn main() -> saddle_newton::Result<()> {
    let (m, n) = (3, 2);
    // convex in x, concave in y, coupled
    let h = DenseMatrix::from_rows(&[
        vec![2.0, 0.3, 0.0, 1.0, -0.5],
        vec![0.3, 1.0, 0.2, 0.0, 0.7],
        vec![0.0, 0.2, 0.5, 0.4, 0.0],
        vec![1.0, 0.0, 0.4, -1.5, 0.1],
        vec![-0.5, 0.7, 0.0, 0.1, -0.8],
    ]);
    let g = vec![1.0, -2.0, 0.5, 0.3, -1.2];
    let sp = CubicSubproblem::new(g, h, 0.25, m, n)?;

    let residual = |dz: &[f64]| norm(&cone_residual(&sp, &SocPoint::lift(dz, m).to_flat()));
    for iters in [10, 100, 1000] {
        let out = gmp_solve(&sp, &[0.0; 5], iters, 0.0);
        println!(
            "mirror-prox {iters:>5} steps: |grad m| {:.3e}  |E| {:.3e}",
            norm(&model_gradient(&sp, &out.average)),
            residual(&out.average)
        );
    }

    let sol = solve_cubic_subproblem(&sp, SolveTarget::Exact, &SubproblemOptions::default());
    println!(
        "pipeline: status {:?}, {} mirror-prox + {} Newton steps, |grad m| {:.3e}",
        sol.status, sol.gmp_iters, sol.ssn_iters, sol.model_grad_norm
    );
    println!("dz = {:?}", sol.dz.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>());
    Ok(())
}
