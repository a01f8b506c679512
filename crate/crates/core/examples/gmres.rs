//! Restarted GMRES against dense elimination on a nonsymmetric system.

use rand::{Rng, SeedableRng};
use saddle_newton::numerics::{direct_solve, distance, krylov_solve, norm, DenseMatrix};

fn main() -> saddle_newton::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let dim = 150;
    let mut a = DenseMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0) / (dim as f64).sqrt());
    a.add_diagonal(2.0);
    let rhs: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let exact = direct_solve(&a, &rhs)?;
    for restart in [5, 20, 50] {
        let out = krylov_solve(|v| a.matvec(v), &rhs, 1e-10, restart, 2000);
        println!(
            "restart {restart:>3}: {:>4} steps, converged {}, residual {:.2e}, error {:.2e}",
            out.iterations,
            out.converged,
            out.residual_norm / norm(&rhs),
            distance(&out.solution, &exact)
        );
    }
    Ok(())
}
