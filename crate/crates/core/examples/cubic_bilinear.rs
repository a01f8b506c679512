//! Exact Newton extragradient on the cubic-regularized bilinear game, with the
//! restricted gap of the averaged iterate printed next to its theorem curve.
//!
//! `cargo run --release --example cubic_bilinear -- 50`

use saddle_newton::harness::theorem_bound;
use saddle_newton::problems::make_cubic_bilinear;
use saddle_newton::saddle::JointPoint;
use saddle_newton::solvers::{newton_minmax, Algorithm, GapTracking, SolverConfig};

fn main() -> saddle_newton::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let rho = 1.0 / (20.0 * n as f64);
    let problem = make_cubic_bilinear(n, rho, 0)?;
    let z0 = JointPoint::zeros(n, n)?;
    let saddle = problem.saddle();
    let radius = z0.distance(&saddle);
    let tracking = GapTracking::with_radius_factor(saddle, &z0, 7.0)?;

    let result = newton_minmax(&problem, &z0, &SolverConfig::new(rho, 100), Some(&tracking))?;
    println!("n={n} rho={rho:.3e} |z0-z*|={radius:.4}  status {:?}", result.status);
    println!("{:>4} {:>12} {:>12} {:>12}", "T", "gap", "bound", "|F(z_T)|");
    for row in &result.trace {
        if row.iter <= 5 || row.iter % 5 == 0 || row.iter == result.trace.len() {
            let bound = theorem_bound(Algorithm::Newton, rho, radius, row.iter).unwrap();
            println!("{:>4} {:>12.4e} {:>12.4e} {:>12.4e}", row.iter, row.gap.unwrap(), bound, row.grad_norm);
        }
    }
    Ok(())
}
