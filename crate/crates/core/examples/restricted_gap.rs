//! The restricted gap `max_{y∈B_β(y*)} f(x̂,y) − min_{x∈B_β(x*)} f(x,ŷ)` along a
//! segment from the origin to the saddle, in closed form and by projected gradient.

use saddle_newton::problems::{make_cubic_bilinear, make_random_cc_quadratic};
use saddle_newton::saddle::{restricted_gap, GapConfig, JointPoint, SaddleProblem};

fn main() -> saddle_newton::Result<()> {
    let cubic = make_cubic_bilinear(10, 0.005, 2)?;
    let quad = make_random_cc_quadratic(4, 3, 5)?;
    let cases: [(&str, &dyn SaddleProblem, JointPoint); 2] =
        [("cubic bilinear", &cubic, cubic.saddle()), ("quadratic", &quad, quad.saddle()?)];
    for (name, problem, saddle) in cases {
        let (m, n) = problem.dims();
        let beta = 2.0 * saddle.coords().iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        println!("{name} (beta = {beta:.3})");
        for t in [0.0, 0.5, 0.9, 0.99, 1.0] {
            let coords = saddle.coords().iter().map(|v| t * v).collect();
            let gap = restricted_gap(problem, &JointPoint::new(m, n, coords)?, &saddle, &GapConfig::new(beta))?;
            println!("  t={t:<5} gap {:.6e}  (inner residual {:.1e})", gap.value, gap.residual);
        }
    }
    Ok(())
}
