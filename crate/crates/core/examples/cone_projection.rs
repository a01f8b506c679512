//! Projection onto the second-order cone `{(w, t): ‖w‖ ≤ t}` and an element of
//! its generalized Jacobian, in each of the three regions.

use saddle_newton::subproblem::{cone_projection_jacobian, project_cone};

fn main() {
    let cases = [
        ("inside", vec![0.3, -0.4], 1.0),
        ("polar", vec![1.0, 0.0], -2.0),
        ("boundary band", vec![1.0, 0.0], 0.0),
        ("boundary band", vec![3.0, 4.0], 1.0),
    ];
    for (label, wx, wu) in cases {
        let (px, pu) = project_cone(&wx, wu);
        println!("{label:<14} w=({wx:?}, {wu}) -> ({px:?}, {pu})");
        let j = cone_projection_jacobian(&wx, wu);
        for r in 0..j.rows() {
            println!("{:>16}{:?}", "", j.row(r));
        }
    }
}
