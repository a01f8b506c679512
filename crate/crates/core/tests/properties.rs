use proptest::prelude::*;
use saddle_newton::harness::{parse_trace_str, render_trace, TraceFormat, TraceHeader};
use saddle_newton::numerics::{dot, norm, sub};
use saddle_newton::rng::{stream, streams};
use saddle_newton::sampling::SamplingPlan;
use saddle_newton::solvers::{select_lambda, IterateTrace, LambdaWindow};
use saddle_newton::subproblem::{cubic_prox, project_cone};

fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn joined(x: &[f64], t: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    out.push(t);
    out
}

proptest! {
    #[test]
    fn cone_projection_is_feasible_and_idempotent(wx in vec_strategy(4), wu in -10.0f64..10.0) {
        let (px, pu) = project_cone(&wx, wu);
        prop_assert!(norm(&px) <= pu * (1.0 + 1e-12) + 1e-12);
        let (qx, qu) = project_cone(&px, pu);
        prop_assert!(norm(&sub(&qx, &px)) <= 1e-12 * (1.0 + norm(&px)));
        prop_assert!((qu - pu).abs() <= 1e-12 * (1.0 + pu.abs()));
    }

    #[test]
    fn cone_projection_moreau_decomposition(wx in vec_strategy(3), wu in -10.0f64..10.0) {
        // w = P_K(w) + P_{K°}(w) with the two parts orthogonal; K° = −K for the second-order cone
        let (px, pu) = project_cone(&wx, wu);
        let neg: Vec<f64> = wx.iter().map(|v| -v).collect();
        let (nx, nu) = project_cone(&neg, -wu);
        let p = joined(&px, pu);
        let q = joined(&nx, nu);
        let w = joined(&wx, wu);
        let scale = 1.0 + norm(&w);
        for i in 0..w.len() {
            prop_assert!((p[i] - q[i] - w[i]).abs() <= 1e-12 * scale);
        }
        prop_assert!(dot(&p, &q).abs() <= 1e-10 * scale * scale);
    }

    #[test]
    fn cubic_prox_zeroes_the_gradient(v in vec_strategy(5), ell in 0.01f64..100.0, rho in 1e-4f64..10.0) {
        let x = cubic_prox(&v, ell, rho);
        let nx = norm(&x);
        // gradient of −ℓvᵀx + (ℓ/2)‖x‖² + 2ρ‖x‖³
        let g: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| -ell * vi + ell * xi + 6.0 * rho * nx * xi).collect();
        prop_assert!(norm(&g) <= 1e-10 * (1.0 + ell * norm(&v)));
    }

    #[test]
    fn selected_lambda_sits_inside_both_windows(step in 1e-6f64..1e6, rho in 1e-6f64..1e3) {
        for window in [LambdaWindow::EXACT, LambdaWindow::INEXACT] {
            let lambda = select_lambda(step, rho, window).unwrap();
            let scaled = lambda * rho * step;
            prop_assert!(scaled >= window.lo * (1.0 - 1e-12) && scaled <= window.hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn trace_round_trips_through_csv_and_json(
        rows in prop::collection::vec(
            (1usize..10_000, -1e3f64..1e3, 0.0f64..1e6, prop::option::of(0.0f64..1e6), 0usize..1000),
            1..20,
        )
    ) {
        let rows: Vec<IterateTrace> = rows
            .into_iter()
            .map(|(iter, lambda, grad, gap, samples)| IterateTrace {
                iter,
                time_s: None,
                lambda,
                step_norm: grad / 3.0,
                grad_norm: grad,
                gap,
                hat_dist: grad.sqrt(),
                samples,
                subproblem_iters: samples / 2,
            })
            .collect();
        let header = TraceHeader::new("newton", "prop", 1, "max_iters", serde_json::json!({"iters": 3}));
        for format in [TraceFormat::Csv, TraceFormat::Json] {
            let bytes = render_trace(&rows, &header, format).unwrap();
            let back = parse_trace_str(std::str::from_utf8(&bytes).unwrap(), format).unwrap();
            prop_assert_eq!(&back.rows, &rows);
            if format == TraceFormat::Json {
                prop_assert_eq!(back.header.as_ref(), Some(&header));
            }
        }
    }

    #[test]
    fn sampled_indices_stay_in_range(components in 1usize..50, size in 1usize..80, seed in any::<u64>()) {
        let mut rng = stream(seed, streams::HESSIAN_SAMPLING);
        let plan = SamplingPlan::uniform(components, size).unwrap();
        let draw = plan.draw(&mut rng);
        prop_assert_eq!(draw.len(), size);
        prop_assert!(draw.iter().all(|&i| i < components));

        if size <= components {
            let mut draw = plan.without_replacement().unwrap().draw(&mut rng);
            draw.sort_unstable();
            draw.dedup();
            prop_assert_eq!(draw.len(), size);
        }

        let mut probs: Vec<f64> = (1..=components).map(|i| i as f64).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let fix = 1.0 - probs.iter().sum::<f64>();
        probs[0] += fix;
        let plan = SamplingPlan::nonuniform(probs, size).unwrap();
        prop_assert!(plan.draw(&mut rng).iter().all(|&i| i < components));
    }
}
