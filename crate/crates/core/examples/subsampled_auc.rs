//! AUC maximization with subsampled Hessians against SEG and SOGDA at the same
//! epoch budget. Uses `$A9A_PATH` when set, otherwise a synthetic a9a-shaped set.
//!
//! `cargo run --release --example subsampled_auc`

use saddle_newton::harness::{run_auc_experiment, AucOptions, ProblemSpec};
use saddle_newton::solvers::Algorithm;

fn main() -> saddle_newton::Result<()> {
    let spec = ProblemSpec::Auc {
        dataset: None,
        subset: Some(500),
        rho: None,
        synthetic_rows: 500,
        data_seed: 0,
    };
    let algos = [Algorithm::SubsampledNewton, Algorithm::Seg, Algorithm::Sogda];
    let exp = run_auc_experiment(&spec, &algos, &AucOptions::default())?;
    println!("{} (N={}), epoch budget {:.1}", exp.label, exp.components, exp.epoch_budget);
    for run in &exp.runs {
        let s = &run.summary;
        println!(
            "{:<18} iters {:>5}  epochs {:>7.1}  |F| {:.3e}  samples {:>7}  step_c {}",
            s.algorithm,
            s.iterations,
            s.epochs,
            s.final_grad_norm,
            s.samples,
            run.step_c.map_or("-".to_string(), |c| format!("{c}"))
        );
    }
    let sub = &exp.run(Algorithm::SubsampledNewton).unwrap().result;
    let sizes: Vec<usize> = sub.trace.iter().take(12).map(|r| r.samples).collect();
    println!("first Hessian sample sizes: {sizes:?}");
    Ok(())
}
