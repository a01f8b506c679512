//! Subsampled Hessians of a generalized-linear finite sum: theoretical sample
//! sizes, and the observed error as the sample grows.

use saddle_newton::problems::{make_glm_sum, FiniteSum, GlmSumOptions};
use saddle_newton::rng::{stream, streams};
use saddle_newton::saddle::SaddleProblem;
use saddle_newton::sampling::{
    bound_summary, nonuniform_probs, nonuniform_sample_size, subsampled_hessian, uniform_sample_size, SamplingPlan,
};

fn main() -> saddle_newton::Result<()> {
    let opts = GlmSumOptions {
        norm_spread: 1.5,
        ..Default::default()
    };
    let fs = make_glm_sum(400, 4, 3, opts, 3)?;
    let (m, n) = fs.dims();
    let z = vec![0.2; m + n];
    let exact = fs.hessian(&z);

    let (b_max, _) = bound_summary(&fs.component_hessian_bounds());
    let probs = nonuniform_probs(&fs, &z).probs;
    let b_avg = (0..fs.num_components()).map(|i| fs.glm_term(i, &z).unwrap().weight()).sum::<f64>() / 400.0;
    for tau in [0.5, 0.2, 0.1] {
        println!(
            "tau={tau}: uniform size {}, nonuniform size {}",
            uniform_sample_size(b_max, tau, 0.01, m, n)?,
            nonuniform_sample_size(b_avg, tau, 0.01, m, n)?
        );
    }

    let mut rng = stream(7, streams::HESSIAN_SAMPLING);
    println!("{:>6} {:>14} {:>14}", "|S|", "uniform err", "nonuniform err");
    for size in [4, 16, 64, 256, 1024] {
        let mut errs = [0.0; 2];
        let plans = [SamplingPlan::uniform(400, size)?, SamplingPlan::nonuniform(probs.clone(), size)?];
        for (err, plan) in errs.iter_mut().zip(&plans) {
            for _ in 0..50 {
                let mut d = subsampled_hessian(&fs, &z, plan, &mut rng).matrix;
                d.add_scaled(-1.0, &exact)?;
                *err += d.spectral_norm(100) / 50.0;
            }
        }
        println!("{size:>6} {:>14.4e} {:>14.4e}", errs[0], errs[1]);
    }
    Ok(())
}
