use saddle_newton::harness::{
    run_auc_experiment, run_cubic_experiment, AucOptions, CubicOptions, ProblemSpec,
};
use saddle_newton::problems::{
    make_auc_problem, parse_libsvm, scale_features, synthetic_a9a_like, write_libsvm, FiniteSum,
};
use saddle_newton::saddle::{JointPoint, SaddleProblem};
use saddle_newton::solvers::{
    inexact_newton_minmax, subsampled_newton_minmax, Algorithm, ExactHessian, SampleSizeRule, SolverConfig,
    SubsampledSettings,
};
use saddle_newton::sampling::SamplingScheme;

fn small_auc() -> saddle_newton::problems::AucProblem {
    let (ds, _) = scale_features(&synthetic_a9a_like(80, 3)).unwrap();
    make_auc_problem(&ds, 1.0 / 80.0).unwrap()
}

#[test]
fn full_batch_sampling_reproduces_the_exact_hessian_run() {
    let p = small_auc();
    let (m, n) = p.dims();
    let z0 = JointPoint::zeros(m, n).unwrap();
    let cfg = SolverConfig::new(p.rho(), 25);
    let exact = inexact_newton_minmax(&p, &z0, &cfg, &mut ExactHessian::finite_sum(&p), None).unwrap();
    let settings = SubsampledSettings {
        scheme: SamplingScheme::Uniform,
        rule: SampleSizeRule::Fixed(p.num_components()),
        with_replacement: false,
    };
    let sampled = subsampled_newton_minmax(&p, &z0, &cfg, settings, None).unwrap();
    assert_eq!(exact.iterates, sampled.iterates);
    assert_eq!(exact.lambdas(), sampled.lambdas());
    assert_eq!(exact.averaged, sampled.averaged);
}

#[test]
fn newton_beats_extragradient_on_the_cubic_benchmark() {
    let opts = CubicOptions::default();
    let exp = run_cubic_experiment(20, &[Algorithm::Newton, Algorithm::Eg], &opts).unwrap();
    let gap = |a| {
        exp.run(a).unwrap().result.trace.last().unwrap().gap.expect("gap is tracked")
    };
    assert!(gap(Algorithm::Newton) < gap(Algorithm::Eg), "{} vs {}", gap(Algorithm::Newton), gap(Algorithm::Eg));
}

#[test]
fn larger_cubic_instances_stay_within_the_bound() {
    for n in [100, 200] {
        let opts = CubicOptions { iters: 20, ..CubicOptions::default() };
        let exp = run_cubic_experiment(n, &[Algorithm::Newton, Algorithm::InexactNewton], &opts).unwrap();
        for run in &exp.runs {
            assert!(!run.result.is_aborted(), "n={n} {:?} aborted", run.result.algorithm);
            assert!(run.result.final_grad_norm() < run.result.initial_grad_norm);
        }
        assert!(exp.bound_violations().is_empty(), "n={n}: {:?}", exp.bound_violations());
    }
}

#[test]
fn single_class_dataset_runs_and_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.libsvm");
    std::fs::write(&path, "-1 1:0.5 2:1\n-1 2:0.25 3:1\n-1 1:1\n-1 3:0.75\n").unwrap();
    let spec = ProblemSpec::Auc {
        dataset: Some(path),
        subset: None,
        rho: None,
        synthetic_rows: 10,
        data_seed: 0,
    };
    let opts = AucOptions { iters: 5, track_gap: true, ..AucOptions::default() };
    let exp = run_auc_experiment(&spec, &[Algorithm::InexactNewton], &opts).unwrap();
    assert!(exp.degenerate);
    assert!(exp.runs[0].summary.degenerate);
}

#[test]
fn libsvm_write_then_parse_round_trips() {
    let ds = synthetic_a9a_like(40, 9);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.libsvm");
    write_libsvm(&ds, &path, None).unwrap();
    let back = parse_libsvm(&path).unwrap();
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.rows, ds.rows);
    assert!(back.num_features <= ds.num_features);
}

#[test]
fn subsampled_newton_drives_the_auc_operator_down() {
    let p = small_auc();
    let (m, n) = p.dims();
    let z0 = JointPoint::zeros(m, n).unwrap();
    let mut cfg = SolverConfig::new(p.rho(), 300);
    cfg.stop_tol = Some(1e-8);
    let r = subsampled_newton_minmax(&p, &z0, &cfg, SubsampledSettings::default(), None).unwrap();
    assert!(r.final_grad_norm() <= 1e-8, "{}", r.final_grad_norm());
}
