//! Configured runs written as CSV and JSON traces, read back, and replayed
//! against the per-iteration invariants.

use saddle_newton::harness::{
    parse_trace, replay_invariants, run_experiment, ExperimentConfig, InvariantKind, ProblemSpec, TraceFormat,
};
use saddle_newton::solvers::Algorithm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("saddle_newton_traces");
    std::fs::create_dir_all(&dir)?;
    for (algorithm, format) in [(Algorithm::Newton, TraceFormat::Csv), (Algorithm::InexactNewton, TraceFormat::Json)] {
        let mut cfg = ExperimentConfig::new(ProblemSpec::CubicBilinear { n: 8, rho: None }, algorithm);
        cfg.iters = 25;
        cfg.format = format;
        let path = dir.join(format!("{}.{}", algorithm.name(), format.extension()));
        cfg.output = Some(path.clone());
        let run = run_experiment(&cfg)?.remove(0);

        let back = parse_trace(&path, format)?;
        assert_eq!(back.rows, run.result.trace);
        let kind = if algorithm == Algorithm::Newton { InvariantKind::Exact } else { InvariantKind::Inexact };
        let violations = replay_invariants(&back.rows, run.rho, run.radius.unwrap(), kind);
        println!(
            "{}: {} rows, final gap {:.3e}, slope {:?}, {} invariant violations",
            path.display(),
            back.rows.len(),
            run.summary.final_gap.unwrap(),
            run.summary.slope.map(|s| (s * 100.0).round() / 100.0),
            violations.len()
        );
    }
    Ok(())
}
