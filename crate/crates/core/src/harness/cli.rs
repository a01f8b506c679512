use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng as _, SeedableRng};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm};
use crate::solvers::{Algorithm, SolverStatus};
use crate::subproblem::{project_cone, SubproblemStatus};

use super::config::{ExperimentConfig, ProblemSpec, SamplingChoice};
use super::experiments::{
    run_auc_experiment, run_cubic_experiment, run_experiment, AlgoRun, AucOptions, CubicOptions,
};
use super::trace::{parse_trace_str, render_trace, TraceFormat};

#[derive(Parser, Debug)]
#[command(name = "minmax-bench", version, about = "Newton extragradient benchmark harness for convex-concave min-max problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one configuration.
    Run(RunArgs),
    /// Run a grid of configurations in parallel.
    Sweep(SweepArgs),
    /// Cubic-regularized bilinear benchmark with theorem-bound checks.
    ReproCubic(CubicArgs),
    /// AUC maximization benchmark comparing Newton-type and stochastic methods.
    ReproAuc(AucArgs),
    /// Invariant suite over built-in fixtures.
    Check,
}

#[derive(Args, Debug, Clone, Default)]
struct ProblemFlags {
    /// cubic_bilinear | auc | quadratic | glm_sum
    #[arg(long)]
    problem: Option<String>,
    /// Problem dimension.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// LIBSVM file for the AUC problem.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Keep the first rows of the dataset.
    #[arg(long)]
    subset: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct RunFlags {
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// uniform | nonuniform | empirical
    #[arg(long)]
    sampling: Option<String>,
    /// Sample uniform Hessian indices without replacement.
    #[arg(long)]
    without_replacement: bool,
    /// First-order step constant.
    #[arg(long)]
    step_c: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    /// Fill the time_s column (traces are then not byte-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    run: RunFlags,
    #[arg(long)]
    reps: Option<usize>,
    /// Trace file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON file: an array of configs, or {"base": config, "grid": {"algorithm": [...], "n": [...], "seed": [...]}}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    run: RunFlags,
    /// Number of consecutive seeds per grid point.
    #[arg(long)]
    reps: Option<usize>,
    /// Directory for trace files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CubicArgs {
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "newton,inexact-newton,eg")]
    algo: Vec<String>,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct AucArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    subset: usize,
    #[arg(long, value_delimiter = ',', default_value = "inexact-newton,subsampled-newton,seg,sogda")]
    algo: Vec<String>,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "empirical")]
    sampling: String,
    /// Sample uniform Hessian indices with replacement (the library default).
    #[arg(long)]
    with_replacement: bool,
    #[arg(long, default_value_t = 16)]
    batch: usize,
    /// Also evaluate restricted gaps against a numerically computed saddle.
    #[arg(long)]
    track_gap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    timing: bool,
}

/// Why a command failed.
enum Failure {
    /// Bad flags, config or input data.
    Config(String),
    /// A solver aborted, a check failed or output could not be written.
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::Empty(_)
            | Error::DimensionMismatch { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Entry point of the `minmax-bench` binary. Returns 0 on success, 1 on solver abort or failed
/// check, 2 on usage or configuration errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::ReproCubic(a) => cmd_repro_cubic(a),
        Command::ReproAuc(a) => cmd_repro_auc(a),
        Command::Check => cmd_check(),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn parse_algo(s: &str) -> Result<Algorithm> {
    s.trim().parse()
}

fn problem_from_flags(flags: &ProblemFlags) -> Result<ProblemSpec> {
    let kind = flags.problem.as_deref().unwrap_or("cubic_bilinear");
    Ok(match kind {
        "cubic_bilinear" | "cubic" => ProblemSpec::CubicBilinear {
            n: flags.n.unwrap_or(50),
            rho: flags.rho,
        },
        "auc" => ProblemSpec::Auc {
            dataset: flags.dataset.clone(),
            subset: flags.subset,
            rho: flags.rho,
            synthetic_rows: 500,
            data_seed: 0,
        },
        "quadratic" => ProblemSpec::Quadratic {
            m: flags.n.unwrap_or(5),
            n: flags.n.unwrap_or(5),
        },
        "glm_sum" | "glm" => ProblemSpec::GlmSum {
            components: flags.subset.unwrap_or(200),
            m: flags.n.unwrap_or(4),
            n: flags.n.unwrap_or(4),
        },
        other => return Err(Error::Config(format!("unknown problem '{other}'"))),
    })
}

fn apply_problem_flags(spec: &mut ProblemSpec, flags: &ProblemFlags) {
    match spec {
        ProblemSpec::CubicBilinear { n, rho } => {
            if let Some(v) = flags.n {
                *n = v;
            }
            if flags.rho.is_some() {
                *rho = flags.rho;
            }
        }
        ProblemSpec::Auc {
            dataset, subset, rho, ..
        } => {
            if flags.dataset.is_some() {
                *dataset = flags.dataset.clone();
            }
            if flags.subset.is_some() {
                *subset = flags.subset;
            }
            if flags.rho.is_some() {
                *rho = flags.rho;
            }
        }
        ProblemSpec::Quadratic { m, n } => {
            if let Some(v) = flags.n {
                *m = v;
                *n = v;
            }
        }
        ProblemSpec::GlmSum { components, m, n } => {
            if let Some(v) = flags.n {
                *m = v;
                *n = v;
            }
            if let Some(c) = flags.subset {
                *components = c;
            }
        }
    }
}

fn apply_run_flags(cfg: &mut ExperimentConfig, flags: &RunFlags) -> Result<()> {
    if let Some(v) = flags.iters {
        cfg.iters = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(f) = &flags.format {
        cfg.format = f.parse()?;
    }
    if let Some(s) = &flags.sampling {
        cfg.sampling = s.parse()?;
    }
    if flags.without_replacement {
        cfg.with_replacement = false;
    }
    if flags.step_c.is_some() {
        cfg.step_c = flags.step_c;
    }
    if let Some(b) = flags.batch {
        cfg.batch_size = b;
    }
    if flags.timing {
        cfg.timing = true;
    }
    Ok(())
}

fn build_run_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(
            problem_from_flags(&args.problem)?,
            parse_algo(args.algo.as_deref().unwrap_or("newton"))?,
        ),
    };
    if args.config.is_some() {
        apply_problem_flags(&mut cfg.problem, &args.problem);
        if let Some(a) = &args.algo {
            cfg.algorithm = parse_algo(a)?;
        }
    }
    apply_run_flags(&mut cfg, &args.run)?;
    if let Some(r) = args.reps {
        cfg.reps = r;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    if let Some(out) = &cfg.output {
        if args.run.format.is_none() {
            if let Some(f) = TraceFormat::from_path(out) {
                cfg.format = f;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(run: &AlgoRun) {
    println!("{}", serde_json::to_string(&run.summary).expect("summary serializes"));
}

fn aborted(runs: &[AlgoRun]) -> Option<String> {
    runs.iter().find_map(|r| match &r.result.status {
        SolverStatus::Aborted(msg) => Some(format!("{} aborted: {msg}", r.result.algorithm.name())),
        _ => None,
    })
}

fn cmd_run(args: RunArgs) -> CmdResult {
    let cfg = build_run_config(&args)?;
    let runs = run_experiment(&cfg)?;
    for run in &runs {
        if run.summary.degenerate {
            eprintln!("warning: single-class dataset, the AUC problem is degenerate");
        }
        print_summary(run);
    }
    match aborted(&runs) {
        Some(msg) => Err(Failure::Run(msg)),
        None => Ok(()),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SweepFile {
    List(Vec<ExperimentConfig>),
    Grid { base: ExperimentConfig, grid: SweepGrid },
}

#[derive(Deserialize, Default)]
struct SweepGrid {
    #[serde(default)]
    algorithm: Vec<Algorithm>,
    #[serde(default)]
    n: Vec<usize>,
    #[serde(default)]
    seed: Vec<u64>,
}

fn expand_grid(base: &ExperimentConfig, algos: &[Algorithm], ns: &[usize], seeds: &[u64]) -> Vec<ExperimentConfig> {
    let algos = if algos.is_empty() { vec![base.algorithm] } else { algos.to_vec() };
    let ns: Vec<Option<usize>> = if ns.is_empty() { vec![None] } else { ns.iter().copied().map(Some).collect() };
    let seeds = if seeds.is_empty() { vec![base.seed] } else { seeds.to_vec() };
    let mut out = Vec::new();
    for &a in &algos {
        for &n in &ns {
            for &s in &seeds {
                let mut cfg = base.clone();
                cfg.algorithm = a;
                cfg.seed = s;
                if let Some(n) = n {
                    apply_problem_flags(
                        &mut cfg.problem,
                        &ProblemFlags {
                            n: Some(n),
                            ..Default::default()
                        },
                    );
                }
                out.push(cfg);
            }
        }
    }
    out
}

fn sweep_file_name(cfg: &ExperimentConfig) -> String {
    let size = match &cfg.problem {
        ProblemSpec::CubicBilinear { n, .. } => format!("_n{n}"),
        ProblemSpec::Quadratic { m, .. } | ProblemSpec::GlmSum { m, .. } => format!("_n{m}"),
        ProblemSpec::Auc { subset: Some(k), .. } => format!("_k{k}"),
        ProblemSpec::Auc { .. } => String::new(),
    };
    format!(
        "{}_{}{}_s{}.{}",
        cfg.problem.name(),
        cfg.algorithm.name(),
        size,
        cfg.seed,
        cfg.format.extension()
    )
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let algos: Vec<Algorithm> = args.algo.iter().map(|a| parse_algo(a)).collect::<Result<_>>()?;
    let mut configs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read sweep file {}: {e}", path.display())))?;
            let file: SweepFile = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("invalid sweep file {}: {e}", path.display())))?;
            match file {
                SweepFile::List(list) => list,
                SweepFile::Grid { base, grid } => expand_grid(&base, &grid.algorithm, &grid.n, &grid.seed),
            }
        }
        None => {
            let base = ExperimentConfig::new(problem_from_flags(&args.problem)?, Algorithm::Newton);
            expand_grid(&base, &algos, &[], &[])
        }
    };
    for cfg in &mut configs {
        if args.config.is_some() {
            apply_problem_flags(&mut cfg.problem, &args.problem);
            if !algos.is_empty() && algos.len() == 1 {
                cfg.algorithm = algos[0];
            }
        }
        apply_run_flags(cfg, &args.run)?;
        if let Some(r) = args.reps {
            cfg.reps = r;
        }
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("cannot create {}: {e}", dir.display())))?;
        for cfg in &mut configs {
            cfg.output = Some(dir.join(sweep_file_name(cfg)));
        }
    }
    for cfg in &configs {
        cfg.validate()?;
    }
    let results: Vec<Result<Vec<AlgoRun>>> = configs.par_iter().map(run_experiment).collect();
    let mut failure = None;
    for result in results {
        match result {
            Ok(runs) => {
                runs.iter().for_each(print_summary);
                if failure.is_none() {
                    failure = aborted(&runs).map(Failure::Run);
                }
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e.into());
                }
            }
        }
    }
    failure.map_or(Ok(()), Err)
}

fn write_dir(out: &Option<PathBuf>) -> std::result::Result<Option<&Path>, Failure> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(out.as_deref())
}

fn cmd_repro_cubic(args: CubicArgs) -> CmdResult {
    let algos: Vec<Algorithm> = args.algo.iter().map(|a| parse_algo(a)).collect::<Result<_>>()?;
    let format: TraceFormat = args.format.parse()?;
    let dir = write_dir(&args.out)?;
    let mut problems = Vec::new();
    for &n in &args.n {
        let exp = run_cubic_experiment(
            n,
            &algos,
            &CubicOptions {
                iters: args.iters,
                seed: args.seed,
                timing: args.timing,
            },
        )?;
        println!("cubic_bilinear n={n} rho={:.6e} |z0-z*|={:.6e}", exp.rho, exp.radius);
        for run in &exp.runs {
            print_summary(run);
            if let Some(dir) = dir {
                let path = dir.join(format!("cubic_n{n}_{}.{}", run.result.algorithm.name(), format.extension()));
                run.write(&path, format)?;
            }
            for v in run.violations() {
                problems.push(format!("n={n} {} iter {}: {} {}", run.result.algorithm.name(), v.iter, v.check, v.detail));
            }
        }
        for v in exp.bound_violations() {
            problems.push(format!(
                "n={n} {} iter {}: gap {:.6e} above theorem curve {:.6e}",
                v.algorithm.name(),
                v.iter,
                v.gap,
                v.bound
            ));
        }
        if let Some(msg) = aborted(&exp.runs) {
            problems.push(msg);
        }
    }
    if problems.is_empty() {
        println!("all theorem bounds and invariants hold");
        Ok(())
    } else {
        problems.iter().for_each(|p| println!("violation: {p}"));
        Err(Failure::Run(format!("{} violations", problems.len())))
    }
}

fn cmd_repro_auc(args: AucArgs) -> CmdResult {
    let algos: Vec<Algorithm> = args.algo.iter().map(|a| parse_algo(a)).collect::<Result<_>>()?;
    let format: TraceFormat = args.format.parse()?;
    let sampling: SamplingChoice = args.sampling.parse()?;
    let spec = ProblemSpec::Auc {
        dataset: args.dataset.clone(),
        subset: Some(args.subset),
        rho: None,
        synthetic_rows: args.subset,
        data_seed: 0,
    };
    let dir = write_dir(&args.out)?;
    let exp = run_auc_experiment(
        &spec,
        &algos,
        &AucOptions {
            iters: args.iters,
            seed: args.seed,
            sampling,
            with_replacement: args.with_replacement,
            batch_size: args.batch,
            track_gap: args.track_gap,
            timing: args.timing,
        },
    )?;
    println!("{} N={} epoch budget {:.3}", exp.label, exp.components, exp.epoch_budget);
    if exp.degenerate {
        println!("warning: single-class dataset, the AUC problem is degenerate");
    }
    for run in &exp.runs {
        print_summary(run);
        if let Some(dir) = dir {
            let path = dir.join(format!("auc_{}.{}", run.result.algorithm.name(), format.extension()));
            run.write(&path, format)?;
        }
    }
    match aborted(&exp.runs) {
        Some(msg) => Err(Failure::Run(msg)),
        None => Ok(()),
    }
}

fn check_line(name: &str, ok: bool, detail: String, failures: &mut usize) {
    println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
    if !ok {
        *failures += 1;
    }
}

fn cmd_check() -> CmdResult {
    let mut failures = 0;

    let exp = run_cubic_experiment(
        10,
        &[Algorithm::Newton, Algorithm::InexactNewton],
        &CubicOptions {
            iters: 40,
            ..Default::default()
        },
    )?;
    let bounds = exp.bound_violations();
    check_line("theorem bounds (n=10)", bounds.is_empty(), format!("{} violations", bounds.len()), &mut failures);
    for run in &exp.runs {
        let v = run.violations();
        check_line(
            &format!("trace invariants ({})", run.result.algorithm.name()),
            v.is_empty() && !run.result.is_aborted(),
            format!("{} rows, {} violations", run.result.trace.len(), v.len()),
            &mut failures,
        );
    }
    let inexact = exp.run(Algorithm::InexactNewton).expect("ran above");
    let bad = inexact
        .result
        .subproblems
        .iter()
        .filter(|s| s.status != SubproblemStatus::Condition2 || s.model_grad_norm > s.threshold)
        .count();
    check_line(
        "condition 2 certificates",
        bad == 0,
        format!("{} of {} subproblems uncertified", bad, inexact.result.subproblems.len()),
        &mut failures,
    );

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let d = rng.gen_range(1..6);
        let wx: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let wu = rng.gen_range(-3.0..3.0);
        let (px, pu) = project_cone(&wx, wu);
        let rx: Vec<f64> = wx.iter().zip(&px).map(|(a, b)| a - b).collect();
        let ru = wu - pu;
        // feasibility, complementarity and polar-cone membership of the residual
        worst = worst
            .max(norm(&px) - pu)
            .max((dot(&rx, &px) + ru * pu).abs())
            .max(norm(&rx) + ru);
    }
    check_line("cone projection optimality", worst <= 1e-12, format!("worst defect {worst:.2e}"), &mut failures);

    let newton = exp.run(Algorithm::Newton).expect("ran above");
    for format in [TraceFormat::Csv, TraceFormat::Json] {
        let bytes = render_trace(&newton.result.trace, &newton.header, format)?;
        let text = String::from_utf8(bytes).map_err(|e| Failure::Run(e.to_string()))?;
        let back = parse_trace_str(&text, format)?;
        check_line(
            &format!("{} round trip", format.extension()),
            back.rows == newton.result.trace,
            format!("{} rows", back.rows.len()),
            &mut failures,
        );
    }
    let again = run_cubic_experiment(
        10,
        &[Algorithm::Newton],
        &CubicOptions {
            iters: 40,
            ..Default::default()
        },
    )?;
    let a = render_trace(&newton.result.trace, &newton.header, TraceFormat::Csv)?;
    let b = render_trace(&again.runs[0].result.trace, &again.runs[0].header, TraceFormat::Csv)?;
    check_line("deterministic traces", a == b, format!("{} bytes", a.len()), &mut failures);

    if failures == 0 {
        Ok(())
    } else {
        Err(Failure::Run(format!("{failures} checks failed")))
    }
}
