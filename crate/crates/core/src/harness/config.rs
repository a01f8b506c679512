use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{
    make_auc_problem, make_cubic_bilinear, make_glm_sum, make_random_cc_quadratic, parse_libsvm, scale_features,
    synthetic_a9a_like, AucProblem, CubicBilinearInstance, FiniteSum, GlmSum, GlmSumOptions, LibsvmDataset,
    QuadraticProblem,
};
use crate::saddle::{JointPoint, SaddleProblem};
use crate::sampling::SamplingScheme;
use crate::solvers::{Algorithm, SampleSizeRule, SubsampledSettings};

use super::trace::TraceFormat;

/// Environment variable naming a LIBSVM file used when an AUC config gives no dataset.
pub const DATASET_ENV: &str = "A9A_PATH";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// `ρ` defaults to `1/(20n)`.
    CubicBilinear {
        n: usize,
        #[serde(default)]
        rho: Option<f64>,
    },
    /// `ρ` defaults to `1/N`. Without a dataset, `$A9A_PATH` or a synthetic a9a-shaped set is used.
    Auc {
        #[serde(default)]
        dataset: Option<PathBuf>,
        /// Keep only the first `subset` rows.
        #[serde(default)]
        subset: Option<usize>,
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default = "default_synthetic_rows")]
        synthetic_rows: usize,
        #[serde(default)]
        data_seed: u64,
    },
    Quadratic {
        m: usize,
        n: usize,
    },
    GlmSum {
        components: usize,
        m: usize,
        n: usize,
    },
}

fn default_synthetic_rows() -> usize {
    500
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CubicBilinear { .. } => "cubic_bilinear",
            Self::Auc { .. } => "auc",
            Self::Quadratic { .. } => "quadratic",
            Self::GlmSum { .. } => "glm_sum",
        }
    }

    pub fn is_finite_sum(&self) -> bool {
        matches!(self, Self::Auc { .. } | Self::GlmSum { .. })
    }

    fn dataset_path(&self) -> Option<PathBuf> {
        match self {
            Self::Auc { dataset: Some(p), .. } => Some(p.clone()),
            Self::Auc { dataset: None, .. } => std::env::var_os(DATASET_ENV).map(PathBuf::from),
            _ => None,
        }
    }
}

/// `--sampling` choices for the subsampled method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingChoice {
    /// Uniform draws with the high-probability size.
    Uniform,
    /// Importance draws with the high-probability size.
    Nonuniform,
    /// Uniform draws with the gradient-scaled size.
    #[default]
    Empirical,
}

impl SamplingChoice {
    pub fn settings(&self, with_replacement: bool) -> SubsampledSettings {
        let (scheme, rule) = match self {
            Self::Uniform => (SamplingScheme::Uniform, SampleSizeRule::Theory),
            Self::Nonuniform => (SamplingScheme::Nonuniform, SampleSizeRule::Theory),
            Self::Empirical => (SamplingScheme::Uniform, SampleSizeRule::Empirical),
        };
        SubsampledSettings {
            scheme,
            rule,
            with_replacement,
        }
    }
}

impl FromStr for SamplingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "nonuniform" => Ok(Self::Nonuniform),
            "empirical" => Ok(Self::Empirical),
            other => Err(Error::Config(format!(
                "unknown sampling '{other}' (expected uniform, nonuniform or empirical)"
            ))),
        }
    }
}

/// One configured run. Every field except `problem` and `algorithm` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    #[serde(default = "default_iters")]
    pub iters: usize,
    /// Overrides the problem's own `ρ` in the solver only.
    #[serde(default)]
    pub solver_rho: Option<f64>,
    #[serde(default = "default_kappa_m")]
    pub kappa_m: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub stop_tol: Option<f64>,
    #[serde(default)]
    pub sampling: SamplingChoice,
    #[serde(default = "default_with_replacement")]
    pub with_replacement: bool,
    /// First-order step constant; tuned by grid search for stochastic methods when absent.
    #[serde(default)]
    pub step_c: Option<f64>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Iterations for stochastic baselines; derived from `epoch_budget` or `iters` when absent.
    #[serde(default)]
    pub epoch_budget: Option<f64>,
    #[serde(default = "default_true")]
    pub track_gap: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: TraceFormat,
    /// Fill the `time_s` column; traces are then no longer reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

fn default_iters() -> usize {
    100
}
fn default_kappa_m() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.01
}
fn default_with_replacement() -> bool {
    true
}
fn default_batch() -> usize {
    16
}
fn default_true() -> bool {
    true
}
fn default_reps() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, algorithm: Algorithm) -> Self {
        Self {
            problem,
            algorithm,
            iters: default_iters(),
            solver_rho: None,
            kappa_m: default_kappa_m(),
            delta: default_delta(),
            stop_tol: None,
            sampling: SamplingChoice::default(),
            with_replacement: true,
            step_c: None,
            batch_size: default_batch(),
            epoch_budget: None,
            track_gap: true,
            seed: 0,
            reps: 1,
            output: None,
            format: TraceFormat::Csv,
            timing: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks dataset existence and algorithm/problem compatibility.
    pub fn validate(&self) -> Result<()> {
        if let Some(path) = self.problem.dataset_path() {
            if !path.is_file() {
                return Err(Error::Config(format!("dataset {} does not exist", path.display())));
            }
        }
        let needs_sum = matches!(
            self.algorithm,
            Algorithm::SubsampledNewton | Algorithm::Seg | Algorithm::Sogda
        );
        if needs_sum && !self.problem.is_finite_sum() {
            return Err(Error::Config(format!(
                "algorithm {} needs a finite-sum problem, got {}",
                self.algorithm.name(),
                self.problem.name()
            )));
        }
        match self.problem {
            ProblemSpec::CubicBilinear { n, .. } if n < 2 => {
                return Err(Error::Config(format!("cubic bilinear needs n >= 2, got {n}")))
            }
            ProblemSpec::Auc { subset: Some(0), .. } => return Err(Error::Config("subset must be positive".into())),
            ProblemSpec::Quadratic { m, n } if m == 0 || n == 0 => {
                return Err(Error::Config("quadratic dimensions must be positive".into()))
            }
            ProblemSpec::GlmSum { components, m, n } if components == 0 || m == 0 || n == 0 => {
                return Err(Error::Config("glm_sum sizes must be positive".into()))
            }
            _ => {}
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if let Some(c) = self.step_c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("step_c must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// A problem instance built from a [`ProblemSpec`].
pub enum BuiltProblem {
    Cubic(CubicBilinearInstance),
    Auc { problem: AucProblem, dataset: String },
    Quadratic(QuadraticProblem),
    Glm(GlmSum),
}

impl BuiltProblem {
    pub fn build(spec: &ProblemSpec, seed: u64) -> Result<Self> {
        Ok(match spec {
            ProblemSpec::CubicBilinear { n, rho } => {
                let rho = rho.unwrap_or(1.0 / (20.0 * *n as f64));
                Self::Cubic(make_cubic_bilinear(*n, rho, seed)?)
            }
            ProblemSpec::Auc {
                subset,
                rho,
                synthetic_rows,
                data_seed,
                ..
            } => {
                let (ds, name) = load_auc_dataset(spec.dataset_path().as_deref(), *subset, *synthetic_rows, *data_seed)?;
                let rho = rho.unwrap_or(1.0 / ds.len() as f64);
                Self::Auc {
                    problem: make_auc_problem(&ds, rho)?,
                    dataset: name,
                }
            }
            ProblemSpec::Quadratic { m, n } => Self::Quadratic(make_random_cc_quadratic(*m, *n, seed)?),
            ProblemSpec::GlmSum { components, m, n } => {
                Self::Glm(make_glm_sum(*components, *m, *n, GlmSumOptions::default(), seed)?)
            }
        })
    }

    pub fn saddle(&self) -> &dyn SaddleProblem {
        match self {
            Self::Cubic(p) => p,
            Self::Auc { problem, .. } => problem,
            Self::Quadratic(p) => p,
            Self::Glm(p) => p,
        }
    }

    pub fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        match self {
            Self::Auc { problem, .. } => Some(problem),
            Self::Glm(p) => Some(p),
            _ => None,
        }
    }

    /// The `ρ` the problem was built for.
    pub fn rho(&self) -> f64 {
        match self {
            Self::Cubic(p) => p.rho(),
            Self::Auc { problem, .. } => problem.rho(),
            Self::Quadratic(_) => 1e-2,
            Self::Glm(p) => p.hessian_lipschitz(),
        }
    }

    pub fn start(&self) -> JointPoint {
        let (m, n) = self.saddle().dims();
        JointPoint::zeros(m, n).expect("positive dimensions")
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Self::Auc { problem, .. } if problem.is_degenerate())
    }

    pub fn label(&self) -> String {
        match self {
            Self::Cubic(p) => format!("cubic_bilinear(n={})", p.n()),
            Self::Auc { problem, dataset } => format!("auc({dataset}, d={})", problem.features()),
            Self::Quadratic(p) => {
                let (m, n) = p.dims();
                format!("quadratic({m}x{n})")
            }
            Self::Glm(p) => format!("glm_sum(N={})", p.num_components()),
        }
    }
}

/// Parses, subsets (first rows) and scales a LIBSVM file, or builds the synthetic stand-in.
pub fn load_auc_dataset(
    path: Option<&Path>,
    subset: Option<usize>,
    synthetic_rows: usize,
    data_seed: u64,
) -> Result<(LibsvmDataset, String)> {
    let (raw, name) = match path {
        Some(p) => (parse_libsvm(p)?, p.display().to_string()),
        None => {
            let rows = subset.unwrap_or(synthetic_rows);
            (synthetic_a9a_like(rows, data_seed), format!("synthetic-a9a-{rows}"))
        }
    };
    let raw = match subset {
        Some(k) if k < raw.len() => raw.subset(k),
        _ => raw,
    };
    let (scaled, _) = scale_features(&raw)?;
    Ok((scaled, name))
}
