use serde::{Deserialize, Serialize};

use crate::numerics::{direct_solve, krylov_solve, norm, DenseMatrix, DEFAULT_RESTART};

use super::cone::{soc_project, ConeJacobian, SocPoint};
use super::gmp::{gmp_iterate, gmp_solve};
use super::{model_gradient, CubicSubproblem, SubproblemSolution, SubproblemStatus};

/// Accuracy a subproblem solve must reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SolveTarget {
    /// Tight tolerance standing in for an exact solution.
    Exact,
    /// `‖∇m(Δz)‖ ≤ κ_m·min{‖Δz‖², grad_norm_ref}`, checked without slack.
    Condition2 { kappa_m: f64, grad_norm_ref: f64 },
}

impl SolveTarget {
    /// Largest model-gradient norm accepted at `dz`.
    pub fn threshold(&self, sp: &CubicSubproblem, dz: &[f64]) -> f64 {
        match *self {
            Self::Exact => {
                let g = norm(sp.g());
                let d = norm(dz);
                let tight = (1e-10 * (1.0 + g)).min(1e-8 * (d * d).min(g));
                let floor = 64.0 * f64::EPSILON * (g + sp.ell() * d + 6.0 * sp.rho() * d * d);
                tight.max(floor)
            }
            Self::Condition2 { kappa_m, grad_norm_ref } => super::condition2_bound(kappa_m, dz, grad_norm_ref),
        }
    }

    pub fn is_met(&self, sp: &CubicSubproblem, dz: &[f64], grad_norm: f64) -> bool {
        grad_norm <= self.threshold(sp, dz)
    }

    fn status(&self) -> SubproblemStatus {
        match self {
            Self::Exact => SubproblemStatus::Exact,
            Self::Condition2 { .. } => SubproblemStatus::Condition2,
        }
    }
}

/// Constants of the regularized semismooth Newton method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsnSettings {
    pub budget: usize,
    /// `η = eta_scale·‖E‖`
    pub eta_scale: f64,
    /// Required relative decrease of `‖E‖` for a Newton step to be accepted.
    pub decrease: f64,
    /// Krylov tolerance is `krylov_scale·min(1, ‖E‖)` relative to `‖E‖`.
    pub krylov_scale: f64,
    /// Largest system solved by dense elimination instead of GMRES.
    pub direct_max_dim: usize,
    /// GMRES budget per Newton step; a dense solve takes over when it runs out.
    #[serde(default = "default_krylov_max_iters")]
    pub krylov_max_iters: usize,
    /// Consecutive Newton steps allowed to miss the decrease test before falling back to the best point.
    #[serde(default = "default_nonmonotone")]
    pub nonmonotone: usize,
}

fn default_nonmonotone() -> usize {
    3
}

fn default_krylov_max_iters() -> usize {
    200
}

impl Default for SsnSettings {
    fn default() -> Self {
        Self {
            budget: 200,
            eta_scale: 1e-2,
            decrease: 1e-4,
            krylov_scale: 1e-2,
            direct_max_dim: 200,
            krylov_max_iters: default_krylov_max_iters(),
            nonmonotone: default_nonmonotone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemOptions {
    /// Initial `Δz` for the mirror-prox phase; zero when absent.
    pub warm_start: Option<Vec<f64>>,
    pub gmp_max_iters: usize,
    /// `‖E‖` level at which mirror-prox hands over; `max(1e−2, 1e−2‖g‖)` when absent.
    pub gamma_switch: Option<f64>,
    pub ssn: SsnSettings,
}

impl Default for SubproblemOptions {
    fn default() -> Self {
        Self {
            warm_start: None,
            gmp_max_iters: 500,
            gamma_switch: None,
            ssn: SsnSettings::default(),
        }
    }
}

/// The lifted map `G(p) = (g_x + [HΔz]_x, 6ρu², −g_y − [HΔz]_y, 6ρv²)`.
fn lifted_map(sp: &CubicSubproblem, p: &[f64]) -> Vec<f64> {
    let (m, n) = sp.dims();
    let dz = SocPoint::from_flat(p, m).dz();
    let q = sp.quadratic_gradient(&dz);
    let six_rho = 6.0 * sp.rho();
    let mut out = Vec::with_capacity(m + n + 2);
    out.extend_from_slice(&q[..m]);
    out.push(six_rho * p[m] * p[m]);
    out.extend(q[m..].iter().map(|v| -v));
    out.push(six_rho * p[m + n + 1] * p[m + n + 1]);
    out
}

/// `E(p) = p − P(p − G(p))` for a flat lifted point `p = (Δx, u, Δy, v)`.
pub fn cone_residual(sp: &CubicSubproblem, p: &[f64]) -> Vec<f64> {
    let (m, _) = sp.dims();
    let w: Vec<f64> = p.iter().zip(lifted_map(sp, p)).map(|(a, b)| a - b).collect();
    let proj = soc_project(&w, m).to_flat();
    p.iter().zip(proj).map(|(a, b)| a - b).collect()
}

/// `I − J_P(w)(I − G′(p))`, one element of the generalized Jacobian of [`cone_residual`].
pub fn residual_jacobian(sp: &CubicSubproblem, p: &[f64]) -> DenseMatrix {
    let (m, n) = sp.dims();
    let d = m + n + 2;
    let (ui, vi) = (m, m + n + 1);
    let w: Vec<f64> = p.iter().zip(lifted_map(sp, p)).map(|(a, b)| a - b).collect();
    let jx = ConeJacobian::at(&w[..m], w[ui]);
    let jy = ConeJacobian::at(&w[ui + 1..vi], w[vi]);

    // lifted index -> Δz index, None for u and v
    let to_dz = |i: usize| -> Option<usize> {
        if i < m {
            Some(i)
        } else if i > ui && i < vi {
            Some(i - 1)
        } else {
            None
        }
    };
    let h = sp.h();
    let twelve_rho = 12.0 * sp.rho();
    let mut out = DenseMatrix::identity(d);
    let mut col = vec![0.0; d];
    for j in 0..d {
        // column j of I − G′
        for (i, c) in col.iter_mut().enumerate() {
            let g_prime = match (to_dz(i), to_dz(j)) {
                (Some(a), Some(b)) if i < m => h[(a, b)],
                (Some(a), Some(b)) => -h[(a, b)],
                (None, None) if i == j => twelve_rho * p[i],
                _ => 0.0,
            };
            *c = if i == j { 1.0 } else { 0.0 } - g_prime;
        }
        let (x_part, rest) = col.split_at_mut(ui);
        let (u_part, rest) = rest.split_at_mut(1);
        let (y_part, v_part) = rest.split_at_mut(n);
        jx.apply(x_part, &mut u_part[0]);
        jy.apply(y_part, &mut v_part[0]);
        for (i, c) in col.iter().enumerate() {
            out[(i, j)] -= c;
        }
    }
    out
}

fn newton_direction(jac: &DenseMatrix, e: &[f64], settings: &SsnSettings) -> Option<Vec<f64>> {
    let rhs: Vec<f64> = e.iter().map(|v| -v).collect();
    if jac.rows() <= settings.direct_max_dim {
        return direct_solve(jac, &rhs).ok();
    }
    let tol = settings.krylov_scale * norm(e).min(1.0);
    let out = krylov_solve(|v| jac.matvec(v), &rhs, tol, DEFAULT_RESTART, settings.krylov_max_iters);
    let finite = out.solution.iter().all(|v| v.is_finite());
    if out.converged && finite {
        return Some(out.solution);
    }
    direct_solve(jac, &rhs).ok().or_else(|| finite.then_some(out.solution))
}

fn solution(sp: &CubicSubproblem, dz: Vec<f64>, grad_norm: f64, status: SubproblemStatus) -> SubproblemSolution {
    SubproblemSolution {
        optimality_residual: optimality_residual(sp, &dz),
        dz,
        model_grad_norm: grad_norm,
        gmp_iters: 0,
        ssn_iters: 0,
        status,
    }
}

/// `‖S(g + HΔz) + 6ρ(‖Δx‖Δx, ‖Δy‖Δy)‖` with `S = diag(I, −I)`.
fn optimality_residual(sp: &CubicSubproblem, dz: &[f64]) -> f64 {
    let (m, _) = sp.dims();
    let q = sp.quadratic_gradient(dz);
    let rx = 6.0 * sp.rho() * norm(&dz[..m]);
    let ry = 6.0 * sp.rho() * norm(&dz[m..]);
    let r: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(i, v)| if i < m { v + rx * dz[i] } else { -v + ry * dz[i] })
        .collect();
    norm(&r)
}

/// Regularized semismooth Newton on `E(p) = 0` from a lifted start point.
///
/// Returns the best `Δz` seen (smallest `‖∇m‖`) when the budget runs out.
pub fn ssn_solve(
    sp: &CubicSubproblem,
    start: &SocPoint,
    target: SolveTarget,
    settings: &SsnSettings,
) -> SubproblemSolution {
    let (m, _) = sp.dims();
    let mut p = start.to_flat();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut steps = 0;
    let mut reference = norm(&cone_residual(sp, &p));
    let mut slack = settings.nonmonotone;
    loop {
        let dz = SocPoint::from_flat(&p, m).dz();
        let gn = norm(&model_gradient(sp, &dz));
        if target.is_met(sp, &dz, gn) {
            let mut out = solution(sp, dz, gn, target.status());
            out.ssn_iters = steps;
            return out;
        }
        if best.as_ref().map_or(true, |(b, _)| gn < *b) {
            best = Some((gn, dz.clone()));
        }
        if steps >= settings.budget {
            break;
        }
        steps += 1;

        let e = cone_residual(sp, &p);
        let en = norm(&e);
        let mut jac = residual_jacobian(sp, &p);
        jac.add_diagonal(settings.eta_scale * en);
        let trial = newton_direction(&jac, &e, settings)
            .map(|d| p.iter().zip(&d).map(|(a, b)| a + b).collect::<Vec<f64>>())
            .map(|t| {
                let tn = norm(&cone_residual(sp, &t));
                (t, tn)
            })
            .filter(|(_, tn)| tn.is_finite());
        p = match trial {
            Some((t, tn)) if tn <= (1.0 - settings.decrease) * reference => {
                reference = tn;
                slack = settings.nonmonotone;
                t
            }
            Some((t, _)) if slack > 0 => {
                slack -= 1;
                t
            }
            _ => {
                let restart = &best.as_ref().expect("best is set above").1;
                let (_, full) = gmp_iterate(sp, restart);
                let lifted = SocPoint::lift(&full, m).to_flat();
                reference = norm(&cone_residual(sp, &lifted));
                slack = settings.nonmonotone;
                lifted
            }
        };
    }
    let (gn, dz) = best.expect("at least one point was evaluated");
    let mut out = solution(sp, dz, gn, SubproblemStatus::BudgetExhausted);
    out.ssn_iters = steps;
    out
}

/// Mirror-prox warm start followed by semismooth Newton.
pub fn solve_cubic_subproblem(
    sp: &CubicSubproblem,
    target: SolveTarget,
    options: &SubproblemOptions,
) -> SubproblemSolution {
    let (m, _) = sp.dims();
    let g_norm = norm(sp.g());
    if g_norm == 0.0 {
        return solution(sp, vec![0.0; sp.dim()], 0.0, target.status());
    }
    let start = match &options.warm_start {
        Some(w) if w.len() == sp.dim() => w.clone(),
        _ => vec![0.0; sp.dim()],
    };
    let gamma = options.gamma_switch.unwrap_or((1e-2 * g_norm).max(1e-2));
    let gmp = gmp_solve(sp, &start, options.gmp_max_iters, gamma);

    let mut candidates = [gmp.average, gmp.last];
    for dz in &candidates {
        let gn = norm(&model_gradient(sp, dz));
        if target.is_met(sp, dz, gn) {
            let mut out = solution(sp, dz.clone(), gn, target.status());
            out.gmp_iters = gmp.iterations;
            return out;
        }
    }
    let lifted_residual = |dz: &[f64]| norm(&cone_residual(sp, &SocPoint::lift(dz, m).to_flat()));
    if lifted_residual(&candidates[1]) < lifted_residual(&candidates[0]) {
        candidates.swap(0, 1);
    }
    let mut out = ssn_solve(sp, &SocPoint::lift(&candidates[0], m), target, &options.ssn);
    out.gmp_iters = gmp.iterations;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{distance, finite_diff_jacobian};
    use rand::{Rng, SeedableRng};

    fn random_sp(m: usize, n: usize, seed: u64) -> CubicSubproblem {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = m + n;
        let a = DenseMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let mut h = DenseMatrix::from_fn(d, d, |i, j| a[(i, j)] + a[(j, i)]);
        // convex in x, concave in y
        for i in 0..d {
            h[(i, i)] += if i < m { 2.0 * d as f64 } else { -2.0 * d as f64 } * 0.5;
        }
        let g = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        CubicSubproblem::new(g, h, rng.gen_range(0.05..1.0), m, n).unwrap()
    }

    #[test]
    fn residual_vanishes_at_origin_when_g_is_zero() {
        let sp = CubicSubproblem::new(vec![0.0; 3], DenseMatrix::identity(3), 0.5, 2, 1).unwrap();
        assert_eq!(cone_residual(&sp, &[0.0; 5]), vec![0.0; 5]);
    }

    #[test]
    fn residual_is_identity_deep_in_polar_region() {
        let sp = CubicSubproblem::new(vec![0.0; 2], DenseMatrix::zeros(2, 2), 1e-3, 1, 1).unwrap();
        let p = [0.1, -5.0, 0.2, -5.0];
        // w = p − G(p) has w_u ≈ −5 − 6ρ·25 far below −|w_x|
        let e = cone_residual(&sp, &p);
        assert!(distance(&e, &p) < 1e-15);
        let j = residual_jacobian(&sp, &p);
        assert!(j.max_abs_diff(&DenseMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn jacobian_vanishes_in_identity_region_without_curvature() {
        let sp = CubicSubproblem::new(vec![0.0; 2], DenseMatrix::zeros(2, 2), 1e-300, 1, 1).unwrap();
        let j = residual_jacobian(&sp, &[0.1, 3.0, -0.2, 4.0]);
        assert!(j.max_abs_diff(&DenseMatrix::zeros(4, 4)) < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut checked = 0;
        for seed in 0..40 {
            let sp = random_sp(3, 2, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + seed);
            let p: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = p.iter().zip(lifted_map(&sp, &p)).map(|(a, b)| a - b).collect();
            let margin = |wx: &[f64], wu: f64| (wu.abs() - norm(wx)).abs();
            if margin(&w[..3], w[3]) < 1e-3 || margin(&w[4..6], w[6]) < 1e-3 {
                continue;
            }
            let fd = finite_diff_jacobian(|q| cone_residual(&sp, q), &p, 1e-7);
            let an = residual_jacobian(&sp, &p);
            assert!(an.max_abs_diff(&fd) < 1e-5 * (1.0 + an.inf_norm()), "seed {seed}");
            checked += 1;
        }
        assert!(checked >= 20);
    }

    #[test]
    fn lifted_exact_solution_has_zero_residual() {
        let sp = random_sp(4, 3, 7);
        let sol = solve_cubic_subproblem(&sp, SolveTarget::Exact, &SubproblemOptions::default());
        assert_eq!(sol.status, SubproblemStatus::Exact);
        let e = cone_residual(&sp, &SocPoint::lift(&sol.dz, 4).to_flat());
        assert!(norm(&e) <= 1e-10, "{}", norm(&e));
    }

    #[test]
    fn scalar_instance_reaches_analytic_saddle() {
        let sp = CubicSubproblem::new(vec![-1.0, 1.0], DenseMatrix::zeros(2, 2), 1.0 / 6.0, 1, 1).unwrap();
        let sol = ssn_solve(&sp, &SocPoint::lift(&[0.0, 0.0], 1), SolveTarget::Exact, &SsnSettings::default());
        assert_eq!(sol.status, SubproblemStatus::Exact);
        assert!(sol.model_grad_norm <= 2e-10);
        assert!(distance(&sol.dz, &[1.0, 1.0]) < 1e-9);
    }

    #[test]
    fn start_at_solution_returns_without_steps() {
        let sp = CubicSubproblem::new(vec![-1.0, 1.0], DenseMatrix::zeros(2, 2), 1.0 / 6.0, 1, 1).unwrap();
        let sol = ssn_solve(&sp, &SocPoint::lift(&[1.0, 1.0], 1), SolveTarget::Exact, &SsnSettings::default());
        assert_eq!(sol.ssn_iters, 0);
        assert_eq!(sol.dz, vec![1.0, 1.0]);
    }

    #[test]
    fn condition2_mode_certificate() {
        for seed in 0..10 {
            let sp = random_sp(6, 4, seed);
            let target = SolveTarget::Condition2 {
                kappa_m: 0.1,
                grad_norm_ref: norm(sp.g()),
            };
            let sol = solve_cubic_subproblem(&sp, target, &SubproblemOptions::default());
            assert_eq!(sol.status, SubproblemStatus::Condition2);
            let lhs = norm(&model_gradient(&sp, &sol.dz));
            assert!(lhs <= 0.1 * norm(&sol.dz).powi(2).min(norm(sp.g())));
        }
    }

    #[test]
    fn zero_gradient_returns_origin() {
        let sp = CubicSubproblem::new(vec![0.0; 4], DenseMatrix::identity(4), 0.5, 2, 2).unwrap();
        let sol = solve_cubic_subproblem(&sp, SolveTarget::Exact, &SubproblemOptions::default());
        assert_eq!(sol.dz, vec![0.0; 4]);
        assert_eq!(sol.ssn_iters, 0);
        assert_eq!(sol.status, SubproblemStatus::Exact);
    }

    #[test]
    fn different_starts_agree() {
        let sp = random_sp(5, 5, 3);
        let a = solve_cubic_subproblem(&sp, SolveTarget::Exact, &SubproblemOptions::default());
        let opts = SubproblemOptions {
            warm_start: Some(vec![3.0; 10]),
            ..Default::default()
        };
        let b = solve_cubic_subproblem(&sp, SolveTarget::Exact, &opts);
        assert!(distance(&a.dz, &b.dz) < 1e-8);
    }

    #[test]
    fn large_system_uses_krylov_path() {
        let sp = random_sp(110, 100, 11);
        let sol = solve_cubic_subproblem(&sp, SolveTarget::Exact, &SubproblemOptions::default());
        assert_eq!(sol.status, SubproblemStatus::Exact, "{sol:?}");
        assert!((sol.optimality_residual - sol.model_grad_norm).abs() <= 1e-12 * (1.0 + norm(sp.g())));
    }
}
