use rand::Rng as _;

use crate::error::{check_dim, Error, Result};
use crate::numerics::{direct_solve, dot, DenseMatrix};
use crate::rng::{stream, streams};
use crate::saddle::{JointPoint, SaddleProblem};

/// `f(x, y) = ½xᵀPx + xᵀQy − ½yᵀRy + c_xᵀx + c_yᵀy` with `P, R ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    p: DenseMatrix,
    q: DenseMatrix,
    r: DenseMatrix,
    cx: Vec<f64>,
    cy: Vec<f64>,
}

impl QuadraticProblem {
    pub fn new(
        p: DenseMatrix,
        q: DenseMatrix,
        r: DenseMatrix,
        cx: Vec<f64>,
        cy: Vec<f64>,
    ) -> Result<Self> {
        let m = p.rows();
        let n = r.rows();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("empty quadratic blocks".into()));
        }
        check_dim(m, p.cols(), "P columns")?;
        check_dim(n, r.cols(), "R columns")?;
        check_dim(m, q.rows(), "Q rows")?;
        check_dim(n, q.cols(), "Q columns")?;
        check_dim(m, cx.len(), "c_x")?;
        check_dim(n, cy.len(), "c_y")?;
        if !p.is_symmetric(1e-12) || !r.is_symmetric(1e-12) {
            return Err(Error::InvalidArgument("P and R must be symmetric".into()));
        }
        Ok(Self { p, q, r, cx, cy })
    }

    /// Solves the linear optimality system `∇f(z) = 0`.
    pub fn saddle(&self) -> Result<JointPoint> {
        let h = self.hessian(&vec![0.0; self.dim()]);
        let rhs: Vec<f64> = self.cx.iter().chain(&self.cy).map(|c| -c).collect();
        let z = direct_solve(&h, &rhs)?;
        let (m, n) = self.dims();
        JointPoint::new(m, n, z)
    }
}

/// Random instance with `P = GGᵀ/m + 0.1I`, `R = KKᵀ/n + 0.1I` and a unique saddle.
pub fn make_random_cc_quadratic(m: usize, n: usize, seed: u64) -> Result<QuadraticProblem> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("need m, n >= 1 (m={m}, n={n})")));
    }
    let mut rng = stream(seed, streams::PROBLEM_DATA);
    let mut draw = |rows: usize, cols: usize| {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0))
    };
    let psd = |g: DenseMatrix, dim: usize| -> DenseMatrix {
        let mut out = g.matmul(&g.transpose()).expect("square product");
        out.scale_in_place(1.0 / dim as f64);
        out.add_diagonal(0.1);
        out.symmetrize();
        out
    };
    let p = psd(draw(m, m), m);
    let r = psd(draw(n, n), n);
    let q = draw(m, n);
    let c = draw(1, m + n);
    let c = c.row(0);
    QuadraticProblem::new(p, q, r, c[..m].to_vec(), c[m..].to_vec())
}

impl SaddleProblem for QuadraticProblem {
    fn dims(&self) -> (usize, usize) {
        (self.p.rows(), self.r.rows())
    }

    fn value(&self, z: &[f64]) -> f64 {
        let m = self.p.rows();
        let (x, y) = z.split_at(m);
        0.5 * dot(x, &self.p.matvec(x)) + dot(x, &self.q.matvec(y))
            - 0.5 * dot(y, &self.r.matvec(y))
            + dot(&self.cx, x)
            + dot(&self.cy, y)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let m = self.p.rows();
        let (x, y) = z.split_at(m);
        let mut gx = self.p.matvec(x);
        crate::numerics::axpy(1.0, &self.q.matvec(y), &mut gx);
        crate::numerics::axpy(1.0, &self.cx, &mut gx);
        let mut gy = self.q.transpose_matvec(x);
        crate::numerics::axpy(-1.0, &self.r.matvec(y), &mut gy);
        crate::numerics::axpy(1.0, &self.cy, &mut gy);
        gx.extend(gy);
        gx
    }

    fn hessian(&self, _z: &[f64]) -> DenseMatrix {
        let (m, n) = self.dims();
        DenseMatrix::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
            (true, true) => self.p[(i, j)],
            (true, false) => self.q[(i, j - m)],
            (false, true) => self.q[(j, i - m)],
            (false, false) => -self.r[(i - m, j - m)],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm;
    use crate::saddle::operator_value;

    #[test]
    fn identity_blocks_have_zero_saddle() {
        let qp = QuadraticProblem::new(
            DenseMatrix::identity(2),
            DenseMatrix::zeros(2, 3),
            DenseMatrix::identity(3),
            vec![0.0; 2],
            vec![0.0; 3],
        )
        .unwrap();
        assert!(qp.saddle().unwrap().coords().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_coupled_saddle() {
        let one = || DenseMatrix::from_rows(&[vec![1.0]]);
        let qp = QuadraticProblem::new(one(), one(), one(), vec![0.0], vec![0.0]).unwrap();
        assert_eq!(qp.saddle().unwrap().coords(), &[0.0, 0.0]);
    }

    #[test]
    fn random_saddle_zeroes_operator() {
        for seed in 0..5 {
            let qp = make_random_cc_quadratic(5, 4, seed).unwrap();
            let s = qp.saddle().unwrap();
            assert!(norm(&operator_value(&qp, &s).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn rejects_asymmetric_blocks() {
        let p = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let r = QuadraticProblem::new(
            p,
            DenseMatrix::zeros(2, 1),
            DenseMatrix::identity(1),
            vec![0.0; 2],
            vec![0.0],
        );
        assert!(r.is_err());
    }
}
