use crate::numerics::{norm, DenseMatrix};

/// A point `(Δx, u, Δy, v)` of `R^{m+1} × R^{n+1}`, stored flat in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct SocPoint {
    pub dx: Vec<f64>,
    pub u: f64,
    pub dy: Vec<f64>,
    pub v: f64,
}

impl SocPoint {
    /// `(Δx, ‖Δx‖, Δy, ‖Δy‖)`
    pub fn lift(dz: &[f64], m: usize) -> Self {
        let (dx, dy) = dz.split_at(m);
        Self {
            dx: dx.to_vec(),
            u: norm(dx),
            dy: dy.to_vec(),
            v: norm(dy),
        }
    }

    pub fn from_flat(w: &[f64], m: usize) -> Self {
        let n = w.len() - m - 2;
        Self {
            dx: w[..m].to_vec(),
            u: w[m],
            dy: w[m + 1..m + 1 + n].to_vec(),
            v: w[m + 1 + n],
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dx.len() + self.dy.len() + 2);
        out.extend_from_slice(&self.dx);
        out.push(self.u);
        out.extend_from_slice(&self.dy);
        out.push(self.v);
        out
    }

    /// `(Δx, Δy)`
    pub fn dz(&self) -> Vec<f64> {
        [self.dx.as_slice(), self.dy.as_slice()].concat()
    }

    pub fn is_feasible(&self) -> bool {
        norm(&self.dx) <= self.u && norm(&self.dy) <= self.v
    }
}

/// Euclidean projection of `(w_x, w_u)` onto `{‖x‖ ≤ t}`.
///
/// Boundary ties use the middle-case formula.
pub fn project_cone(wx: &[f64], wu: f64) -> (Vec<f64>, f64) {
    let r = norm(wx);
    if wu > r {
        (wx.to_vec(), wu)
    } else if wu < -r || r == 0.0 {
        (vec![0.0; wx.len()], 0.0)
    } else {
        let s = 0.5 * (1.0 + wu / r);
        (wx.iter().map(|v| s * v).collect(), s * r)
    }
}

/// One element of the generalized Jacobian of [`project_cone`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ConeJacobian {
    Zero,
    Identity,
    /// `½[[(1+r)I − r·ŵŵᵀ, ŵ], [ŵᵀ, 1]]` with `ŵ = w_x/‖w_x‖`, `r = w_u/‖w_x‖`.
    Middle { dir: Vec<f64>, ratio: f64 },
    /// The apex `w = 0`, where `½I` is a valid element.
    Half,
}

impl ConeJacobian {
    pub(crate) fn at(wx: &[f64], wu: f64) -> Self {
        let r = norm(wx);
        if wu > r {
            Self::Identity
        } else if wu < -r {
            Self::Zero
        } else if r == 0.0 {
            Self::Half
        } else {
            Self::Middle {
                dir: wx.iter().map(|v| v / r).collect(),
                ratio: wu / r,
            }
        }
    }

    /// Applies the block to `(v_x, v_u)` in place.
    pub(crate) fn apply(&self, vx: &mut [f64], vu: &mut f64) {
        match self {
            Self::Identity => {}
            Self::Zero => {
                vx.iter_mut().for_each(|v| *v = 0.0);
                *vu = 0.0;
            }
            Self::Half => {
                vx.iter_mut().for_each(|v| *v *= 0.5);
                *vu *= 0.5;
            }
            Self::Middle { dir, ratio } => {
                let proj: f64 = dir.iter().zip(vx.iter()).map(|(a, b)| a * b).sum();
                let u_in = *vu;
                for (v, d) in vx.iter_mut().zip(dir) {
                    *v = 0.5 * ((1.0 + ratio) * *v - ratio * d * proj + d * u_in);
                }
                *vu = 0.5 * (proj + u_in);
            }
        }
    }

    pub(crate) fn to_dense(&self, dim: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(dim + 1, dim + 1);
        for j in 0..=dim {
            let mut e = vec![0.0; dim];
            let mut eu = 0.0;
            if j < dim {
                e[j] = 1.0;
            } else {
                eu = 1.0;
            }
            self.apply(&mut e, &mut eu);
            for i in 0..dim {
                out[(i, j)] = e[i];
            }
            out[(dim, j)] = eu;
        }
        out
    }
}

/// Generalized Jacobian element of the projection onto one cone, `(dim+1) × (dim+1)`.
pub fn cone_projection_jacobian(wx: &[f64], wu: f64) -> DenseMatrix {
    ConeJacobian::at(wx, wu).to_dense(wx.len())
}

/// Projection of a flat `(w_x, w_u, w_y, w_v)` onto the product of the two cones.
pub fn soc_project(w: &[f64], m: usize) -> SocPoint {
    let p = SocPoint::from_flat(w, m);
    let (dx, u) = project_cone(&p.dx, p.u);
    let (dy, v) = project_cone(&p.dy, p.v);
    SocPoint { dx, u, dy, v }
}

/// Block-diagonal generalized Jacobian of [`soc_project`].
pub fn soc_projection_jacobian(w: &[f64], m: usize) -> DenseMatrix {
    let p = SocPoint::from_flat(w, m);
    let n = p.dy.len();
    let jx = cone_projection_jacobian(&p.dx, p.u);
    let jy = cone_projection_jacobian(&p.dy, p.v);
    let d = m + n + 2;
    let mut out = DenseMatrix::zeros(d, d);
    for i in 0..=m {
        for j in 0..=m {
            out[(i, j)] = jx[(i, j)];
        }
    }
    for i in 0..=n {
        for j in 0..=n {
            out[(m + 1 + i, m + 1 + j)] = jy[(i, j)];
        }
    }
    out
}
