//! Convex solvers used by the factorization subproblems.
//!
//! * [`solve_qp`]: dense standard-form QP, `min ½xᵀPx + fᵀx` subject to
//!   `Gx ≤ l` and `Kx = r`, by ADMM operator splitting with an active-set
//!   polishing step.
//! * [`nnls`]: Lawson–Hanson nonnegative least squares.
//! * [`isotonic_project`]: Euclidean projection onto the (nonnegative)
//!   monotone cone by pool-adjacent-violators.

mod admm;
mod isotonic;
mod nnls;

pub use admm::{solve_qp, AdmmSettings};
pub use isotonic::{is_monotone, isotonic_project, Direction};
pub use nnls::{nnls, nnls_gram};

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

/// Standard-form quadratic program data.
#[derive(Debug, Clone)]
pub struct QpProblem {
    p: DenseMatrix,
    f: Vec<f64>,
    g: Option<DenseMatrix>,
    l: Vec<f64>,
    k: Option<DenseMatrix>,
    r: Vec<f64>,
}

impl QpProblem {
    /// Unconstrained problem with Hessian `p` and linear term `f`.
    pub fn new(p: DenseMatrix, f: Vec<f64>) -> Result<Self> {
        let n = p.rows();
        if p.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "hessian must be square, got {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        if f.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "linear term has length {}, expected {n}",
                f.len()
            )));
        }
        let scale = p.max_abs();
        let asym = p.max_abs_diff(&p.transpose());
        if asym > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "hessian not symmetric: max |P - Pᵀ| = {asym:e}"
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite linear term".into()));
        }
        Ok(Self {
            p,
            f,
            g: None,
            l: Vec::new(),
            k: None,
            r: Vec::new(),
        })
    }

    /// Adds the inequality block `Gx ≤ l`.
    pub fn with_inequalities(mut self, g: DenseMatrix, l: Vec<f64>) -> Result<Self> {
        check_block(&g, &l, self.dim(), "inequality")?;
        self.g = Some(g);
        self.l = l;
        Ok(self)
    }

    /// Adds the equality block `Kx = r`.
    pub fn with_equalities(mut self, k: DenseMatrix, r: Vec<f64>) -> Result<Self> {
        check_block(&k, &r, self.dim(), "equality")?;
        self.k = Some(k);
        self.r = r;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn hessian(&self) -> &DenseMatrix {
        &self.p
    }

    pub fn linear(&self) -> &[f64] {
        &self.f
    }

    pub fn inequalities(&self) -> Option<(&DenseMatrix, &[f64])> {
        self.g.as_ref().map(|g| (g, self.l.as_slice()))
    }

    pub fn equalities(&self) -> Option<(&DenseMatrix, &[f64])> {
        self.k.as_ref().map(|k| (k, self.r.as_slice()))
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.p.mat_vec(x)) + dot(&self.f, x)
    }

    /// Largest violation of `Gx ≤ l` and `Kx = r`; zero when feasible.
    pub fn feasibility_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        if let Some((g, l)) = self.inequalities() {
            for (gx, li) in g.mat_vec(x).iter().zip(l) {
                worst = worst.max(gx - li);
            }
        }
        if let Some((k, r)) = self.equalities() {
            for (kx, ri) in k.mat_vec(x).iter().zip(r) {
                worst = worst.max((kx - ri).abs());
            }
        }
        worst
    }

    /// KKT residual of the primal-dual pair `(x, lambda, mu)`: the maximum of
    /// stationarity, primal infeasibility and complementarity violations.
    /// Negative inequality multipliers are clipped to zero first.
    pub fn kkt_residual(&self, x: &[f64], lambda: &[f64], mu: &[f64]) -> f64 {
        let mut grad = self.p.mat_vec(x);
        for (gi, fi) in grad.iter_mut().zip(&self.f) {
            *gi += fi;
        }
        let mut comp = 0.0_f64;
        if let Some((g, l)) = self.inequalities() {
            let lam: Vec<f64> = lambda.iter().map(|v| v.max(0.0)).collect();
            for (gi, v) in grad.iter_mut().zip(g.tr_mat_vec(&lam)) {
                *gi += v;
            }
            for ((gx, li), la) in g.mat_vec(x).iter().zip(l).zip(&lam) {
                comp = comp.max(la * (li - gx).abs());
            }
        }
        if let Some((k, _)) = self.equalities() {
            for (gi, v) in grad.iter_mut().zip(k.tr_mat_vec(mu)) {
                *gi += v;
            }
        }
        let stationarity = grad.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        stationarity.max(comp).max(self.feasibility_residual(x))
    }
}

fn check_block(a: &DenseMatrix, rhs: &[f64], n: usize, what: &str) -> Result<()> {
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{what} matrix has {} columns, expected {n}",
            a.cols()
        )));
    }
    if rhs.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{what} right-hand side has length {}, expected {}",
            rhs.len(),
            a.rows()
        )));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite {what} right-hand side"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// Multipliers of `Gx ≤ l` (nonnegative).
    pub lambda: Vec<f64>,
    /// Multipliers of `Kx = r`.
    pub mu: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Chain constraints `x_j ≤ x_{j+1}` (or `≥` for decreasing) written as rows of `G`.
pub fn chain_constraints(m: usize, direction: Direction) -> Option<DenseMatrix> {
    if m < 2 {
        return None;
    }
    let sign = match direction {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };
    Some(DenseMatrix::from_fn(m - 1, m, |i, j| {
        if j == i {
            sign
        } else if j == i + 1 {
            -sign
        } else {
            0.0
        }
    }))
}

/// The projection of `v` onto the monotone cone posed as a generic QP:
/// `min ½‖x − v‖²` with chain constraints and, optionally, `−x ≤ 0`.
pub fn projection_qp(v: &[f64], direction: Direction, nonneg: bool) -> Result<QpProblem> {
    let m = v.len();
    let f: Vec<f64> = v.iter().map(|x| -x).collect();
    let mut g = chain_constraints(m, direction);
    if nonneg {
        let neg = DenseMatrix::identity(m).scale(-1.0);
        g = Some(match g {
            Some(chain) => chain.vstack(&neg)?,
            None => neg,
        });
    }
    let qp = QpProblem::new(DenseMatrix::identity(m), f)?;
    match g {
        Some(g) => {
            let rows = g.rows();
            qp.with_inequalities(g, vec![0.0; rows])
        }
        None => Ok(qp),
    }
}
