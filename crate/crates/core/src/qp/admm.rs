//! ADMM for dense convex QPs, after the OSQP splitting.
//!
//! Constraints are stacked as `lo ≤ Ax ≤ hi` with `A = [G; K]`,
//! `lo = [-∞; r]`, `hi = [l; r]`. Each iteration solves one system with the
//! cached Cholesky factor of `P + σI + Aᵀ diag(ρ) A`. Once the residuals are
//! small the solver guesses the active set from the dual iterate and solves
//! the reduced KKT system directly ("polishing"); the polished point is
//! accepted only when its KKT residual meets the requested tolerance.

use crate::linalg::{norm_inf, Cholesky, DenseMatrix};

use super::{QpProblem, QpSolution, QpStatus};

/// Tuning knobs for the ADMM iteration. The defaults work for the small,
/// well-scaled problems produced by the factorization code.
#[derive(Debug, Clone, Copy)]
pub struct AdmmSettings {
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    /// Ratio between equality-row and inequality-row penalties.
    pub eq_rho_scale: f64,
    pub adapt_interval: usize,
    pub polish_interval: usize,
    pub infeasibility_tol: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            eq_rho_scale: 1e3,
            adapt_interval: 25,
            polish_interval: 50,
            infeasibility_tol: 1e-7,
        }
    }
}

/// Solves `problem` to KKT residual `tol` or gives up after `max_iter` ADMM steps.
pub fn solve_qp(problem: &QpProblem, tol: f64, max_iter: usize) -> QpSolution {
    Admm::new(problem, AdmmSettings::default()).run(tol, max_iter)
}

struct Admm<'a> {
    qp: &'a QpProblem,
    settings: AdmmSettings,
    a: Option<DenseMatrix>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    n_ineq: usize,
    rho: Vec<f64>,
    factor: Cholesky,
}

struct Candidate {
    x: Vec<f64>,
    y: Vec<f64>,
    kkt: f64,
}

impl<'a> Admm<'a> {
    fn new(qp: &'a QpProblem, settings: AdmmSettings) -> Self {
        let mut a: Option<DenseMatrix> = None;
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut n_ineq = 0;
        if let Some((g, l)) = qp.inequalities() {
            a = Some(g.clone());
            lo.extend(std::iter::repeat(f64::NEG_INFINITY).take(l.len()));
            hi.extend_from_slice(l);
            n_ineq = l.len();
        }
        if let Some((k, r)) = qp.equalities() {
            a = Some(match a {
                Some(g) => g.vstack(k).expect("column counts checked on construction"),
                None => k.clone(),
            });
            lo.extend_from_slice(r);
            hi.extend_from_slice(r);
        }
        let rho = (0..lo.len())
            .map(|i| {
                if i < n_ineq {
                    settings.rho
                } else {
                    settings.rho * settings.eq_rho_scale
                }
            })
            .collect::<Vec<_>>();
        let factor = factorize(qp.hessian(), a.as_ref(), &rho, settings.sigma);
        Self {
            qp,
            settings,
            a,
            lo,
            hi,
            n_ineq,
            rho,
            factor,
        }
    }

    fn n_cons(&self) -> usize {
        self.lo.len()
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        self.a.as_ref().map_or_else(Vec::new, |a| a.mat_vec(x))
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        self.a
            .as_ref()
            .map_or_else(|| vec![0.0; self.qp.dim()], |a| a.tr_mat_vec(y))
    }

    fn split_duals(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let lambda = y[..self.n_ineq].iter().map(|v| v.max(0.0)).collect();
        let mu = y[self.n_ineq..].to_vec();
        (lambda, mu)
    }

    fn kkt(&self, x: &[f64], y: &[f64]) -> f64 {
        let (lambda, mu) = self.split_duals(y);
        self.qp.kkt_residual(x, &lambda, &mu)
    }

    fn finish(
        &self,
        x: Vec<f64>,
        y: &[f64],
        status: QpStatus,
        iterations: usize,
        kkt: f64,
    ) -> QpSolution {
        let (lambda, mu) = self.split_duals(y);
        QpSolution {
            objective: self.qp.objective(&x),
            x,
            lambda,
            mu,
            status,
            iterations,
            kkt_residual: kkt,
        }
    }

    fn run(mut self, tol: f64, max_iter: usize) -> QpSolution {
        let n = self.qp.dim();
        let mc = self.n_cons();
        let s = self.settings;
        let mut x = vec![0.0; n];
        let mut z = vec![0.0_f64; mc];
        for i in 0..mc {
            z[i] = z[i].clamp(self.lo[i], self.hi[i]);
        }
        let mut y = vec![0.0; mc];

        let mut best = Candidate {
            kkt: self.kkt(&x, &y),
            x: x.clone(),
            y: y.clone(),
        };
        if best.kkt <= tol {
            return self.finish(best.x, &best.y, QpStatus::Optimal, 0, best.kkt);
        }

        // Relative ADMM stopping threshold; tightened after a failed polish.
        let mut eps = tol;
        let q = self.qp.linear().to_vec();

        for iter in 1..=max_iter {
            let rz: Vec<f64> = (0..mc).map(|i| self.rho[i] * z[i] - y[i]).collect();
            let mut rhs = self.at_mul(&rz);
            for j in 0..n {
                rhs[j] += s.sigma * x[j] - q[j];
            }
            let x_tilde = self.factor.solve(&rhs);
            let z_tilde = self.a_mul(&x_tilde);

            let x_new: Vec<f64> = (0..n)
                .map(|j| s.alpha * x_tilde[j] + (1.0 - s.alpha) * x[j])
                .collect();
            let mut z_new = vec![0.0; mc];
            let mut dy = vec![0.0; mc];
            for i in 0..mc {
                let zr = s.alpha * z_tilde[i] + (1.0 - s.alpha) * z[i];
                z_new[i] = (zr + y[i] / self.rho[i]).clamp(self.lo[i], self.hi[i]);
                dy[i] = self.rho[i] * (zr - z_new[i]);
                y[i] += dy[i];
            }
            x = x_new;
            z = z_new;

            if mc > 0 && iter % s.adapt_interval == 0 && self.certifies_infeasibility(&dy) {
                let kkt = self.kkt(&x, &y);
                return self.finish(x, &y, QpStatus::Infeasible, iter, kkt);
            }

            let ax = self.a_mul(&x);
            let px = self.qp.hessian().mat_vec(&x);
            let aty = self.at_mul(&y);
            let r_prim = ax
                .iter()
                .zip(&z)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let r_dual = (0..n).fold(0.0_f64, |m, j| m.max((px[j] + q[j] + aty[j]).abs()));
            let prim_scale = norm_inf(&ax).max(norm_inf(&z));
            let dual_scale = norm_inf(&px).max(norm_inf(&aty)).max(norm_inf(&q));

            let converged =
                r_prim <= eps * (1.0 + prim_scale) && r_dual <= eps * (1.0 + dual_scale);
            if converged || iter % s.polish_interval == 0 {
                let kkt = self.kkt(&x, &y);
                if kkt < best.kkt {
                    best = Candidate {
                        x: x.clone(),
                        y: y.clone(),
                        kkt,
                    };
                }
                if let Some(pol) = self.polish(&z, &y) {
                    if pol.kkt < best.kkt {
                        best = pol;
                    }
                }
                if best.kkt <= tol {
                    return self.finish(best.x, &best.y, QpStatus::Optimal, iter, best.kkt);
                }
                if converged {
                    eps = (eps * 0.1).max(1e-15);
                }
            }

            if mc > 0 && iter % s.adapt_interval == 0 {
                let prim_rel = r_prim / (1e-30 + prim_scale);
                let dual_rel = r_dual / (1e-30 + dual_scale);
                let factor = (prim_rel / (1e-30 + dual_rel)).sqrt().clamp(1e-6, 1e6);
                if !(0.2..=5.0).contains(&factor) {
                    for r in &mut self.rho {
                        *r = (*r * factor).clamp(1e-6, 1e6);
                    }
                    self.factor = factorize(self.qp.hessian(), self.a.as_ref(), &self.rho, s.sigma);
                }
            }
        }

        let kkt = self.kkt(&x, &y);
        if kkt < best.kkt {
            best = Candidate { x, y, kkt };
        }
        let status = if best.kkt <= tol {
            QpStatus::Optimal
        } else {
            QpStatus::MaxIterations
        };
        self.finish(best.x, &best.y, status, max_iter, best.kkt)
    }

    /// Primal infeasibility certificate on the dual increment.
    fn certifies_infeasibility(&self, dy: &[f64]) -> bool {
        let dy_norm = norm_inf(dy);
        if dy_norm == 0.0 {
            return false;
        }
        let eps = self.settings.infeasibility_tol * dy_norm;
        if norm_inf(&self.at_mul(dy)) > eps {
            return false;
        }
        let mut support = 0.0;
        for (i, &d) in dy.iter().enumerate() {
            if d > 0.0 {
                support += self.hi[i] * d;
            } else if d < 0.0 {
                if self.lo[i] == f64::NEG_INFINITY {
                    return false;
                }
                support += self.lo[i] * d;
            }
        }
        support < -eps
    }

    /// Solves the equality-constrained QP on the active set guessed from `(z, y)`.
    fn polish(&self, z: &[f64], y: &[f64]) -> Option<Candidate> {
        let a = self.a.as_ref()?;
        let n = self.qp.dim();
        let active: Vec<usize> = (0..self.n_cons())
            .filter(|&i| i >= self.n_ineq || self.hi[i] - z[i] < y[i])
            .collect();
        let p = self.qp.hessian();
        let q = self.qp.linear();
        if active.is_empty() {
            let fac = Cholesky::new(&regularized(p, 1e-12))?;
            let mut x = fac.solve(&q.iter().map(|v| -v).collect::<Vec<_>>());
            refine_unconstrained(p, q, &fac, &mut x);
            let yfull = vec![0.0; self.n_cons()];
            let kkt = self.kkt(&x, &yfull);
            return Some(Candidate { x, y: yfull, kkt });
        }
        let aa = DenseMatrix::from_fn(active.len(), n, |i, j| a[(active[i], j)]);
        let ba: Vec<f64> = active.iter().map(|&i| self.hi[i]).collect();

        // Quasi-definite KKT with regularization delta, eliminated onto x:
        // (P + δI + AaᵀAa/δ) x = r1 + Aaᵀ r2/δ,  ya = (Aa x − r2)/δ.
        let delta = 1e-7;
        let mut reduced = regularized(p, delta);
        let ata = aa.gram();
        for i in 0..n {
            for j in 0..n {
                reduced[(i, j)] += ata[(i, j)] / delta;
            }
        }
        let fac = Cholesky::new(&reduced)?;
        let solve_reg = |r1: &[f64], r2: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let mut rhs = aa.tr_mat_vec(r2);
            for j in 0..n {
                rhs[j] = r1[j] + rhs[j] / delta;
            }
            let dx = fac.solve(&rhs);
            let adx = aa.mat_vec(&dx);
            let dya = adx.iter().zip(r2).map(|(a, b)| (a - b) / delta).collect();
            (dx, dya)
        };

        let r1: Vec<f64> = q.iter().map(|v| -v).collect();
        let (mut x, mut ya) = solve_reg(&r1, &ba);
        for _ in 0..25 {
            // Residual of the unregularized system [P Aaᵀ; Aa 0].
            let px = p.mat_vec(&x);
            let aty = aa.tr_mat_vec(&ya);
            let res1: Vec<f64> = (0..n).map(|j| r1[j] - px[j] - aty[j]).collect();
            let ax = aa.mat_vec(&x);
            let res2: Vec<f64> = ba.iter().zip(&ax).map(|(b, a)| b - a).collect();
            if norm_inf(&res1).max(norm_inf(&res2)) < 1e-15 {
                break;
            }
            let (dx, dya) = solve_reg(&res1, &res2);
            for j in 0..n {
                x[j] += dx[j];
            }
            for (v, d) in ya.iter_mut().zip(&dya) {
                *v += d;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut yfull = vec![0.0; self.n_cons()];
        for (k, &i) in active.iter().enumerate() {
            yfull[i] = ya[k];
        }
        // Reject polished points whose inequality multipliers have the wrong sign.
        let wrong_sign = yfull[..self.n_ineq].iter().fold(0.0_f64, |m, v| m.max(-v));
        let kkt = wrong_sign.max(self.kkt(&x, &yfull));
        Some(Candidate { x, y: yfull, kkt })
    }
}

fn regularized(p: &DenseMatrix, delta: f64) -> DenseMatrix {
    let mut m = p.clone();
    for i in 0..m.rows() {
        m[(i, i)] += delta;
    }
    m
}

fn refine_unconstrained(p: &DenseMatrix, q: &[f64], fac: &Cholesky, x: &mut [f64]) {
    for _ in 0..10 {
        let px = p.mat_vec(x);
        let res: Vec<f64> = px.iter().zip(q).map(|(a, b)| -b - a).collect();
        if norm_inf(&res) < 1e-15 {
            break;
        }
        let dx = fac.solve(&res);
        for (v, d) in x.iter_mut().zip(&dx) {
            *v += d;
        }
    }
}

fn factorize(p: &DenseMatrix, a: Option<&DenseMatrix>, rho: &[f64], sigma: f64) -> Cholesky {
    let n = p.rows();
    let mut m = regularized(p, sigma);
    if let Some(a) = a {
        for (i, &r) in rho.iter().enumerate() {
            let row = a.row(i);
            for j in 0..n {
                let v = r * row[j];
                if v == 0.0 {
                    continue;
                }
                for k in 0..n {
                    m[(j, k)] += v * row[k];
                }
            }
        }
    }
    // σ > 0 and P ⪰ 0 make the matrix positive definite.
    Cholesky::new(&m).expect("ADMM system matrix is positive definite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::QpProblem;

    #[test]
    fn unconstrained_minimum_feasible() {
        let qp = QpProblem::new(DenseMatrix::identity(2), vec![0.0, 0.0])
            .unwrap()
            .with_inequalities(DenseMatrix::identity(2).scale(-1.0), vec![0.0, 0.0])
            .unwrap();
        let sol = solve_qp(&qp, 1e-8, 20_000);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.x.iter().all(|v| v.abs() < 1e-8));
        assert!(sol.objective.abs() < 1e-12);
    }

    #[test]
    fn active_bound() {
        // min (x − 1)² written as ½·2x² − 2x, subject to x ≤ 0.
        let qp = QpProblem::new(DenseMatrix::diag(&[2.0]), vec![-2.0])
            .unwrap()
            .with_inequalities(DenseMatrix::identity(1), vec![0.0])
            .unwrap();
        let sol = solve_qp(&qp, 1e-8, 20_000);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.x[0].abs() < 1e-8, "{:?}", sol.x);
        assert!((sol.lambda[0] - 2.0).abs() < 1e-6);
        assert!(sol.kkt_residual <= 1e-8);
    }

    #[test]
    fn equality_constrained() {
        // min ½‖x‖² s.t. x0 + x1 = 2 → (1, 1).
        let qp = QpProblem::new(DenseMatrix::identity(2), vec![0.0, 0.0])
            .unwrap()
            .with_equalities(
                DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
                vec![2.0],
            )
            .unwrap();
        let sol = solve_qp(&qp, 1e-8, 20_000);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-8 && (sol.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn detects_infeasible() {
        // x ≤ −1 and −x ≤ −1 cannot both hold.
        let g = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let qp = QpProblem::new(DenseMatrix::identity(1), vec![0.0])
            .unwrap()
            .with_inequalities(g, vec![-1.0, -1.0])
            .unwrap();
        let sol = solve_qp(&qp, 1e-8, 20_000);
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn singular_hessian_lp_like() {
        // Zero Hessian, bounded box: min x0 − x1 on [0,1]².
        let g = DenseMatrix::identity(2)
            .vstack(&DenseMatrix::identity(2).scale(-1.0))
            .unwrap();
        let qp = QpProblem::new(DenseMatrix::zeros(2, 2), vec![1.0, -1.0])
            .unwrap()
            .with_inequalities(g, vec![1.0, 1.0, 0.0, 0.0])
            .unwrap();
        let sol = solve_qp(&qp, 1e-8, 20_000);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-8);
    }

    #[test]
    fn max_iterations_reports_best_iterate() {
        let g = DenseMatrix::identity(3).scale(-1.0);
        let qp = QpProblem::new(DenseMatrix::identity(3), vec![1.0, -1.0, 0.5])
            .unwrap()
            .with_inequalities(g, vec![0.0; 3])
            .unwrap();
        let sol = solve_qp(&qp, 1e-30, 3);
        assert_eq!(sol.status, QpStatus::MaxIterations);
        assert_eq!(sol.iterations, 3);
        assert!(sol.x.iter().all(|v| v.is_finite()));
    }
}
