//! Unconstrained NMF reference methods.
//!
//! * [`fit_nmf_multiplicative`]: Lee–Seung multiplicative updates for the
//!   Frobenius objective.
//! * [`fit_nmf_als`]: alternating exact NNLS on the rows of `W` and the
//!   columns of `H`, the same problem an active-set NMF solver addresses.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::monmf::{
    alternate, check_rank, normalize_factors, random_init, solve_w_subproblem, BlockUpdate,
    FactorResult, FitOptions,
};
use crate::qp::nnls_gram;

/// Denominator guard in the multiplicative updates.
pub const MU_EPSILON: f64 = 1e-12;

fn require_nonnegative(z: &DenseMatrix) -> Result<()> {
    match z.first_negative() {
        Some((row, col, value)) => Err(Error::NegativeInput { row, col, value }),
        None => Ok(()),
    }
}

/// `H ← H ∘ (WᵀZ) / (WᵀWH + ε)`.
pub fn multiplicative_update_h(
    z: &DenseMatrix,
    w: &DenseMatrix,
    h: &DenseMatrix,
) -> Result<DenseMatrix> {
    let wt = w.transpose();
    let num = wt.matmul(z)?;
    let den = w.gram().matmul(h)?;
    Ok(DenseMatrix::from_fn(h.rows(), h.cols(), |i, j| {
        h[(i, j)] * num[(i, j)] / (den[(i, j)] + MU_EPSILON)
    }))
}

/// `W ← W ∘ (ZHᵀ) / (WHHᵀ + ε)`.
pub fn multiplicative_update_w(
    z: &DenseMatrix,
    w: &DenseMatrix,
    h: &DenseMatrix,
) -> Result<DenseMatrix> {
    let num = z.matmul(&h.transpose())?;
    let den = w.matmul(&h.outer_gram())?;
    Ok(DenseMatrix::from_fn(w.rows(), w.cols(), |i, j| {
        w[(i, j)] * num[(i, j)] / (den[(i, j)] + MU_EPSILON)
    }))
}

pub fn fit_nmf_multiplicative(
    z: &DenseMatrix,
    s: usize,
    options: &FitOptions,
) -> Result<FactorResult> {
    require_nonnegative(z)?;
    check_rank(z, s)?;
    let (w0, h0) = random_init(z.rows(), z.cols(), s, (0.0, 1.0), options.seed);
    alternate(
        z,
        w0,
        h0,
        options,
        Some(normalize_factors),
        |w, h| {
            Ok(BlockUpdate {
                value: multiplicative_update_w(z, w, h)?,
                converged: true,
                normal_eq_residual: None,
            })
        },
        |w, h| {
            Ok(BlockUpdate {
                value: multiplicative_update_h(z, w, h)?,
                converged: true,
                normal_eq_residual: None,
            })
        },
    )
}

/// Column-wise NNLS: `argmin_{H ≥ 0} ‖Z − WH‖`.
pub fn nnls_h(z: &DenseMatrix, w: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    if z.rows() != w.rows() {
        return Err(Error::DimensionMismatch(format!(
            "Z has {} rows but W has {}",
            z.rows(),
            w.rows()
        )));
    }
    let gram = w.gram();
    let wtz = w.transpose().matmul(z)?;
    let mut h = DenseMatrix::zeros(w.cols(), z.cols());
    for j in 0..z.cols() {
        let col = nnls_gram(&gram, &wtz.column(j), tol);
        h.set_column(j, &col);
    }
    Ok(h)
}

pub fn fit_nmf_als(z: &DenseMatrix, s: usize, options: &FitOptions) -> Result<FactorResult> {
    require_nonnegative(z)?;
    check_rank(z, s)?;
    let (w0, h0) = random_init(z.rows(), z.cols(), s, (0.0, 1.0), options.seed);
    let tol = options.inner_tol;
    alternate(
        z,
        w0,
        h0,
        options,
        Some(normalize_factors),
        |_, h| {
            Ok(BlockUpdate {
                value: solve_w_subproblem(z, h, tol)?,
                converged: true,
                normal_eq_residual: None,
            })
        },
        |w, _| {
            Ok(BlockUpdate {
                value: nnls_h(z, w, tol)?,
                converged: true,
                normal_eq_residual: None,
            })
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn multiplicative_rank_one() {
        let u = DenseMatrix::column_vector(&[0.5, 1.0, 2.0, 0.2]);
        let v = DenseMatrix::from_rows(&[vec![1.0, 0.3, 0.7, 2.0, 0.1, 1.5]]).unwrap();
        let z = u.matmul(&v).unwrap();
        let opts = FitOptions {
            tol: 1e-12,
            ..FitOptions::with_seed(2)
        };
        let fit = fit_nmf_multiplicative(&z, 1, &opts).unwrap();
        assert!(fit.outer_iterations <= 500);
        assert!(fit.final_objective() < 1e-4, "{}", fit.final_objective());
    }

    #[test]
    fn multiplicative_zero_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut z = DenseMatrix::random_uniform(5, 6, 0.0, 1.0, &mut rng);
        z.set_column(2, &[0.0; 5]);
        let fit = fit_nmf_multiplicative(&z, 2, &FitOptions::with_seed(3)).unwrap();
        assert!(fit.h.column(2).iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn rejects_negative_data() {
        let z = DenseMatrix::from_rows(&[vec![1.0, -0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            fit_nmf_multiplicative(&z, 1, &FitOptions::default()),
            Err(Error::NegativeInput { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            fit_nmf_als(&z, 1, &FitOptions::default()),
            Err(Error::NegativeInput { .. })
        ));
    }

    #[test]
    fn traces_descend_and_factors_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = DenseMatrix::random_uniform(8, 30, 0.0, 1.0, &mut rng);
        let mu = fit_nmf_multiplicative(&z, 3, &FitOptions::with_seed(1)).unwrap();
        for w in mu.objective_trace().windows(2) {
            assert!(w[1] <= w[0] + 1e-6);
        }
        assert!(mu.w.is_nonnegative() && mu.h.is_nonnegative());

        let als = fit_nmf_als(&z, 3, &FitOptions::with_seed(1)).unwrap();
        for w in als.objective_trace().windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
        assert!(als.w.is_nonnegative() && als.h.is_nonnegative());
    }

    #[test]
    fn als_exact_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w0 = DenseMatrix::random_uniform(8, 2, 0.0, 1.0, &mut rng);
        let h0 = DenseMatrix::random_uniform(2, 20, 0.0, 1.0, &mut rng);
        let z = w0.matmul(&h0).unwrap();
        let opts = FitOptions {
            tol: 1e-12,
            max_outer_iter: 5000,
            ..FitOptions::with_seed(5)
        };
        let fit = fit_nmf_als(&z, 2, &opts).unwrap();
        assert!(fit.final_objective() < 1e-6, "{}", fit.final_objective());
    }

    #[test]
    fn als_overcomplete_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z = DenseMatrix::random_uniform(4, 9, 0.0, 1.0, &mut rng);
        let fit = fit_nmf_als(&z, 4, &FitOptions::with_seed(6)).unwrap();
        assert!(fit.final_objective() < 1e-6, "{}", fit.final_objective());
    }
}
