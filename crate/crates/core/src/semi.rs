//! Monotonous semi-NMF: `W` free in sign, `H` nonnegative and monotone.

use crate::error::{Error, Result};
use crate::linalg::{default_rank_tol, frobenius_norm, pseudo_inverse, DenseMatrix};
use crate::monmf::{
    alternate, check_init, check_pattern, check_rank, normalize_factors_abs, random_init,
    solve_h_subproblem_from, BlockUpdate, FactorResult, FitOptions, MonotonicityPattern,
};

/// Minimum-norm least-squares `W` for fixed `H`: `Z Hᵀ (H Hᵀ)⁺`.
///
/// Evaluated as `Z H⁺`, which is the same matrix since `H⁺ = Hᵀ(HHᵀ)⁺`, but
/// avoids squaring the condition number of `H`.
pub fn update_w_least_squares(z: &DenseMatrix, h: &DenseMatrix) -> Result<DenseMatrix> {
    if z.cols() != h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "Z has {} columns but H has {}",
            z.cols(),
            h.cols()
        )));
    }
    let pinv = pseudo_inverse(h, default_rank_tol(h))?;
    z.matmul(&pinv)
}

/// `‖(Z − WH)Hᵀ‖`, zero at any least-squares `W`.
pub fn normal_equations_residual(z: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    let resid = z.sub(&w.matmul(h)?)?;
    Ok(frobenius_norm(&resid.matmul(&h.transpose())?))
}

pub fn fit_monotonous_semi_nmf(
    z: &DenseMatrix,
    s: usize,
    pattern: &MonotonicityPattern,
    options: &FitOptions,
) -> Result<FactorResult> {
    check_rank(z, s)?;
    check_pattern(pattern, s)?;
    let (w0, h0) = random_init(z.rows(), z.cols(), s, (-1.0, 1.0), options.seed);
    fit_monotonous_semi_nmf_with_init(z, pattern, options, w0, h0)
}

pub fn fit_monotonous_semi_nmf_with_init(
    z: &DenseMatrix,
    pattern: &MonotonicityPattern,
    options: &FitOptions,
    w0: DenseMatrix,
    h0: DenseMatrix,
) -> Result<FactorResult> {
    check_init(z, &w0, &h0)?;
    check_rank(z, w0.cols())?;
    check_pattern(pattern, w0.cols())?;
    let h0 = pattern.project(&h0);
    alternate(
        z,
        w0,
        h0,
        options,
        Some(normalize_factors_abs),
        |_, h| {
            let w = update_w_least_squares(z, h)?;
            let residual = normal_equations_residual(z, &w, h)?;
            Ok(BlockUpdate {
                value: w,
                converged: true,
                normal_eq_residual: Some(residual),
            })
        },
        |w, h_old| {
            let step = solve_h_subproblem_from(z, w, pattern, h_old, options)?;
            Ok(BlockUpdate {
                value: step.h,
                converged: step.converged,
                normal_eq_residual: None,
            })
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monmf::fit_monotonous_nmf;
    use crate::qp::Direction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_factorization_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w0 = DenseMatrix::random_uniform(6, 3, -1.0, 1.0, &mut rng);
        let h = DenseMatrix::random_uniform(3, 15, 0.0, 1.0, &mut rng);
        let z = w0.matmul(&h).unwrap();
        let w = update_w_least_squares(&z, &h).unwrap();
        assert!(w.max_abs_diff(&w0) < 1e-8);
    }

    #[test]
    fn identity_design_returns_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = DenseMatrix::random_uniform(4, 3, -1.0, 1.0, &mut rng);
        let w = update_w_least_squares(&z, &DenseMatrix::identity(3)).unwrap();
        assert!(w.max_abs_diff(&z) < 1e-14);
    }

    #[test]
    fn rank_deficient_h_gives_minimum_norm_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = DenseMatrix::random_uniform(2, 10, 0.0, 1.0, &mut rng);
        // Third row duplicates the first.
        let h = DenseMatrix::from_fn(3, 10, |i, j| base[(i % 2, j)]);
        let z = DenseMatrix::random_uniform(5, 10, -1.0, 1.0, &mut rng);
        let w = update_w_least_squares(&z, &h).unwrap();
        assert!(normal_equations_residual(&z, &w, &h).unwrap() < 1e-8);

        // Oracle: reduce to the independent rows, solve there, then split the
        // coefficient of the duplicated row evenly (the minimum-norm split).
        let w_reduced = z.matmul(&pseudo_inverse(&base, 1e-12).unwrap()).unwrap();
        let expected = DenseMatrix::from_fn(5, 3, |i, j| match j {
            0 | 2 => 0.5 * w_reduced[(i, 0)],
            _ => w_reduced[(i, 1)],
        });
        assert!(
            w.max_abs_diff(&expected) < 1e-8,
            "{}",
            w.max_abs_diff(&expected)
        );
    }

    #[test]
    fn zero_data_has_zero_objective() {
        let z = DenseMatrix::zeros(4, 8);
        let p =
            MonotonicityPattern::new(vec![Direction::Increasing, Direction::Decreasing]).unwrap();
        let fit = fit_monotonous_semi_nmf(&z, 2, &p, &FitOptions::with_seed(4)).unwrap();
        assert_eq!(fit.trace[0].objective, 0.0);
        assert!(p.is_satisfied_by(&fit.h));
    }

    #[test]
    fn relaxation_not_worse_on_nonnegative_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = DenseMatrix::random_uniform(6, 20, 0.0, 1.0, &mut rng);
        let p =
            MonotonicityPattern::new(vec![Direction::Increasing, Direction::Decreasing]).unwrap();
        let opts = FitOptions::with_seed(9);
        let semi = fit_monotonous_semi_nmf(&z, 2, &p, &opts).unwrap();
        let nmf = fit_monotonous_nmf(&z, 2, &p, &opts).unwrap();
        assert!(semi.final_objective() <= nmf.final_objective() + 1e-6);
    }

    #[test]
    fn normal_equations_hold_every_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z = DenseMatrix::random_uniform(7, 25, -1.0, 1.0, &mut rng);
        let p =
            MonotonicityPattern::new(vec![Direction::Increasing, Direction::Decreasing]).unwrap();
        let fit = fit_monotonous_semi_nmf(&z, 2, &p, &FitOptions::with_seed(6)).unwrap();
        let bound = 1e-8 * (1.0 + frobenius_norm(&z));
        for rec in &fit.trace {
            assert!(rec.normal_eq_residual.unwrap() <= bound);
        }
        for w in fit.objective_trace().windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
    }
}
