//! Lawson–Hanson active-set NNLS on the normal equations.

use crate::linalg::{default_rank_tol, pseudo_inverse, Cholesky, DenseMatrix};

/// `argmin_{x ≥ 0} ‖Ax − b‖`.
///
/// On return, passive variables have gradient within `tol` of zero and
/// variables held at zero have gradient `≥ −tol`.
pub fn nnls(a: &DenseMatrix, b: &[f64], tol: f64) -> Vec<f64> {
    assert_eq!(a.rows(), b.len(), "nnls: right-hand side length");
    nnls_gram(&a.gram(), &a.tr_mat_vec(b), tol)
}

/// NNLS given the Gram matrix `AᵀA` and `Aᵀb` directly, so callers solving
/// many right-hand sides against the same design can share one Gram matrix.
pub fn nnls_gram(gram: &DenseMatrix, atb: &[f64], tol: f64) -> Vec<f64> {
    let p = atb.len();
    assert_eq!(gram.shape(), (p, p), "nnls: gram shape");
    let mut x = vec![0.0; p];
    let mut passive = vec![false; p];
    // Variables that failed to enter because of round-off; skipped until the
    // active set changes.
    let mut blocked = vec![false; p];
    let max_outer = 3 * p + 10;

    for _ in 0..max_outer {
        let w = negative_gradient(gram, atb, &x);
        let entering = (0..p)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = entering else { break };
        passive[j] = true;

        let mut entered_cleanly = true;
        for inner in 0..=p {
            let s = solve_passive(gram, atb, &passive);
            if (0..p).all(|k| !passive[k] || s[k] > 0.0) {
                x = s;
                break;
            }
            if inner == 0 && s[j] <= 0.0 {
                passive[j] = false;
                blocked[j] = true;
                entered_cleanly = false;
                break;
            }
            let mut alpha = f64::INFINITY;
            for k in 0..p {
                if passive[k] && s[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - s[k]));
                }
            }
            for k in 0..p {
                if passive[k] {
                    x[k] += alpha * (s[k] - x[k]);
                    if x[k] <= 0.0 || (s[k] <= 0.0 && x[k] <= f64::EPSILON * (1.0 + s[k].abs())) {
                        x[k] = 0.0;
                        passive[k] = false;
                    }
                }
            }
        }
        if entered_cleanly {
            blocked.iter_mut().for_each(|b| *b = false);
        }
    }
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    x
}

fn negative_gradient(gram: &DenseMatrix, atb: &[f64], x: &[f64]) -> Vec<f64> {
    let gx = gram.mat_vec(x);
    atb.iter().zip(&gx).map(|(c, g)| c - g).collect()
}

/// Unconstrained minimizer over the passive variables, others fixed at zero.
fn solve_passive(gram: &DenseMatrix, atb: &[f64], passive: &[bool]) -> Vec<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&k| passive[k]).collect();
    let sub = DenseMatrix::from_fn(idx.len(), idx.len(), |i, j| gram[(idx[i], idx[j])]);
    let rhs: Vec<f64> = idx.iter().map(|&k| atb[k]).collect();
    let sol = match Cholesky::new(&sub) {
        Some(ch) => ch.solve(&rhs),
        None => {
            let pinv = pseudo_inverse(&sub, default_rank_tol(&sub)).expect("valid tolerance");
            pinv.mat_vec(&rhs)
        }
    };
    let mut out = vec![0.0; passive.len()];
    for (k, &i) in idx.iter().enumerate() {
        out[i] = sol[k];
    }
    out
}
