//! Dense row-major matrices and the handful of decompositions the solvers need.
//!
//! Everything here is sized for factorization problems of at most a few
//! hundred rows or columns: products are naive triple loops, the SVD is
//! one-sided Jacobi and the Cholesky factorization is unblocked.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::Rng;

use crate::error::{Error, Result};

/// A real matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting empty shapes,
    /// mismatched lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::DataLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(n, m, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Column vector (`n x 1`).
    pub fn column_vector(values: &[f64]) -> Self {
        Self::from_fn(values.len(), 1, |i, _| values[i])
    }

    /// I.i.d. uniform entries on `[lo, hi)` drawn row by row from `rng`.
    pub fn random_uniform<R: Rng + ?Sized>(
        rows: usize,
        cols: usize,
        lo: f64,
        hi: f64,
        rng: &mut R,
    ) -> Self {
        Self::from_fn(rows, cols, |_, _| rng.gen_range(lo..hi))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                for j in i..n {
                    out.data[i * n + j] += a * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out.data[i * n + j] = out.data[j * n + i];
            }
        }
        out
    }

    /// `self · selfᵀ`.
    pub fn outer_gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mat_vec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · y`.
    pub fn tr_mat_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_mat_vec dimension");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "subtraction")?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "addition")?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute elementwise difference; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Row-major stacking of the entries, i.e. the rows of the matrix one after another.
    pub fn vec_rows(&self) -> Vec<f64> {
        self.data.clone()
    }

    /// Column-major stacking of the entries.
    pub fn vec_cols(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = other.shape();
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    /// First negative entry, scanning row by row.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.data
            .iter()
            .position(|&v| v < 0.0)
            .map(|p| (p / self.cols, p % self.cols, self.data[p]))
    }

    pub fn svd(&self) -> Svd {
        Svd::new(self)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    norm2(m.as_slice())
}

/// Default relative singular-value cutoff: machine epsilon times the larger dimension.
pub fn default_rank_tol(m: &DenseMatrix) -> f64 {
    f64::EPSILON * m.rows().max(m.cols()) as f64
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
///
/// `u` is `rows x k`, `v` is `cols x k` with `k = min(rows, cols)`; singular
/// values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn new(a: &DenseMatrix) -> Self {
        if a.rows() >= a.cols() {
            let (u, s, v) = jacobi_svd_tall(a);
            Svd {
                u,
                singular_values: s,
                v,
            }
        } else {
            let (v, s, u) = jacobi_svd_tall(&a.transpose());
            Svd {
                u,
                singular_values: s,
                v,
            }
        }
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self.max_singular_value();
        if smax == 0.0 {
            return 0;
        }
        let cutoff = rel_tol * smax;
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

/// One-sided (Hestenes) Jacobi on the columns of a tall matrix.
fn jacobi_svd_tall(a: &DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    const MAX_SWEEPS: usize = 80;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = DenseMatrix::zeros(m, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sigma;
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[j][i];
        }
    }
    (u, s, vm)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Moore–Penrose pseudo-inverse; singular values at or below
/// `tol * sigma_max` are treated as zero.
pub fn pseudo_inverse(m: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    let svd = m.svd();
    let smax = svd.max_singular_value();
    let cutoff = tol * smax;
    let (rows, cols) = m.shape();
    let mut out = DenseMatrix::zeros(cols, rows);
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma == 0.0 || sigma <= cutoff {
            continue;
        }
        let inv = 1.0 / sigma;
        for i in 0..cols {
            let vik = svd.v[(i, k)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..rows {
                out[(i, j)] += vik * svd.u[(j, k)];
            }
        }
    }
    Ok(out)
}

/// Number of singular values above `tol * sigma_max`; zero for the zero matrix.
pub fn effective_rank(m: &DenseMatrix, tol: f64) -> usize {
    m.svd().rank(tol)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Returns `None` when a pivot is not strictly positive.
    pub fn new(a: &DenseMatrix) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "cholesky of non-square matrix");
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn penrose_errors(a: &DenseMatrix, x: &DenseMatrix) -> [f64; 4] {
        let axa = a.matmul(x).unwrap().matmul(a).unwrap();
        let xax = x.matmul(a).unwrap().matmul(x).unwrap();
        let ax = a.matmul(x).unwrap();
        let xa = x.matmul(a).unwrap();
        [
            axa.max_abs_diff(a),
            xax.max_abs_diff(x),
            ax.max_abs_diff(&ax.transpose()),
            xa.max_abs_diff(&xa.transpose()),
        ]
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(Error::DataLength { .. })
        ));
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            DenseMatrix::new(0, 2, vec![]),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&DenseMatrix::zeros(2, 2)), 0.0);
        let m = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(frobenius_norm(&m), 5.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = DenseMatrix::random_uniform(4, 4, -2.0, 2.0, &mut rng);
        let mut brute = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                brute += r[(i, j)] * r[(i, j)];
            }
        }
        assert!((frobenius_norm(&r) - brute.sqrt()).abs() < 1e-14);
        assert_eq!(frobenius_norm(&r.sub(&r).unwrap()), 0.0);
    }

    #[test]
    fn pinv_identity_and_diagonal() {
        let i3 = DenseMatrix::identity(3);
        let p = pseudo_inverse(&i3, default_rank_tol(&i3)).unwrap();
        assert!(p.max_abs_diff(&i3) < 1e-15);

        let d = DenseMatrix::diag(&[2.0, 0.0]);
        let p = pseudo_inverse(&d, default_rank_tol(&d)).unwrap();
        assert!(p.max_abs_diff(&DenseMatrix::diag(&[0.5, 0.0])) < 1e-15);
    }

    #[test]
    fn pinv_full_rank_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DenseMatrix::random_uniform(3, 5, -1.0, 1.0, &mut rng);
        let x = pseudo_inverse(&a, default_rank_tol(&a)).unwrap();
        for e in penrose_errors(&a, &x) {
            assert!(e < 1e-10, "{e}");
        }
    }

    #[test]
    fn pinv_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = DenseMatrix::random_uniform(6, 2, -1.0, 1.0, &mut rng);
        let c = DenseMatrix::random_uniform(2, 4, -1.0, 1.0, &mut rng);
        let a = b.matmul(&c).unwrap();
        let x = pseudo_inverse(&a, 1e-10).unwrap();
        for e in penrose_errors(&a, &x) {
            assert!(e < 1e-10, "{e}");
        }
        assert_eq!(effective_rank(&a, 1e-10), 2);
    }

    #[test]
    fn pinv_rejects_negative_tol() {
        assert!(pseudo_inverse(&DenseMatrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn rank_examples() {
        let i3 = DenseMatrix::identity(3);
        assert_eq!(effective_rank(&i3, default_rank_tol(&i3)), 3);
        let u = DenseMatrix::column_vector(&[1.0, 2.0, 3.0]);
        let v = DenseMatrix::from_rows(&[vec![0.5, -1.0, 2.0, 4.0]]).unwrap();
        let outer = u.matmul(&v).unwrap();
        assert_eq!(effective_rank(&outer, default_rank_tol(&outer)), 1);
        let z = DenseMatrix::zeros(3, 4);
        assert_eq!(effective_rank(&z, 1e-12), 0);
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &(r, c) in &[(5, 3), (3, 7), (4, 4), (1, 6)] {
            let a = DenseMatrix::random_uniform(r, c, -1.0, 1.0, &mut rng);
            let svd = a.svd();
            let k = r.min(c);
            let us = DenseMatrix::from_fn(r, k, |i, j| svd.u[(i, j)] * svd.singular_values[j]);
            let back = us.matmul(&svd.v.transpose()).unwrap();
            assert!(back.max_abs_diff(&a) < 1e-12);
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let ch = Cholesky::new(&a).unwrap();
        let x = ch.solve(&[1.0, 2.0]);
        let back = a.mat_vec(&x);
        assert!((back[0] - 1.0).abs() < 1e-14 && (back[1] - 2.0).abs() < 1e-14);
        assert!(Cholesky::new(&DenseMatrix::diag(&[1.0, 0.0])).is_none());
    }

    #[test]
    fn kron_and_vec_orders() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(a.vec_rows(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.vec_cols(), vec![1.0, 3.0, 2.0, 4.0]);
        let k = DenseMatrix::identity(2).kron(&a);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(2, 3)], 2.0);
        assert_eq!(k[(0, 2)], 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn penrose_conditions_hold(seed in any::<u64>(), r in 1usize..=20, c in 1usize..=20) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = DenseMatrix::random_uniform(r, c, -1.0, 1.0, &mut rng);
                let x = pseudo_inverse(&a, default_rank_tol(&a)).unwrap();
                let scale = 1.0 + a.max_abs() * x.max_abs();
                for e in penrose_errors(&a, &x) {
                    prop_assert!(e <= 1e-10 * scale * scale, "penrose error {}", e);
                }
            }

            #[test]
            fn rank_bounded_by_min_dim(seed in any::<u64>(), r in 1usize..=12, c in 1usize..=12) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = DenseMatrix::random_uniform(r, c, -1.0, 1.0, &mut rng);
                prop_assert!(effective_rank(&a, default_rank_tol(&a)) <= r.min(c));
            }
        }
    }
}
