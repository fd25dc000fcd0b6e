//! Monotonous NMF: `min ‖Z − WH‖` over `W ≥ 0` and `H ≥ 0` with every row
//! of `H` monotone in its declared direction, solved by alternating least
//! squares.
//!
//! The `W` step is a set of independent NNLS problems, one per row of `W`.
//! The `H` step is a convex QP whose feasible set is a product of per-row
//! nonnegative monotone cones. It is solved either by accelerated projected
//! gradient with pool-adjacent-violators as the projection
//! ([`HBackend::PavaPgd`]) or by the generic QP solver on the vectorized
//! problem ([`HBackend::GenericQp`]).

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{default_rank_tol, dot, frobenius_norm, pseudo_inverse, Cholesky, DenseMatrix};
use crate::qp::{self, is_monotone, isotonic_project, nnls_gram, Direction, QpProblem};

/// Per-source monotonicity directions, one per row of `H`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityPattern {
    directions: Vec<Direction>,
}

impl MonotonicityPattern {
    pub fn new(directions: Vec<Direction>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidArgument("empty monotonicity pattern".into()));
        }
        Ok(Self { directions })
    }

    pub fn uniform(direction: Direction, s: usize) -> Result<Self> {
        Self::new(vec![direction; s])
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Pattern with entry `i` taken from position `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            directions: perm.iter().map(|&p| self.directions[p]).collect(),
        }
    }

    /// Exact check: every row of `h` is nonnegative and ordered per its direction.
    pub fn is_satisfied_by(&self, h: &DenseMatrix) -> bool {
        h.rows() == self.len()
            && self
                .directions
                .iter()
                .enumerate()
                .all(|(i, &d)| h.row(i).iter().all(|&v| v >= 0.0) && is_monotone(h.row(i), d))
    }

    /// Projects every row of `h` onto its nonnegative monotone cone.
    pub fn project(&self, h: &DenseMatrix) -> DenseMatrix {
        let mut out = h.clone();
        for (i, &d) in self.directions.iter().enumerate() {
            let p = isotonic_project(h.row(i), d, true);
            out.row_mut(i).copy_from_slice(&p);
        }
        out
    }
}

impl fmt::Display for MonotonicityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.directions.iter().map(|d| d.label()).collect();
        f.write_str(&labels.join(","))
    }
}

impl FromStr for MonotonicityPattern {
    type Err = Error;

    /// Parses comma-separated labels such as `inc,inc,dec`.
    fn from_str(s: &str) -> Result<Self> {
        let directions = s
            .split(',')
            .map(|tok| match tok.trim().to_ascii_lowercase().as_str() {
                "inc" | "increasing" | "up" => Ok(Direction::Increasing),
                "dec" | "decreasing" | "down" => Ok(Direction::Decreasing),
                other => Err(Error::InvalidArgument(format!(
                    "unknown direction {other:?} (expected inc or dec)"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(directions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HBackend {
    PavaPgd,
    GenericQp,
}

impl FromStr for HBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pava-pgd" => Ok(Self::PavaPgd),
            "generic-qp" => Ok(Self::GenericQp),
            other => Err(Error::InvalidArgument(format!(
                "unknown H backend {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_outer_iter: usize,
    /// Stop once both `‖W_old − W_new‖` and `‖H_old − H_new‖` fall below this.
    pub tol: f64,
    /// Tolerance handed to the subproblem solvers.
    pub inner_tol: f64,
    pub max_inner_iter: usize,
    pub h_backend: HBackend,
    pub normalize: bool,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_outer_iter: 500,
            tol: 1e-6,
            inner_tol: 1e-8,
            max_inner_iter: 20_000,
            h_backend: HBackend::PavaPgd,
            normalize: true,
            seed: 0,
        }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.inner_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_outer_iter == 0 || self.max_inner_iter == 0 {
            return Err(Error::InvalidArgument(
                "iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// One outer ALS iteration.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// `‖Z − WH‖` after the iteration.
    pub objective: f64,
    pub w_change: f64,
    pub h_change: f64,
    /// `‖(Z − WH_old)H_oldᵀ‖` right after a least-squares `W` update, when
    /// the method has one.
    pub normal_eq_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FactorResult {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
    pub trace: Vec<IterationRecord>,
    pub outer_iterations: usize,
    pub termination: Termination,
    /// Rows of `H` that are identically zero at the end.
    pub dead_sources: Vec<usize>,
    /// Number of inner solves that stopped on their iteration limit.
    pub inner_failures: usize,
    pub warnings: Vec<String>,
}

impl FactorResult {
    pub fn objective_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }

    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.objective)
    }
}

/// `(m−1) x m` first-difference matrix `D` with `D·h ≤ 0` iff `h` is ordered
/// per `direction`: rows `[1, −1]` for increasing, `[−1, 1]` for decreasing.
pub fn build_difference_matrix(m: usize, direction: Direction) -> Result<DenseMatrix> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "difference matrix needs at least 2 samples, got {m}"
        )));
    }
    Ok(qp::chain_constraints(m, direction).expect("m >= 2"))
}

/// Block-diagonal stack of per-source difference matrices, `(m−1)s x ms`.
///
/// Acts on the source-major vectorization of `H` (row 1, then row 2, ...),
/// which is [`DenseMatrix::vec_rows`].
pub fn build_constraint_matrix(pattern: &MonotonicityPattern, m: usize) -> Result<DenseMatrix> {
    let s = pattern.len();
    let mut a = DenseMatrix::zeros((m.max(2) - 1) * s, m * s);
    for (k, &d) in pattern.directions().iter().enumerate() {
        let block = build_difference_matrix(m, d)?;
        for i in 0..m - 1 {
            for j in 0..m {
                a[(k * (m - 1) + i, k * m + j)] = block[(i, j)];
            }
        }
    }
    Ok(a)
}

pub(crate) fn reconstruction_residual(z: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> f64 {
    let wh = w.matmul(h).expect("factor shapes checked by caller");
    frobenius_norm(&z.sub(&wh).expect("factor shapes checked by caller"))
}

/// `argmin_{W ≥ 0} ‖Z − WH‖`, one NNLS per row of `W` with design `Hᵀ`.
pub fn solve_w_subproblem(z: &DenseMatrix, h: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    if z.cols() != h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "Z has {} columns but H has {}",
            z.cols(),
            h.cols()
        )));
    }
    let gram = h.outer_gram();
    let zht = z.matmul(&h.transpose())?;
    let mut w = DenseMatrix::zeros(z.rows(), h.rows());
    for i in 0..z.rows() {
        let row = nnls_gram(&gram, zht.row(i), tol);
        w.row_mut(i).copy_from_slice(&row);
    }
    Ok(w)
}

/// Outcome of one `H` subproblem solve.
#[derive(Debug, Clone)]
pub struct HStep {
    pub h: DenseMatrix,
    pub converged: bool,
    pub iterations: usize,
}

/// `argmin ‖Z − WH‖` over nonnegative, pattern-monotone `H`, started from
/// the projection of zero.
pub fn solve_h_subproblem(
    z: &DenseMatrix,
    w: &DenseMatrix,
    pattern: &MonotonicityPattern,
    options: &FitOptions,
) -> Result<DenseMatrix> {
    let start = DenseMatrix::zeros(pattern.len(), z.cols());
    Ok(solve_h_subproblem_from(z, w, pattern, &start, options)?.h)
}

/// Warm-started `H` solve. The result is exactly feasible and never has a
/// larger objective than the projection of `start`.
pub fn solve_h_subproblem_from(
    z: &DenseMatrix,
    w: &DenseMatrix,
    pattern: &MonotonicityPattern,
    start: &DenseMatrix,
    options: &FitOptions,
) -> Result<HStep> {
    let s = pattern.len();
    if w.cols() != s || w.rows() != z.rows() {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, expected {}x{s}",
            w.rows(),
            w.cols(),
            z.rows()
        )));
    }
    if start.shape() != (s, z.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "starting H is {}x{}, expected {s}x{}",
            start.rows(),
            start.cols(),
            z.cols()
        )));
    }
    let start = pattern.project(start);
    let step = match options.h_backend {
        HBackend::PavaPgd => h_step_projected_gradient(z, w, pattern, &start, options),
        HBackend::GenericQp => h_step_generic_qp(z, w, pattern, options)?,
    };
    if reconstruction_residual(z, w, &step.h) > reconstruction_residual(z, w, &start) {
        return Ok(HStep { h: start, ..step });
    }
    Ok(step)
}

/// FISTA with gradient-based adaptive restart on `½‖Z − WH‖²`; the
/// projection is row-wise PAVA since the feasible set is a product of cones.
fn h_step_projected_gradient(
    z: &DenseMatrix,
    w: &DenseMatrix,
    pattern: &MonotonicityPattern,
    start: &DenseMatrix,
    options: &FitOptions,
) -> HStep {
    let gram = w.gram();
    let wtz = w.transpose().matmul(z).expect("shapes checked");
    let lipschitz = gram.svd().max_singular_value();
    if lipschitz == 0.0 {
        return HStep {
            h: start.clone(),
            converged: true,
            iterations: 0,
        };
    }
    let step = 1.0 / lipschitz;
    let threshold = options.inner_tol * frobenius_norm(&wtz).max(1.0);

    let gradient_step = |x: &DenseMatrix| -> DenseMatrix {
        let grad = gram.matmul(x).expect("shapes").sub(&wtz).expect("shapes");
        let mut moved = x.clone();
        for (v, g) in moved.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *v -= step * g;
        }
        pattern.project(&moved)
    };
    let stationarity =
        |x: &DenseMatrix, next: &DenseMatrix| lipschitz * frobenius_norm(&x.sub(next).unwrap());

    let mut x = start.clone();
    let mut x_next = gradient_step(&x);
    if stationarity(&x, &x_next) <= threshold {
        return HStep {
            h: x,
            converged: true,
            iterations: 0,
        };
    }
    let objective = |h: &DenseMatrix| {
        let gh = gram.matmul(h).expect("shapes");
        0.5 * dot(h.as_slice(), gh.as_slice()) - dot(h.as_slice(), wtz.as_slice())
    };
    let mut y = x.clone();
    let mut t = 1.0_f64;
    for k in 1..=options.max_inner_iter {
        if k % FACE_SOLVE_INTERVAL == 0 {
            let mut candidate = x.clone();
            for _ in 0..MAX_FACE_STEPS {
                let (next, full) = step_toward_face_minimum(
                    &candidate,
                    &face_solve(&gram, &wtz, &candidate),
                    pattern,
                );
                if !(objective(&next) < objective(&candidate)) {
                    break;
                }
                candidate = next;
                if full {
                    break;
                }
            }
            if objective(&candidate) < objective(&x) {
                let next = gradient_step(&candidate);
                if stationarity(&candidate, &next) <= threshold {
                    return HStep {
                        h: candidate,
                        converged: true,
                        iterations: k,
                    };
                }
                x = candidate;
                y = x.clone();
                t = 1.0;
            }
        }
        let x_new = if k == 1 {
            x_next.clone()
        } else {
            gradient_step(&y)
        };
        let restart = dot(
            y.sub(&x_new).unwrap().as_slice(),
            x_new.sub(&x).unwrap().as_slice(),
        ) > 0.0;
        if restart {
            t = 1.0;
            y = x_new.clone();
        } else {
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_new;
            y = DenseMatrix::from_fn(x_new.rows(), x_new.cols(), |i, j| {
                x_new[(i, j)] + beta * (x_new[(i, j)] - x[(i, j)])
            });
            t = t_new;
        }
        x = x_new;
        x_next = gradient_step(&x);
        if stationarity(&x, &x_next) <= threshold {
            return HStep {
                h: x,
                converged: true,
                iterations: k,
            };
        }
    }
    HStep {
        h: x,
        converged: false,
        iterations: options.max_inner_iter,
    }
}

/// Projected-gradient iterations between exact solves on the current face.
const FACE_SOLVE_INTERVAL: usize = 25;
/// Chained active-set steps per face solve.
const MAX_FACE_STEPS: usize = 20;

/// Minimizer of `½ tr(HᵀGH) − ⟨WᵀZ, H⟩` on the face of `h` closest to `h`:
/// each row is split into maximal runs of equal values, zero runs stay at
/// zero and every other run shares one free value.
fn face_solve(gram: &DenseMatrix, wtz: &DenseMatrix, h: &DenseMatrix) -> DenseMatrix {
    // (row, start, end) of each free run.
    let mut runs: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..h.rows() {
        let row = h.row(i);
        let mut start = 0;
        for j in 1..=row.len() {
            if j == row.len() || row[j] != row[start] {
                if row[start] != 0.0 {
                    runs.push((i, start, j));
                }
                start = j;
            }
        }
    }
    let mut out = DenseMatrix::zeros(h.rows(), h.cols());
    if runs.is_empty() {
        return out;
    }
    let k = runs.len();
    let reduced = DenseMatrix::from_fn(k, k, |a, b| {
        let (ia, sa, ea) = runs[a];
        let (ib, sb, eb) = runs[b];
        let overlap = ea.min(eb).saturating_sub(sa.max(sb));
        gram[(ia, ib)] * overlap as f64
    });
    // Solve for the change from the current run values so that directions
    // the objective does not see (e.g. a row whose W column is zero) stay put.
    let current: Vec<f64> = runs.iter().map(|&(i, s, _)| h[(i, s)]).collect();
    let applied = reduced.mat_vec(&current);
    let rhs: Vec<f64> = runs
        .iter()
        .zip(&applied)
        .map(|(&(i, s, e), a)| wtz.row(i)[s..e].iter().sum::<f64>() - a)
        .collect();
    let delta = match Cholesky::new(&reduced) {
        Some(c) => c.solve(&rhs),
        None => {
            let pinv =
                pseudo_inverse(&reduced, default_rank_tol(&reduced)).expect("valid tolerance");
            pinv.mat_vec(&rhs)
        }
    };
    let values = current.iter().zip(delta).map(|(c, d)| c + d);
    for (&(i, s, e), v) in runs.iter().zip(values) {
        out.row_mut(i)[s..e].iter_mut().for_each(|x| *x = v);
    }
    out
}

/// Largest feasible point on the segment from `x` to `target`, made exactly
/// feasible by projection, and whether the whole segment was feasible.
fn step_toward_face_minimum(
    x: &DenseMatrix,
    target: &DenseMatrix,
    pattern: &MonotonicityPattern,
) -> (DenseMatrix, bool) {
    let mut alpha = 1.0_f64;
    let mut limit = |slack: f64, change: f64| {
        // slack ≥ 0 now; keep slack + α·change ≥ 0.
        if change < 0.0 {
            alpha = alpha.min(slack / -change);
        }
    };
    for (i, dir) in pattern.directions().iter().enumerate() {
        let (xr, tr) = (x.row(i), target.row(i));
        for j in 0..xr.len() {
            limit(xr[j], tr[j] - xr[j]);
        }
        for j in 1..xr.len() {
            let (sx, st) = match dir {
                Direction::Increasing => (xr[j] - xr[j - 1], tr[j] - tr[j - 1]),
                Direction::Decreasing => (xr[j - 1] - xr[j], tr[j - 1] - tr[j]),
            };
            limit(sx, st - sx);
        }
    }
    let alpha = alpha.clamp(0.0, 1.0);
    let moved = DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        x[(i, j)] + alpha * (target[(i, j)] - x[(i, j)])
    });
    (pattern.project(&moved), alpha >= 1.0)
}

/// The vectorized `H` problem as one QP over the source-major stacking
/// `x = vec_rows(H)`: Hessian `WᵀW ⊗ I_m`, linear term `−vec_rows(WᵀZ)`,
/// constraints `−x ≤ 0` and `A·x ≤ 0`.
pub fn h_subproblem_qp(
    z: &DenseMatrix,
    w: &DenseMatrix,
    pattern: &MonotonicityPattern,
) -> Result<QpProblem> {
    let m = z.cols();
    let ms = m * pattern.len();
    let hess = w.gram().kron(&DenseMatrix::identity(m));
    let wtz = w.transpose().matmul(z)?;
    let f: Vec<f64> = wtz.vec_rows().iter().map(|v| -v).collect();
    let neg = DenseMatrix::identity(ms).scale(-1.0);
    let g = if m >= 2 {
        neg.vstack(&build_constraint_matrix(pattern, m)?)?
    } else {
        neg
    };
    let rows = g.rows();
    QpProblem::new(hess, f)?.with_inequalities(g, vec![0.0; rows])
}

fn h_step_generic_qp(
    z: &DenseMatrix,
    w: &DenseMatrix,
    pattern: &MonotonicityPattern,
    options: &FitOptions,
) -> Result<HStep> {
    let problem = h_subproblem_qp(z, w, pattern)?;
    let sol = qp::solve_qp(&problem, options.inner_tol, options.max_inner_iter);
    let raw = DenseMatrix::new(pattern.len(), z.cols(), sol.x)?;
    // The QP answer is feasible to within the solver tolerance; projecting
    // makes it exact.
    Ok(HStep {
        h: pattern.project(&raw),
        converged: sol.status == qp::QpStatus::Optimal,
        iterations: sol.iterations,
    })
}

/// Rescales each nonzero row of `H` to a maximum of one and the matching
/// column of `W` inversely, leaving `WH` unchanged.
pub fn normalize_factors(w: &DenseMatrix, h: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    rescale_rows(w, h, |row| {
        row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    })
}

/// As [`normalize_factors`] but scaling by the largest absolute entry.
pub fn normalize_factors_abs(w: &DenseMatrix, h: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    rescale_rows(w, h, |row| row.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

fn rescale_rows(
    w: &DenseMatrix,
    h: &DenseMatrix,
    scale_of: impl Fn(&[f64]) -> f64,
) -> (DenseMatrix, DenseMatrix) {
    let mut w = w.clone();
    let mut h = h.clone();
    for i in 0..h.rows() {
        let scale = scale_of(h.row(i));
        if !(scale > 0.0) || !scale.is_finite() {
            continue;
        }
        for v in h.row_mut(i) {
            *v /= scale;
        }
        for r in 0..w.rows() {
            w[(r, i)] *= scale;
        }
    }
    (w, h)
}

pub(crate) fn zero_rows(h: &DenseMatrix) -> Vec<usize> {
    (0..h.rows())
        .filter(|&i| h.row(i).iter().all(|&v| v == 0.0))
        .collect()
}

pub(crate) fn check_rank(z: &DenseMatrix, s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidArgument("rank s must be at least 1".into()));
    }
    if s > z.rows().min(z.cols()) {
        return Err(Error::InvalidArgument(format!(
            "rank {s} exceeds min(n, m) = {}",
            z.rows().min(z.cols())
        )));
    }
    Ok(())
}

pub(crate) fn check_pattern(pattern: &MonotonicityPattern, s: usize) -> Result<()> {
    if pattern.len() != s {
        return Err(Error::DimensionMismatch(format!(
            "pattern has {} entries but rank is {s}",
            pattern.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_init(z: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<()> {
    let s = w.cols();
    if w.rows() != z.rows() || h.shape() != (s, z.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "initial factors {}x{} and {}x{} do not fit Z {}x{}",
            w.rows(),
            w.cols(),
            h.rows(),
            h.cols(),
            z.rows(),
            z.cols()
        )));
    }
    Ok(())
}

/// Seeded initialization: `H` uniform(0, 1) drawn first, then `W` uniform on
/// `w_range`, from the same stream.
pub(crate) fn random_init(
    n: usize,
    m: usize,
    s: usize,
    w_range: (f64, f64),
    seed: u64,
) -> (DenseMatrix, DenseMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = DenseMatrix::random_uniform(s, m, 0.0, 1.0, &mut rng);
    let w = DenseMatrix::random_uniform(n, s, w_range.0, w_range.1, &mut rng);
    (w, h)
}

pub(crate) type Normalizer = fn(&DenseMatrix, &DenseMatrix) -> (DenseMatrix, DenseMatrix);

/// Outcome of one block update inside the alternating loop.
pub(crate) struct BlockUpdate {
    pub value: DenseMatrix,
    pub converged: bool,
    pub normal_eq_residual: Option<f64>,
}

/// Generic alternating loop: `W` step, then `H` step, optional
/// normalization, then the factor-change stopping test.
pub(crate) fn alternate(
    z: &DenseMatrix,
    mut w: DenseMatrix,
    mut h: DenseMatrix,
    options: &FitOptions,
    normalizer: Option<Normalizer>,
    mut update_w: impl FnMut(&DenseMatrix, &DenseMatrix) -> Result<BlockUpdate>,
    mut update_h: impl FnMut(&DenseMatrix, &DenseMatrix) -> Result<BlockUpdate>,
) -> Result<FactorResult> {
    options.validate()?;
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut inner_failures = 0;
    for iter in 1..=options.max_outer_iter {
        let wu = update_w(&w, &h)?;
        let hu = update_h(&wu.value, &h)?;
        inner_failures += usize::from(!wu.converged) + usize::from(!hu.converged);
        let (w_new, h_new) = match (normalizer, options.normalize) {
            (Some(norm), true) => norm(&wu.value, &hu.value),
            _ => (wu.value, hu.value),
        };
        let w_change = frobenius_norm(&w.sub(&w_new)?);
        let h_change = frobenius_norm(&h.sub(&h_new)?);
        w = w_new;
        h = h_new;
        let objective = reconstruction_residual(z, &w, &h);
        log::debug!("iter {iter}: objective {objective:.6e} dW {w_change:.3e} dH {h_change:.3e}");
        trace.push(IterationRecord {
            iter,
            objective,
            w_change,
            h_change,
            normal_eq_residual: wu.normal_eq_residual,
        });
        if w_change < options.tol && h_change < options.tol {
            termination = Termination::Converged;
            break;
        }
    }
    let dead_sources = zero_rows(&h);
    let mut warnings = Vec::new();
    if !dead_sources.is_empty() {
        warnings.push(format!("sources with all-zero signal: {dead_sources:?}"));
    }
    if inner_failures > 0 {
        warnings.push(format!(
            "{inner_failures} subproblem solves hit their iteration limit"
        ));
    }
    Ok(FactorResult {
        w,
        h,
        outer_iterations: trace.len(),
        trace,
        termination,
        dead_sources,
        inner_failures,
        warnings,
    })
}

/// Monotonous NMF from a seeded random start.
pub fn fit_monotonous_nmf(
    z: &DenseMatrix,
    s: usize,
    pattern: &MonotonicityPattern,
    options: &FitOptions,
) -> Result<FactorResult> {
    check_rank(z, s)?;
    check_pattern(pattern, s)?;
    let (w0, h0) = random_init(z.rows(), z.cols(), s, (0.0, 1.0), options.seed);
    fit_monotonous_nmf_with_init(z, pattern, options, w0, h0)
}

/// Monotonous NMF from caller-supplied initial factors; `H` is projected
/// onto the feasible set before the first iteration.
pub fn fit_monotonous_nmf_with_init(
    z: &DenseMatrix,
    pattern: &MonotonicityPattern,
    options: &FitOptions,
    w0: DenseMatrix,
    h0: DenseMatrix,
) -> Result<FactorResult> {
    check_init(z, &w0, &h0)?;
    check_rank(z, w0.cols())?;
    check_pattern(pattern, w0.cols())?;
    let mut warnings = Vec::new();
    if let Some((i, j, v)) = z.first_negative() {
        let msg = format!(
            "data has negative entries (first at ({i}, {j}) = {v}); monotonous semi-NMF fits mixed-sign data"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let h0 = pattern.project(&h0);
    let inner_tol = options.inner_tol;
    let mut result = alternate(
        z,
        w0,
        h0,
        options,
        Some(normalize_factors),
        |w_old, h| {
            let w = solve_w_subproblem(z, h, inner_tol)?;
            // Keep the previous W if round-off made the exact solve worse.
            let value = if reconstruction_residual(z, &w, h) <= reconstruction_residual(z, w_old, h)
            {
                w
            } else {
                w_old.clone()
            };
            Ok(BlockUpdate {
                value,
                converged: true,
                normal_eq_residual: None,
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
    )?;
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}
