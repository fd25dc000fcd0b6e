//! Synthetic source-separation scenarios, noise injection and evaluation.
//!
//! Two built-in scenarios mix three smooth monotone signals sampled at
//! `t = 1..=50` with an `8 x 3` mixing matrix drawn uniformly from `(0, 1)`:
//!
//! * `S1`: saturating exponential `1 − exp(−t/τ)`, linear ramp `t/50` and a
//!   logistic sigmoid, all increasing.
//! * `S2`: the first two of those plus a decreasing exponential `exp(−t/τ)`.
//!
//! Shape parameters are drawn per seed from fixed ranges and recorded in the
//! bundle metadata. Noise is additive, zero-mean uniform with amplitude equal
//! to a fraction of the data range.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_matrix;
use crate::linalg::{default_rank_tol, dot, effective_rank, frobenius_norm, norm2, DenseMatrix};
use crate::monmf::{FactorResult, FitOptions, MonotonicityPattern, Termination};
use crate::qp::Direction;

pub const SCENARIO_SAMPLES: usize = 50;
pub const SCENARIO_MIXTURES: usize = 8;
pub const SCENARIO_SOURCES: usize = 3;
pub const DEFAULT_NOISE_LEVEL: f64 = 0.05;

/// Human-readable statement of the noise convention, embedded in reports.
pub const NOISE_MODEL: &str =
    "additive uniform(-1,1) * level * (max(Z) - min(Z)), i.i.d. per entry";

/// Largest rank accepted by [`align_signals`] (it enumerates all permutations).
pub const MAX_ALIGN_SOURCES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    S1,
    S2,
    Custom,
}

impl ScenarioKind {
    pub fn pattern(self) -> Option<MonotonicityPattern> {
        let dirs = match self {
            ScenarioKind::S1 => vec![Direction::Increasing; 3],
            ScenarioKind::S2 => vec![
                Direction::Increasing,
                Direction::Increasing,
                Direction::Decreasing,
            ],
            ScenarioKind::Custom => return None,
        };
        Some(MonotonicityPattern::new(dirs).expect("non-empty"))
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::S1 => "s1",
            ScenarioKind::S2 => "s2",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Self::S1),
            "s2" => Ok(Self::S2),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario {other:?} (expected s1 or s2)"
            ))),
        }
    }
}

/// Parametric shape of one ground-truth source, evaluated at `t = 1..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SignalShape {
    /// `1 − exp(−t/tau)`
    Saturating { tau: f64 },
    /// `t / t_max`
    Ramp { t_max: f64 },
    /// `1 / (1 + exp(−(t − center)/width))`
    Sigmoid { center: f64, width: f64 },
    /// `exp(−t/tau)`
    Decay { tau: f64 },
    /// `((t − onset)/(t_end − onset))₊^power`, zero before `onset`.
    DelayedRise { onset: f64, t_end: f64, power: f64 },
    /// `((cutoff − t)/(cutoff − 1))₊^power`, zero from `cutoff` on.
    EarlyFall { cutoff: f64, power: f64 },
}

impl SignalShape {
    pub fn direction(&self) -> Direction {
        match self {
            SignalShape::Decay { .. } | SignalShape::EarlyFall { .. } => Direction::Decreasing,
            _ => Direction::Increasing,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            SignalShape::Saturating { tau } => 1.0 - (-t / tau).exp(),
            SignalShape::Ramp { t_max } => t / t_max,
            SignalShape::Sigmoid { center, width } => 1.0 / (1.0 + (-(t - center) / width).exp()),
            SignalShape::Decay { tau } => (-t / tau).exp(),
            SignalShape::DelayedRise {
                onset,
                t_end,
                power,
            } => ((t - onset) / (t_end - onset)).max(0.0).powf(power),
            SignalShape::EarlyFall { cutoff, power } => {
                ((cutoff - t) / (cutoff - 1.0)).max(0.0).powf(power)
            }
        }
    }

    /// Samples at `t = 1..=m`, with a running max (or min) applied so the
    /// row is exactly monotone in floating point.
    pub fn sample(&self, m: usize) -> Vec<f64> {
        let mut out: Vec<f64> = (1..=m).map(|t| self.value(t as f64)).collect();
        for j in 1..m {
            out[j] = match self.direction() {
                Direction::Increasing => out[j].max(out[j - 1]),
                Direction::Decreasing => out[j].min(out[j - 1]),
            };
        }
        out
    }
}

/// Ground truth plus clean and noisy observations for one synthetic run.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub noise_level: f64,
    pub shapes: Vec<SignalShape>,
    pub pattern: MonotonicityPattern,
    pub w_true: DenseMatrix,
    pub h_true: DenseMatrix,
    pub z_clean: DenseMatrix,
    pub z_noisy: DenseMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioMeta {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub noise_level: f64,
    pub noise_model: String,
    pub samples: usize,
    pub mixtures: usize,
    pub sources: usize,
    pub pattern: String,
    pub mixing_distribution: String,
    pub signals: Vec<SignalShape>,
}

impl ScenarioData {
    pub fn meta(&self) -> ScenarioMeta {
        ScenarioMeta {
            scenario: self.scenario,
            seed: self.seed,
            noise_level: self.noise_level,
            noise_model: NOISE_MODEL.to_string(),
            samples: self.h_true.cols(),
            mixtures: self.w_true.rows(),
            sources: self.h_true.rows(),
            pattern: self.pattern.to_string(),
            mixing_distribution: self.mixing_distribution().to_string(),
            signals: self.shapes.clone(),
        }
    }

    fn mixing_distribution(&self) -> &'static str {
        if self.w_true.is_nonnegative() {
            "uniform(0,1)"
        } else {
            "uniform(-1,1)"
        }
    }

    /// Frobenius norm of the injected noise.
    pub fn noise_norm(&self) -> f64 {
        frobenius_norm(&self.z_noisy.sub(&self.z_clean).expect("same shape"))
    }

    /// Writes `Z_noisy.csv`, `Z_clean.csv`, `W_true.csv`, `H_true.csv` and `meta.json`.
    pub fn write_bundle(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        write_matrix(dir.join("Z_noisy.csv"), &self.z_noisy)?;
        write_matrix(dir.join("Z_clean.csv"), &self.z_clean)?;
        write_matrix(dir.join("W_true.csv"), &self.w_true)?;
        write_matrix(dir.join("H_true.csv"), &self.h_true)?;
        let meta = serde_json::to_string_pretty(&self.meta()).expect("meta serializes");
        fs::write(dir.join("meta.json"), meta + "\n")?;
        Ok(())
    }
}

fn draw_shapes(kind: ScenarioKind, rng: &mut ChaCha8Rng) -> Vec<SignalShape> {
    let saturating = SignalShape::Saturating {
        tau: rng.gen_range(5.0..15.0),
    };
    let ramp = SignalShape::Ramp {
        t_max: SCENARIO_SAMPLES as f64,
    };
    let sigmoid = SignalShape::Sigmoid {
        center: rng.gen_range(18.0..32.0),
        width: rng.gen_range(2.5..6.0),
    };
    let decay = SignalShape::Decay {
        tau: rng.gen_range(8.0..20.0),
    };
    match kind {
        ScenarioKind::S2 => vec![saturating, ramp, decay],
        _ => vec![saturating, ramp, sigmoid],
    }
}

fn shapes_to_matrix(shapes: &[SignalShape], m: usize) -> DenseMatrix {
    let rows: Vec<Vec<f64>> = shapes.iter().map(|s| s.sample(m)).collect();
    DenseMatrix::from_rows(&rows).expect("non-empty rows")
}

fn pattern_of(shapes: &[SignalShape]) -> MonotonicityPattern {
    MonotonicityPattern::new(shapes.iter().map(SignalShape::direction).collect())
        .expect("non-empty")
}

/// Noise stream seed, decoupled from the stream that draws the ground truth.
fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub fn gen_scenario(kind: ScenarioKind, seed: u64) -> Result<ScenarioData> {
    gen_scenario_with_noise(kind, seed, DEFAULT_NOISE_LEVEL)
}

pub fn gen_scenario_with_noise(
    kind: ScenarioKind,
    seed: u64,
    noise_level: f64,
) -> Result<ScenarioData> {
    if kind == ScenarioKind::Custom {
        return Err(Error::InvalidArgument(
            "custom scenarios are built with gen_mixed_sign_instance".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = draw_shapes(kind, &mut rng);
    let h_true = shapes_to_matrix(&shapes, SCENARIO_SAMPLES);
    let w_true =
        DenseMatrix::random_uniform(SCENARIO_MIXTURES, SCENARIO_SOURCES, 0.0, 1.0, &mut rng);
    let z_clean = w_true.matmul(&h_true)?;
    let z_noisy = add_noise(&z_clean, noise_level, noise_seed(seed), false)?;
    Ok(ScenarioData {
        scenario: kind,
        seed,
        noise_level,
        pattern: pattern_of(&shapes),
        shapes,
        w_true,
        h_true,
        z_clean,
        z_noisy,
    })
}

/// Noise-free mixed-sign instance: `W` uniform(−1, 1), one increasing and
/// one decreasing source.
///
/// The increasing source is zero until its onset and the decreasing one is
/// zero from its cutoff on, so each row moves while the other is flat. With
/// those zero ends the only transforms `T` keeping `T·H` nonnegative and
/// monotone are positive diagonal ones, which makes the sources recoverable
/// even though `W` is unconstrained.
pub fn gen_mixed_sign_instance(seed: u64, n: usize, m: usize) -> Result<ScenarioData> {
    if m < 10 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "mixed-sign instance needs n >= 2 and m >= 10, got {n}x{m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mf = m as f64;
    let shapes = vec![
        SignalShape::DelayedRise {
            onset: rng.gen_range(0.3..0.5) * mf,
            t_end: mf,
            power: rng.gen_range(1.0..2.0),
        },
        SignalShape::EarlyFall {
            cutoff: rng.gen_range(0.5..0.7) * mf,
            power: rng.gen_range(1.0..2.0),
        },
    ];
    let h_true = shapes_to_matrix(&shapes, m);
    let w_true = DenseMatrix::random_uniform(n, 2, -1.0, 1.0, &mut rng);
    let z_clean = w_true.matmul(&h_true)?;
    Ok(ScenarioData {
        scenario: ScenarioKind::Custom,
        seed,
        noise_level: 0.0,
        pattern: pattern_of(&shapes),
        shapes,
        w_true,
        h_true,
        z_noisy: z_clean.clone(),
        z_clean,
    })
}

/// `Z + level · (max Z − min Z) · U` with `U` i.i.d. uniform(−1, 1);
/// negatives are clamped to zero when `clamp_nonnegative` is set.
pub fn add_noise(
    z: &DenseMatrix,
    level: f64,
    seed: u64,
    clamp_nonnegative: bool,
) -> Result<DenseMatrix> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be a finite nonnegative fraction, got {level}"
        )));
    }
    let mut out = z.clone();
    if level > 0.0 {
        let amplitude = level * (z.max() - z.min());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in out.as_mut_slice() {
            *v += amplitude * rng.gen_range(-1.0..1.0);
        }
    }
    if clamp_nonnegative {
        out = clamp_nonnegative_entries(&out);
    }
    Ok(out)
}

pub fn clamp_nonnegative_entries(z: &DenseMatrix) -> DenseMatrix {
    z.map(|v| if v < 0.0 { 0.0 } else { v })
}

/// `‖Z − WH‖` (Frobenius).
pub fn reconstruction_error(z: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    let wh = w.matmul(h)?;
    Ok(frobenius_norm(&z.sub(&wh)?))
}

/// Best matching of estimated rows to true rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// `permutation[i]` is the estimated row paired with true row `i`.
    pub permutation: Vec<usize>,
    /// Nonnegative least-squares scale applied to each paired estimated row.
    pub scales: Vec<f64>,
    /// `‖scale·h_est − h_true‖ / ‖h_true‖` per true row.
    pub errors: Vec<f64>,
    /// Sum of squared absolute errors of the chosen pairing.
    pub total_squared_error: f64,
}

impl Alignment {
    /// Estimated signals reordered and rescaled onto the true rows.
    pub fn apply(&self, h_est: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(h_est.rows(), h_est.cols(), |i, j| {
            self.scales[i] * h_est[(self.permutation[i], j)]
        })
    }
}

fn pair_fit(est: &[f64], truth: &[f64]) -> (f64, f64) {
    let ee = dot(est, est);
    let scale = if ee > 0.0 {
        (dot(est, truth) / ee).max(0.0)
    } else {
        0.0
    };
    let sq: f64 = est
        .iter()
        .zip(truth)
        .map(|(e, t)| (scale * e - t).powi(2))
        .sum();
    (scale, sq)
}

/// Exhaustive search over all row pairings (`s ≤ 6`).
pub fn align_signals(h_est: &DenseMatrix, h_true: &DenseMatrix) -> Result<Alignment> {
    if h_est.shape() != h_true.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimated H is {}x{}, true H is {}x{}",
            h_est.rows(),
            h_est.cols(),
            h_true.rows(),
            h_true.cols()
        )));
    }
    let s = h_true.rows();
    if s > MAX_ALIGN_SOURCES {
        return Err(Error::InvalidArgument(format!(
            "alignment enumerates s! pairings; refusing s = {s} > {MAX_ALIGN_SOURCES}"
        )));
    }
    // cost[i][k]: true row i against estimated row k.
    let cost: Vec<Vec<(f64, f64)>> = (0..s)
        .map(|i| {
            (0..s)
                .map(|k| pair_fit(h_est.row(k), h_true.row(i)))
                .collect()
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..s).collect();
    loop {
        let total: f64 = perm.iter().enumerate().map(|(i, &k)| cost[i][k].1).sum();
        if best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((total, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (total, permutation) = best.expect("at least one permutation");
    let scales = permutation
        .iter()
        .enumerate()
        .map(|(i, &k)| cost[i][k].0)
        .collect();
    let errors = permutation
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let abs = cost[i][k].1.sqrt();
            let norm = norm2(h_true.row(i));
            if norm > 0.0 {
                abs / norm
            } else {
                abs
            }
        })
        .collect();
    Ok(Alignment {
        permutation,
        scales,
        errors,
        total_squared_error: total,
    })
}

/// Lexicographic successor; false once `v` is the last permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Methods that can be fitted and compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mnmf")]
    Mnmf,
    #[serde(rename = "msemi")]
    Msemi,
    #[serde(rename = "nnmf-mult")]
    NnmfMult,
    #[serde(rename = "nmf-als")]
    NmfAls,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Mnmf,
        Method::Msemi,
        Method::NnmfMult,
        Method::NmfAls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mnmf => "mnmf",
            Method::Msemi => "msemi",
            Method::NnmfMult => "nnmf-mult",
            Method::NmfAls => "nmf-als",
        }
    }

    /// Whether the method imposes the monotonicity pattern.
    pub fn is_monotone(self) -> bool {
        matches!(self, Method::Mnmf | Method::Msemi)
    }

    /// Whether the method needs (or, for `mnmf`, expects) nonnegative data.
    pub fn expects_nonnegative_data(self) -> bool {
        !matches!(self, Method::Msemi)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method {s:?} (expected one of mnmf, msemi, nnmf-mult, nmf-als)"
                ))
            })
    }
}

/// Runs `method` with rank `s`; the pattern is required for monotone methods.
pub fn run_method(
    method: Method,
    z: &DenseMatrix,
    s: usize,
    pattern: Option<&MonotonicityPattern>,
    options: &FitOptions,
) -> Result<FactorResult> {
    let need_pattern = || {
        pattern.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "method {} requires a monotonicity pattern",
                method.name()
            ))
        })
    };
    match method {
        Method::Mnmf => crate::monmf::fit_monotonous_nmf(z, s, need_pattern()?, options),
        Method::Msemi => crate::semi::fit_monotonous_semi_nmf(z, s, need_pattern()?, options),
        Method::NnmfMult => crate::baselines::fit_nmf_multiplicative(z, s, options),
        Method::NmfAls => crate::baselines::fit_nmf_als(z, s, options),
    }
}

/// Known ground truth for a synthetic run.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a> {
    pub z_clean: &'a DenseMatrix,
    pub h_true: &'a DenseMatrix,
}

impl ScenarioData {
    pub fn truth(&self) -> GroundTruth<'_> {
        GroundTruth {
            z_clean: &self.z_clean,
            h_true: &self.h_true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub method: String,
    /// `‖Z − WH‖` against the noise-free data when known, else against the fitted data.
    pub reconstruction_error: f64,
    /// `‖Z − WH‖` against the data the method was fitted to.
    pub fit_error: f64,
    pub h_effective_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_source_signal_error: Option<Vec<f64>>,
    /// `None` when no pattern was supplied to check against.
    pub monotonicity_feasible: Option<bool>,
    pub outer_iterations: usize,
    pub termination: Termination,
    pub wall_time_s: Option<f64>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    /// Mean of the aligned per-source errors, when ground truth was available.
    pub fn mean_signal_error(&self) -> Option<f64> {
        self.per_source_signal_error
            .as_ref()
            .map(|e| e.iter().sum::<f64>() / e.len() as f64)
    }
}

pub fn evaluate(
    method: &str,
    z: &DenseMatrix,
    result: &FactorResult,
    pattern: Option<&MonotonicityPattern>,
    truth: Option<GroundTruth<'_>>,
    wall_time: Option<Duration>,
) -> Result<EvalReport> {
    let fit_error = reconstruction_error(z, &result.w, &result.h)?;
    let (reconstruction_error, per_source_signal_error) = match truth {
        Some(t) => (
            reconstruction_error(t.z_clean, &result.w, &result.h)?,
            Some(align_signals(&result.h, t.h_true)?.errors),
        ),
        None => (fit_error, None),
    };
    Ok(EvalReport {
        method: method.to_string(),
        reconstruction_error,
        fit_error,
        h_effective_rank: effective_rank(&result.h, default_rank_tol(&result.h)),
        per_source_signal_error,
        monotonicity_feasible: pattern.map(|p| p.is_satisfied_by(&result.h)),
        outer_iterations: result.outer_iterations,
        termination: result.termination,
        wall_time_s: wall_time.map(|d| d.as_secs_f64()),
        warnings: result.warnings.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodFailure {
    pub method: String,
    pub error: String,
}

/// Side-by-side evaluation of several methods on one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub scenario: ScenarioMeta,
    pub config: FitOptions,
    /// Methods needing nonnegative data see the noisy data with negatives clamped to zero.
    pub nonnegative_methods_clamp_input: bool,
    pub reports: Vec<EvalReport>,
    pub failures: Vec<MethodFailure>,
    pub partial: bool,
    #[serde(skip)]
    pub aligned_signals: Vec<(String, DenseMatrix)>,
    #[serde(skip)]
    h_true: DenseMatrix,
}

impl Comparison {
    pub fn report(&self, method: Method) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.method == method.name())
    }

    /// `method,source,sample,true_value,estimated_value` rows with estimates
    /// reordered and rescaled onto the true sources. Sources and samples are 1-based.
    pub fn signals_csv(&self) -> String {
        let mut out = String::from("method,source,sample,true_value,estimated_value\n");
        for (name, h) in &self.aligned_signals {
            for i in 0..h.rows() {
                for j in 0..h.cols() {
                    out.push_str(&format!(
                        "{name},{},{},{},{}\n",
                        i + 1,
                        j + 1,
                        self.h_true[(i, j)],
                        h[(i, j)]
                    ));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes") + "\n"
    }
}

/// Fits every method on `data` with the same options and evaluates it
/// against the ground truth. A failing method is recorded, not fatal.
pub fn run_comparison(
    data: &ScenarioData,
    methods: &[Method],
    options: &FitOptions,
    record_timing: bool,
) -> Comparison {
    let s = data.h_true.rows();
    let clamped = clamp_nonnegative_entries(&data.z_noisy);
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut aligned_signals = Vec::new();
    for &method in methods {
        let z = if method.expects_nonnegative_data() {
            &clamped
        } else {
            &data.z_noisy
        };
        let start = Instant::now();
        let outcome = run_method(method, z, s, Some(&data.pattern), options).and_then(|fit| {
            let elapsed = record_timing.then(|| start.elapsed());
            let report = evaluate(
                method.name(),
                z,
                &fit,
                Some(&data.pattern),
                Some(data.truth()),
                elapsed,
            )?;
            let alignment = align_signals(&fit.h, &data.h_true)?;
            Ok((report, alignment.apply(&fit.h)))
        });
        match outcome {
            Ok((report, aligned)) => {
                log::info!(
                    "{}: reconstruction error {:.4}, {} iterations",
                    method.name(),
                    report.reconstruction_error,
                    report.outer_iterations
                );
                reports.push(report);
                aligned_signals.push((method.name().to_string(), aligned));
            }
            Err(e) => {
                log::error!("{} failed: {e}", method.name());
                failures.push(MethodFailure {
                    method: method.name().to_string(),
                    error: e.to_string(),
                });
            }
        }
    }
    Comparison {
        schema_version: 1,
        scenario: data.meta(),
        config: options.clone(),
        nonnegative_methods_clamp_input: true,
        partial: !failures.is_empty(),
        reports,
        failures,
        aligned_signals,
        h_true: data.h_true.clone(),
    }
}
