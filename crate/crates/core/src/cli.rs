//! `monmf` command line: `synth`, `fit` and `compare`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 data or
//! precondition error, 4 numerical failure (only with `--strict`).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::experiments::{
    evaluate, gen_scenario_with_noise, run_comparison, run_method, EvalReport, Method,
    ScenarioKind, DEFAULT_NOISE_LEVEL,
};
use crate::io::{read_matrix, write_matrix};
use crate::monmf::{FactorResult, FitOptions, HBackend, MonotonicityPattern, Termination};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "monmf",
    version,
    about = "Monotone nonnegative and semi-nonnegative matrix factorization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scenario bundle.
    Synth(SynthArgs),
    /// Factorize a matrix file with one method.
    Fit(FitArgs),
    /// Run several methods on a generated scenario and compare them.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    S1,
    S2,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::S1 => ScenarioKind::S1,
            ScenarioArg::S2 => ScenarioKind::S2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Mnmf,
    Msemi,
    NnmfMult,
    NmfAls,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mnmf => Method::Mnmf,
            MethodArg::Msemi => Method::Msemi,
            MethodArg::NnmfMult => Method::NnmfMult,
            MethodArg::NmfAls => Method::NmfAls,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    PavaPgd,
    GenericQp,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise amplitude as a fraction of the data range.
    #[arg(long, default_value_t = DEFAULT_NOISE_LEVEL)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    inner_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_inner_iter: usize,
    #[arg(long, value_enum, default_value = "pava-pgd")]
    h_backend: BackendArg,
    /// Skip the per-iteration row normalization of H.
    #[arg(long)]
    no_normalize: bool,
    /// Exit with code 4 when a fit stops on an iteration limit.
    #[arg(long)]
    strict: bool,
    /// Record wall-clock times in the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

impl SolverArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            max_outer_iter: self.max_iter,
            tol: self.tol,
            inner_tol: self.inner_tol,
            max_inner_iter: self.max_inner_iter,
            h_backend: match self.h_backend {
                BackendArg::PavaPgd => HBackend::PavaPgd,
                BackendArg::GenericQp => HBackend::GenericQp,
            },
            normalize: !self.no_normalize,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Matrix file to factorize.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    rank: usize,
    /// Comma-separated directions, one per source (e.g. `inc,inc,dec`).
    #[arg(long)]
    pattern: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "mnmf,nnmf-mult,nmf-als"
    )]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = DEFAULT_NOISE_LEVEL)]
    noise: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn context(self, what: impl fmt::Display) -> Self {
        Self {
            code: self.code,
            message: format!("{what}: {}", self.message),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            Error::InvalidArgument(_) => EXIT_USAGE,
            Error::DataLength { .. }
            | Error::EmptyMatrix
            | Error::NonFinite { .. }
            | Error::DimensionMismatch(_)
            | Error::NegativeInput { .. }
            | Error::Parse { .. } => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    init_logging();
    run(std::env::args_os())
}

fn init_logging() {
    let env = env_logger::Env::new()
        .filter_or("MONMF_LOG", "warn")
        .write_style("MONMF_LOG_STYLE");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            if !matches!(
                e.kind(),
                ErrorKind::MissingRequiredArgument | ErrorKind::MissingSubcommand
            ) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return EXIT_USAGE;
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<i32, Failure> {
    let data = gen_scenario_with_noise(args.scenario.into(), args.seed, args.noise)?;
    data.write_bundle(&args.out)
        .map_err(|e| Failure::from(e).context(args.out.display()))?;
    log::info!(
        "wrote {} bundle to {}",
        data.scenario.name(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct FitConfig<'a> {
    method: &'static str,
    input: String,
    rank: usize,
    pattern: Option<String>,
    #[serde(flatten)]
    options: &'a FitOptions,
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    schema_version: u32,
    seed: u64,
    scenario: Option<String>,
    #[serde(flatten)]
    eval: &'a EvalReport,
    config: FitConfig<'a>,
}

/// Scenario label from a `meta.json` next to the input, if there is one.
fn sibling_scenario(input: &Path) -> Option<String> {
    let meta = input.parent()?.join("meta.json");
    let text = fs::read_to_string(meta).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    value.get("scenario")?.as_str().map(str::to_string)
}

fn trace_csv(fit: &FactorResult) -> String {
    let mut out = String::from("iter,objective,w_change,h_change\n");
    for r in &fit.trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.iter, r.objective, r.w_change, r.h_change
        ));
    }
    out
}

fn parse_pattern(text: &str, rank: usize) -> Result<MonotonicityPattern, Failure> {
    let pattern: MonotonicityPattern = text.parse().map_err(Failure::from)?;
    if pattern.len() != rank {
        return Err(Failure::usage(format!(
            "pattern has {} entries but rank is {rank}",
            pattern.len()
        )));
    }
    Ok(pattern)
}

fn cmd_fit(args: &FitArgs) -> Result<i32, Failure> {
    let method: Method = args.method.into();
    let pattern = match (&args.pattern, method.is_monotone()) {
        (Some(p), _) => Some(parse_pattern(p, args.rank)?),
        (None, true) => {
            return Err(Failure::usage(format!(
                "--pattern is required for method {}",
                method.name()
            )))
        }
        (None, false) => None,
    };
    let options = args.solver.options();
    let z = read_matrix(&args.input).map_err(|e| Failure::from(e).context(args.input.display()))?;

    let start = Instant::now();
    let fit = run_method(method, &z, args.rank, pattern.as_ref(), &options)?;
    let elapsed = args.solver.timing.then(|| start.elapsed());
    let eval = evaluate(method.name(), &z, &fit, pattern.as_ref(), None, elapsed)?;

    let out = &args.out;
    fs::create_dir_all(out)?;
    write_matrix(out.join("W.csv"), &fit.w)?;
    write_matrix(out.join("H.csv"), &fit.h)?;
    fs::write(out.join("trace.csv"), trace_csv(&fit))?;
    let report = FitReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: options.seed,
        scenario: sibling_scenario(&args.input),
        eval: &eval,
        config: FitConfig {
            method: method.name(),
            input: args.input.display().to_string(),
            rank: args.rank,
            pattern: pattern.as_ref().map(ToString::to_string),
            options: &options,
        },
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(out.join("report.json"), json + "\n")?;

    if args.solver.strict && (fit.termination != Termination::Converged || fit.inner_failures > 0) {
        eprintln!(
            "error: {} did not converge ({:?}, {} inner failures)",
            method.name(),
            fit.termination,
            fit.inner_failures
        );
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn cmd_compare(args: &CompareArgs) -> Result<i32, Failure> {
    if args.methods.is_empty() {
        return Err(Failure::usage("--methods must name at least one method"));
    }
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    let options = args.solver.options();
    let data = gen_scenario_with_noise(args.scenario.into(), options.seed, args.noise)?;
    let cmp = run_comparison(&data, &methods, &options, args.solver.timing);

    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("comparison.json"), cmp.to_json())?;
    fs::write(args.out.join("signals.csv"), cmp.signals_csv())?;

    for f in &cmp.failures {
        eprintln!("error: {}: {}", f.method, f.error);
    }
    if cmp.reports.is_empty() {
        return Ok(EXIT_DATA);
    }
    let unconverged = cmp
        .reports
        .iter()
        .any(|r| r.termination != Termination::Converged);
    if args.solver.strict && (cmp.partial || unconverged) {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}
