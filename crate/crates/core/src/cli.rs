//! Command-line front end.
//!
//! Exit codes: 0 success, 1 contract or verification failure, 2 usage or
//! parse error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::attacks::{
    identity_attack, optimal_attack, probabilistic_attack, projective_attack, AttackSpec,
    GeneralizedMeasurement, COMPLETENESS_TOL,
};
use crate::ensembles::pairing_ensemble;
use crate::error::Error;
use crate::linalg::{ComplexMatrix, DEFAULT_TOL};
use crate::metrics::{
    estimation_fidelity, estimation_fidelity_functional, induced_fidelity,
    induced_fidelity_functional,
};
use crate::protocol::{run_protocol, SimConfig};
use crate::tradeoff::{
    disturbance_bound, evaluate_point, g_grid, optimize_attack, saturation_gap,
    substream_seed, OptimizeConfig, TradeoffPoint, VIOLATION_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest `n` for commands that evaluate the exact functionals.
pub const MAX_EXACT_N: usize = 64;

/// Largest `n` for which `verify` cross-checks the functionals against the
/// definitional sums and diagonalizes Choi matrices.
pub const MAX_CROSSCHECK_N: usize = 16;

/// Slack of the optimizer contract above the analytic bound.
pub const OPTIMIZER_SLACK: f64 = 5e-4;

const SATURATION_TOL: f64 = 1e-9;
const ESTIMATION_RESIDUAL_TOL: f64 = 1e-12;
const FIDELITY_RESIDUAL_TOL: f64 = 1e-10;
const SATURATION_GRID: usize = 21;
const PROBABILISTIC_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Parser)]
#[command(
    name = "qdecoy",
    version,
    about = "Information gain versus disturbance for quantum decoys"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the minimal disturbance curve D(G) on a uniform grid over [1/n, 1].
    Curve(CurveArgs),
    /// Check the bound on random and named attacks.
    Verify(VerifyArgs),
    /// Monte Carlo run of the decoy protocol against one attack.
    Simulate(SimulateArgs),
    /// Search numerically for the least disturbing attack at fixed G.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    /// Random attacks to sweep; 0 checks the named families only.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Outcomes per random attack (default n²).
    #[arg(long)]
    pub outcomes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Adds an incomplete measurement to exercise the failure path.
    #[arg(long, hide = true)]
    pub inject_corrupt: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Attack descriptor, e.g. `optimal(n=4,g=0.5)`, or a bare family name
    /// (`optimal`, `projective`, `identity`, `prob`, `random`) completed from
    /// --n, --g, --p and --seed.
    #[arg(long)]
    pub attack: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: usize,
    #[arg(long, default_value_t = 0.5)]
    pub decoy_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample Bob's tamper test rather than scoring its exact probability.
    #[arg(long)]
    pub sample_bob: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub g: f64,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

/// Failure that maps onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfDomain { .. }
            | Error::BadDimension(_)
            | Error::Parse { .. }
            | Error::IndexOutOfRange { .. }
            | Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Curve(a) => cmd_curve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Optimize(a) => cmd_optimize(a),
    };
    let (code, outcome) = match result {
        Ok(o) => (o.code, o),
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(CliError::Failed(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_FAILURE;
        }
    };
    let output = match &cli.command {
        Command::Curve(a) => &a.output,
        Command::Verify(a) => &a.output,
        Command::Simulate(a) => &a.output,
        Command::Optimize(a) => &a.output,
    };
    if let Err(e) = emit(&outcome.body, output.out.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_FAILURE;
    }
    if let Some(msg) = outcome.diagnostic {
        let _ = writeln!(stderr, "{msg}");
    }
    code
}

struct Outcome {
    code: i32,
    body: String,
    diagnostic: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            code: EXIT_OK,
            body,
            diagnostic: None,
        }
    }
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
fn emit(body: &str, path: Option<&Path>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match path {
        None => stdout.write_all(body.as_bytes()),
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

fn check_exact_n(n: usize) -> CliResult<()> {
    if !(2..=MAX_EXACT_N).contains(&n) {
        return Err(CliError::Usage(format!(
            "--n must lie in [2, {MAX_EXACT_N}], got {n}"
        )));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Plain decimal with at least 12 significant digits.
pub fn fmt_decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.15}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).clamp(15, 40) as usize;
    format!("{x:.decimals$}")
}

fn opt_decimal(x: Option<f64>) -> String {
    x.map(fmt_decimal).unwrap_or_default()
}

#[derive(Serialize)]
struct CurveRow {
    g: f64,
    d_bound: f64,
}

#[derive(Serialize)]
struct CurveReport {
    n: usize,
    points: Vec<CurveRow>,
}

pub fn curve_rows(n: usize, points: usize) -> crate::Result<Vec<(f64, f64)>> {
    g_grid(n, points)
        .into_iter()
        .map(|g| Ok((g, disturbance_bound(g, n)?)))
        .collect()
}

fn cmd_curve(a: &CurveArgs) -> CliResult<Outcome> {
    check_exact_n(a.n)?;
    if a.points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {}", a.points)));
    }
    let rows = curve_rows(a.n, a.points)?;
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("g,d_bound\n");
            for (g, d) in &rows {
                let _ = writeln!(s, "{},{}", fmt_decimal(*g), fmt_decimal(*d));
            }
            s
        }
        Format::Json => to_json(&CurveReport {
            n: a.n,
            points: rows
                .into_iter()
                .map(|(g, d_bound)| CurveRow { g, d_bound })
                .collect(),
        }),
    };
    Ok(Outcome::ok(body))
}

/// A check that did not hold.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyFailure {
    pub source: String,
    pub check: String,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub trials: usize,
    pub outcomes: usize,
    pub seed: u64,
    pub attacks_checked: usize,
    /// Smallest `D - bound(G)` over every evaluated attack.
    pub min_margin: Option<f64>,
    pub worst_point: Option<TradeoffPoint>,
    pub max_saturation_gap: f64,
    pub max_completeness_residual: f64,
    /// `None` when `n` exceeds the cross-check limit.
    pub max_estimation_residual: Option<f64>,
    pub max_fidelity_residual: Option<f64>,
    pub failures: Vec<VerifyFailure>,
    pub pass: bool,
}

struct Verifier {
    n: usize,
    crosscheck: bool,
    points: Vec<TradeoffPoint>,
    failures: Vec<VerifyFailure>,
    max_saturation_gap: f64,
    max_completeness_residual: f64,
    max_estimation_residual: f64,
    max_fidelity_residual: f64,
    attacks_checked: usize,
}

impl Verifier {
    fn new(n: usize) -> Self {
        Self {
            n,
            crosscheck: n <= MAX_CROSSCHECK_N,
            points: Vec::new(),
            failures: Vec::new(),
            max_saturation_gap: 0.0,
            max_completeness_residual: 0.0,
            max_estimation_residual: 0.0,
            max_fidelity_residual: 0.0,
            attacks_checked: 0,
        }
    }

    fn fail(&mut self, source: &str, check: &str, value: f64, limit: f64) {
        self.failures.push(VerifyFailure {
            source: source.to_string(),
            check: check.to_string(),
            value,
            limit,
        });
    }

    fn check(&mut self, m: &GeneralizedMeasurement) {
        self.attacks_checked += 1;
        let source = m.descriptor().to_string();

        let residual = m.completeness_residual();
        self.max_completeness_residual = self.max_completeness_residual.max(residual);
        if residual > COMPLETENESS_TOL {
            self.fail(&source, "completeness", residual, COMPLETENESS_TOL);
        }

        if self.crosscheck {
            match m.choi() {
                Ok(choi) => {
                    if !choi.is_cp(DEFAULT_TOL) {
                        self.fail(&source, "choi_cp", f64::NAN, DEFAULT_TOL);
                    }
                    let tp = choi.tp_residual();
                    if tp > DEFAULT_TOL {
                        self.fail(&source, "choi_tp", tp, DEFAULT_TOL);
                    }
                }
                Err(e) => self.fail(&format!("{source}: {e}"), "choi", f64::NAN, 0.0),
            }
            let (g_def, _) = estimation_fidelity(m);
            let g_res = (g_def - estimation_fidelity_functional(m)).abs();
            self.max_estimation_residual = self.max_estimation_residual.max(g_res);
            if g_res > ESTIMATION_RESIDUAL_TOL {
                self.fail(&source, "estimation_functional", g_res, ESTIMATION_RESIDUAL_TOL);
            }
            let pairing = pairing_ensemble(self.n).expect("n checked");
            match induced_fidelity(m, &pairing) {
                Ok(f_def) => {
                    let f_res = (f_def - induced_fidelity_functional(m)).abs();
                    self.max_fidelity_residual = self.max_fidelity_residual.max(f_res);
                    if f_res > FIDELITY_RESIDUAL_TOL {
                        self.fail(&source, "fidelity_functional", f_res, FIDELITY_RESIDUAL_TOL);
                    }
                }
                Err(e) => self.fail(&format!("{source}: {e}"), "fidelity", f64::NAN, 0.0),
            }
        }

        match evaluate_point(m) {
            Ok(p) => {
                if p.is_violation() {
                    self.fail(&source, "margin", p.margin, -VIOLATION_TOL);
                }
                self.points.push(p);
            }
            Err(e) => self.fail(&format!("{source}: {e}"), "margin", f64::NAN, -VIOLATION_TOL),
        }
    }

    fn saturation(&mut self, g: f64) {
        match saturation_gap(self.n, g) {
            Ok(gap) => {
                self.max_saturation_gap = self.max_saturation_gap.max(gap);
                if gap > SATURATION_TOL {
                    self.fail(&format!("optimal(n={},g={g})", self.n), "saturation", gap, SATURATION_TOL);
                }
            }
            Err(e) => self.fail(&format!("optimal(n={},g={g}): {e}", self.n), "saturation", f64::NAN, SATURATION_TOL),
        }
    }
}

/// Runs the full verification harness; `extra` attacks are checked after the
/// named families and the random sweep.
pub fn verify(
    n: usize,
    trials: usize,
    outcomes: usize,
    seed: u64,
    extra: &[GeneralizedMeasurement],
) -> crate::Result<VerifyReport> {
    let mut v = Verifier::new(n);
    for g in g_grid(n, SATURATION_GRID) {
        v.check(&optimal_attack(n, g)?);
        v.saturation(g);
    }
    v.check(&projective_attack(n)?);
    v.check(&identity_attack(n)?);
    for p in PROBABILISTIC_GRID {
        v.check(&probabilistic_attack(n, p)?);
    }
    // same per-trial seeds as `sweep_random`
    for t in 0..trials {
        let m = crate::attacks::random_attack(n, outcomes, substream_seed(seed, t as u64))?;
        v.check(&m);
    }
    for m in extra {
        v.check(m);
    }

    let worst = v
        .points
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .cloned();
    Ok(VerifyReport {
        n,
        trials,
        outcomes,
        seed,
        attacks_checked: v.attacks_checked,
        min_margin: worst.as_ref().map(|p| p.margin),
        worst_point: worst,
        max_saturation_gap: v.max_saturation_gap,
        max_completeness_residual: v.max_completeness_residual,
        max_estimation_residual: v.crosscheck.then_some(v.max_estimation_residual),
        max_fidelity_residual: v.crosscheck.then_some(v.max_fidelity_residual),
        pass: v.failures.is_empty(),
        failures: v.failures,
    })
}

/// An incomplete measurement (`Σ Â†Â = Id/2`) that every verifier must reject.
pub fn corrupt_attack(n: usize) -> GeneralizedMeasurement {
    GeneralizedMeasurement::from_kraus_unchecked(
        vec![ComplexMatrix::identity(n).scale_real(0.5f64.sqrt())],
        format!("corrupt(n={n})"),
    )
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<Outcome> {
    check_exact_n(a.n)?;
    let outcomes = a.outcomes.unwrap_or(a.n * a.n);
    if outcomes == 0 {
        return Err(CliError::Usage("--outcomes must be positive".into()));
    }
    let extra = if a.inject_corrupt {
        vec![corrupt_attack(a.n)]
    } else {
        vec![]
    };
    let report = verify(a.n, a.trials, outcomes, a.seed, &extra)?;
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("check,source,value,limit\n");
            let _ = writeln!(s, "min_margin,all,{},{}", opt_decimal(report.min_margin), fmt_decimal(-VIOLATION_TOL));
            let _ = writeln!(s, "max_saturation_gap,optimal,{},{}", fmt_decimal(report.max_saturation_gap), fmt_decimal(SATURATION_TOL));
            let _ = writeln!(s, "max_estimation_residual,all,{},{}", opt_decimal(report.max_estimation_residual), fmt_decimal(ESTIMATION_RESIDUAL_TOL));
            let _ = writeln!(s, "max_fidelity_residual,all,{},{}", opt_decimal(report.max_fidelity_residual), fmt_decimal(FIDELITY_RESIDUAL_TOL));
            for f in &report.failures {
                let _ = writeln!(s, "FAIL:{},\"{}\",{},{}", f.check, f.source, fmt_decimal(f.value), fmt_decimal(f.limit));
            }
            s
        }
    };
    let diagnostic = (!report.pass).then(|| {
        let mut s = format!("verification failed: {} check(s)", report.failures.len());
        for f in &report.failures {
            let _ = write!(s, "\n  {} [{}]: value {} limit {}", f.source, f.check, f.value, f.limit);
        }
        s
    });
    Ok(Outcome {
        code: if report.pass { EXIT_OK } else { EXIT_FAILURE },
        body,
        diagnostic,
    })
}

/// Parses a full descriptor, or completes a bare family name from flags.
pub fn resolve_attack(a: &SimulateArgs) -> CliResult<AttackSpec> {
    let text = a.attack.trim();
    let spec = if text.contains('(') {
        text.parse::<AttackSpec>()?
    } else {
        let n = a
            .n
            .ok_or_else(|| CliError::Usage(format!("bare attack `{text}` needs --n")))?;
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("attack `{text}` needs --{flag}")))
        };
        match text {
            "optimal" => AttackSpec::Optimal { n, g: need(a.g, "g")? },
            "projective" => AttackSpec::Projective { n },
            "identity" => AttackSpec::Identity { n },
            "prob" => AttackSpec::Probabilistic { n, p: need(a.p, "p")? },
            "random" => AttackSpec::Random {
                n,
                k: n * n,
                seed: a.seed,
            },
            other => {
                return Err(CliError::Usage(
                    Error::Parse {
                        input: other.to_string(),
                        reason: "unknown attack family".into(),
                    }
                    .to_string(),
                ))
            }
        }
    };
    if let Some(n) = a.n {
        if n != spec.dim() {
            return Err(CliError::Usage(format!(
                "--n {n} disagrees with attack `{spec}`"
            )));
        }
    }
    Ok(spec)
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<Outcome> {
    let spec = resolve_attack(a)?;
    let attack = spec.build()?;
    let config = SimConfig {
        shots: a.shots,
        decoy_fraction: a.decoy_fraction,
        seed: a.seed,
        sample_bob: a.sample_bob,
    };
    let report = run_protocol(spec.dim(), &attack, config)?;
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from(
                "n,shots,decoy_fraction,g_hat,g_se,d_hat,d_se,g_analytic,d_analytic,seed,attack\n",
            );
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},\"{}\"",
                report.n,
                report.shots,
                fmt_decimal(report.decoy_fraction),
                opt_decimal(report.g_hat),
                opt_decimal(report.g_se),
                opt_decimal(report.d_hat),
                opt_decimal(report.d_se),
                fmt_decimal(report.g_analytic),
                fmt_decimal(report.d_analytic),
                report.seed,
                report.attack_descriptor
            );
            s
        }
    };
    let diagnostic = (!report.consistent()).then(|| {
        "warning: estimates deviate from analytic values by more than 4 standard errors".to_string()
    });
    Ok(Outcome {
        code: EXIT_OK,
        body,
        diagnostic,
    })
}

#[derive(Serialize)]
struct OptimizeReport {
    #[serde(flatten)]
    point: TradeoffPoint,
    g_target: f64,
    bound_at_target: f64,
    within_contract: bool,
    /// `coefficients[r][j]`, the diagonal of Kraus operator `r`.
    coefficients: Vec<Vec<f64>>,
}

fn cmd_optimize(a: &OptimizeArgs) -> CliResult<Outcome> {
    check_exact_n(a.n)?;
    let config = OptimizeConfig {
        restarts: a.restarts,
        iters: a.iters,
        seed: a.seed,
    };
    let (point, attack) = optimize_attack(a.n, a.g, config)?;
    let bound = disturbance_bound(a.g, a.n)?;
    let within = point.d >= bound - VIOLATION_TOL && point.d <= bound + OPTIMIZER_SLACK;
    let report = OptimizeReport {
        g_target: a.g,
        bound_at_target: bound,
        within_contract: within,
        coefficients: attack
            .kraus()
            .iter()
            .map(|k| k.diagonal().iter().map(|z| z.re).collect())
            .collect(),
        point,
    };
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "n,g,d,bound,margin,source\n{},{},{},{},{},\"{}\"\n",
            report.point.n,
            fmt_decimal(report.point.g),
            fmt_decimal(report.point.d),
            fmt_decimal(report.point.bound),
            fmt_decimal(report.point.margin),
            report.point.source
        ),
    };
    let diagnostic = (!within).then(|| {
        format!(
            "optimizer missed the contract: D = {} but bound = {bound} (+{OPTIMIZER_SLACK})",
            report.point.d
        )
    });
    Ok(Outcome {
        code: if within { EXIT_OK } else { EXIT_FAILURE },
        body,
        diagnostic,
    })
}
