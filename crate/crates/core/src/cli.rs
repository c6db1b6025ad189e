//! Command-line front end. [`run`] takes argv and two sinks so it can be
//! driven from tests without spawning a process.
//!
//! Exit codes: 0 when every check passes or recovery certifies, 1 when a
//! well-formed run finds a failure, 2 for usage and input errors.
//!
//! Input files are JSON objects with `"schema_version": 1` and one payload
//! key: `map` (a [`MapSpec`]), `plan` (a [`SamplePlan`]) or `config` (an
//! [`ExploreConfig`]). The default tolerance `1e-9` can be overridden with
//! the `WIGNER_TOL` environment variable; `--tol` wins over both.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::checker::{
    battery_on, battery_samples, check_derived, pair_report, zero_image, Battery, CheckError,
    ConditionId, ConditionReport,
};
use crate::explore::{explore, ExploreConfig, ExploreReport};
use crate::maps::{tabulate, MapSpec};
use crate::recover::{recover, EdgeRule, GraphOptions, RecoverError, RecoverOptions, RecoveryResult, DEFAULT_DELTA};
use crate::space::{sample, SamplePlan, Scalar, SpaceSpec, Vector};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const TOL_ENV: &str = "WIGNER_TOL";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Global,
    Local,
}

#[derive(Debug, Parser)]
#[command(name = "wigner", version, about = "Checks, recovers and explores solutions of Wigner-type functional equations")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: OutputFormat,
    /// Overrides the seed of sample plans and explore configs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the condition battery on a map.
    Check {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated condition names, e.g. `T2_I,EQ22_3`.
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<ConditionId>,
    },
    /// Recover a linear map and signs from tabulated data.
    Recover {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Tabulates an evaluable map over this plan first.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "global")]
        rule: RuleArg,
    },
    /// The Ratz example on C^2, end to end.
    DemoRatz,
    /// Run an explore config.
    Explore {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Invocation problems, all mapped to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Schema { path: String, source: serde_json::Error },
    #[error("{path}: unsupported schema_version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersion { path: String, found: u32 },
    #[error("{TOL_ENV}={0:?} is not a nonnegative number")]
    BadEnvTol(String),
    #[error("tolerance must be a nonnegative number, got {0}")]
    BadTol(f64),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Recover(#[from] RecoverError),
    #[error(transparent)]
    Explore(#[from] crate::explore::ExploreError),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
}

#[derive(Deserialize)]
struct MapFile {
    schema_version: u32,
    map: MapSpec,
}

#[derive(Deserialize)]
struct PlanFile {
    schema_version: u32,
    plan: SamplePlan,
}

#[derive(Deserialize)]
struct ConfigFile {
    schema_version: u32,
    config: ExploreConfig,
}

trait Versioned {
    fn version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(impl Versioned for $t { fn version(&self) -> u32 { self.schema_version } })*};
}
versioned!(MapFile, PlanFile, ConfigFile);

fn read_json<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, UsageError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| UsageError::Io { path: shown.clone(), source })?;
    let v: T = serde_json::from_str(&text).map_err(|source| UsageError::Schema { path: shown.clone(), source })?;
    if v.version() != SCHEMA_VERSION {
        return Err(UsageError::SchemaVersion { path: shown, found: v.version() });
    }
    Ok(v)
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, UsageError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse::<f64>().map_err(|_| UsageError::BadEnvTol(s.clone()))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol >= 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(UsageError::BadTol(tol))
    }
}

fn with_seed(mut plan: SamplePlan, seed: Option<u64>) -> SamplePlan {
    if let Some(s) = seed {
        plan.seed = s;
    }
    plan
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub schema_version: u32,
    pub map: String,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
    pub reports: Vec<ConditionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverOutput {
    pub schema_version: u32,
    pub certified: bool,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RecoveryResult>,
    /// Why recovery stopped early, for maps that are not phase equivalent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatzDemo {
    pub schema_version: u32,
    pub x: Vector,
    pub fx: Vector,
    /// Battery over gaussian samples of `C^2`.
    pub battery: Battery,
    /// `COMPLEX_LINEAR` at the witness point `(0, 1)`.
    pub witness: Vector,
    pub complex_linear: ConditionReport,
    /// Recovery over the realified table.
    pub recovery: RecoveryResult,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreOutput {
    pub schema_version: u32,
    pub controls_pass: bool,
    pub report: ExploreReport,
}

/// Checks named conditions, or the default battery when `ids` is empty.
pub fn check_map(m: &MapSpec, plan: &SamplePlan, ids: &[ConditionId], tol: f64) -> Result<CheckOutput, CheckError> {
    let (xs, fxs): (Vec<Vector>, Vec<Vector>) = match m.pairs() {
        Some(p) => p.iter().cloned().unzip(),
        None => {
            let xs = battery_samples(m, plan)?;
            let fxs = xs.iter().map(|x| m.eval(x)).collect::<Result<Vec<_>, _>>()?;
            (xs, fxs)
        }
    };
    let reports = if ids.is_empty() {
        battery_on(m, &xs, &fxs, tol)?.reports
    } else {
        let norm = m.domain()?.norm_kind();
        let f0 = zero_image(&xs, &fxs);
        let mut out = Vec::new();
        for &id in ids {
            if let ConditionId::Eq22(n) = id {
                if n > 2 && m.domain()?.field() == crate::space::Field::Real {
                    return Err(CheckError::RealFieldUnsupported(n));
                }
            }
            out.push(if id.is_derived() {
                check_derived(id, m, &xs, tol)?
            } else {
                pair_report(id, &xs, &fxs, f0, norm, tol)?
            });
        }
        out
    };
    Ok(CheckOutput {
        schema_version: SCHEMA_VERSION,
        map: m.variant_name().to_string(),
        samples: xs.len(),
        tol,
        pass: reports.iter().all(|r| r.pass),
        reports,
    })
}

/// Recovery with mathematical failures folded into an uncertified output.
pub fn recover_map(m: &MapSpec, opts: &RecoverOptions) -> Result<RecoverOutput, RecoverError> {
    let base = RecoverOutput { schema_version: SCHEMA_VERSION, certified: false, tol: opts.tol, result: None, error: None };
    match recover(m, opts) {
        Ok(r) => Ok(RecoverOutput { certified: r.certified, result: Some(r), ..base }),
        Err(
            e @ (RecoverError::MagnitudeMismatch { .. }
            | RecoverError::InconsistentCycle { .. }
            | RecoverError::NotPhaseEquivalent { .. }),
        ) => Ok(RecoverOutput { error: Some(e.to_string()), ..base }),
        Err(e) => Err(e),
    }
}

/// The Ratz map `(x1, x2) -> (x1, conj x2)` on `C^2`: real linear and norm
/// preserving, but `f(i e2) = -i e2` while `i f(e2) = i e2`.
pub fn ratz_demo(seed: u64, tol: f64) -> Result<RatzDemo, UsageError> {
    let m = MapSpec::RatzConjugation;
    let x = Vector::complex(&[Scalar::new(1.0, 2.0), Scalar::new(3.0, -1.0)]);
    let fx = m.eval(&x)?;
    let xs = battery_samples(&m, &SamplePlan::gaussian(40, seed))?;
    let fxs = xs.iter().map(|v| m.eval(v)).collect::<Result<Vec<_>, _>>()?;
    let battery = battery_on(&m, &xs, &fxs, tol)?;
    let witness = Vector::complex(&[Scalar::new(0.0, 0.0), Scalar::new(1.0, 0.0)]);
    let complex_linear = check_derived(ConditionId::ComplexLinear, &m, std::slice::from_ref(&witness), tol)?;
    let table = tabulate(&m, &sample(&SamplePlan::gaussian(40, seed), &SpaceSpec::complex(2)).map_err(CheckError::from)?)?;
    let recovery = recover(&table, &RecoverOptions { tol, ..Default::default() })?;
    let real_linear = battery
        .reports
        .iter()
        .filter(|r| r.condition != ConditionId::ComplexLinear)
        .all(|r| r.pass);
    let pass = real_linear && (complex_linear.max_residual - 2.0).abs() <= 1e-12 && recovery.certified;
    Ok(RatzDemo { schema_version: SCHEMA_VERSION, x, fx, battery, witness, complex_linear, recovery, pass })
}

fn exit_for(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn report_rows(s: &mut String, reports: &[ConditionReport]) {
    let _ = writeln!(s, "{:<16} {:>12} {:>10}  verdict", "condition", "max_residual", "argmax");
    for r in reports {
        let argmax = format!("({},{})", r.argmax.0, r.argmax.1);
        let _ = writeln!(s, "{:<16} {:>12.3e} {:>10}  {}", r.condition.to_string(), r.max_residual, argmax, verdict(r.pass));
    }
}

fn recovery_rows(s: &mut String, r: &RecoveryResult) {
    let _ = writeln!(s, "components      {}", r.components);
    let _ = writeln!(s, "gram_residual   {:.3e}", r.gram_residual);
    let _ = writeln!(s, "fit_residual    {:.3e}", r.fit_residual);
    let _ = writeln!(s, "G ({}x{}):", r.g.nrows(), r.g.ncols());
    for row in r.g.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>9.5}")).collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
}

fn check_table(o: &CheckOutput) -> String {
    let mut s = format!("map {} on {} samples, tol {:e}\n", o.map, o.samples, o.tol);
    report_rows(&mut s, &o.reports);
    let _ = writeln!(s, "overall: {}", verdict(o.pass));
    s
}

fn recover_table(o: &RecoverOutput) -> String {
    let mut s = String::new();
    if let Some(r) = &o.result {
        recovery_rows(&mut s, r);
    }
    if let Some(e) = &o.error {
        let _ = writeln!(s, "stopped: {e}");
    }
    let _ = writeln!(s, "certified: {}", o.certified);
    s
}

fn demo_table(d: &RatzDemo) -> String {
    let mut s = String::from("f(x1, x2) = (x1, conj x2) on C^2\n");
    let _ = writeln!(s, "f({}) = {}", fmt_complex(&d.x), fmt_complex(&d.fx));
    let _ = writeln!(s, "battery on {} samples:", d.battery.samples);
    report_rows(&mut s, &d.battery.reports);
    let _ = writeln!(
        s,
        "COMPLEX_LINEAR at witness {}: residual {} ({})",
        fmt_complex(&d.witness),
        d.complex_linear.max_residual,
        verdict(d.complex_linear.pass)
    );
    let _ = writeln!(s, "recovery over realified C^2:");
    recovery_rows(&mut s, &d.recovery);
    let _ = writeln!(s, "certified: {}", d.recovery.certified);
    let _ = writeln!(s, "overall: {}", verdict(d.pass));
    s
}

fn fmt_complex(v: &Vector) -> String {
    let parts: Vec<String> = v.entries().iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

fn explore_table(o: &ExploreOutput) -> String {
    let r = &o.report;
    let mut s = format!("{}\n", r.evidence);
    let _ = writeln!(s, "{:<32} {:>12}  {:<13} control", "candidate", "max_residual", "class");
    for c in &r.candidates {
        let class = serde_json::to_value(c.classification).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(s, "{:<32} {:>12.3e}  {:<13} {}", c.label, c.max_residual, class, if c.positive_control { "yes" } else { "" });
    }
    let _ = writeln!(s, "best: {}", r.candidates[r.best].label);
    let verdict_s = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let _ = writeln!(s, "verdict: {verdict_s}");
    let _ = writeln!(s, "controls: {}", verdict(o.controls_pass));
    s
}

fn emit<T: Serialize>(out: &mut dyn Write, format: OutputFormat, value: &T, table: impl Fn(&T) -> String) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(value).expect("reports serialize");
            writeln!(out, "{text}")?;
        }
        OutputFormat::Table => write!(out, "{}", table(value))?,
    }
    out.flush()
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, UsageError> {
    let io = |e: std::io::Error| UsageError::Io { path: "<stdout>".into(), source: e };
    match cli.command {
        Command::Check { map, plan, tol, conditions } => {
            let tol = resolve_tol(tol)?;
            let m = read_json::<MapFile>(&map)?.map;
            let plan = with_seed(read_json::<PlanFile>(&plan)?.plan, cli.seed);
            let o = check_map(&m, &plan, &conditions, tol)?;
            emit(out, cli.output, &o, check_table).map_err(io)?;
            Ok(exit_for(o.pass))
        }
        Command::Recover { map, tol, delta, plan, rule } => {
            let tol = resolve_tol(tol)?;
            let mut m = read_json::<MapFile>(&map)?.map;
            if let Some(p) = plan {
                let plan = with_seed(read_json::<PlanFile>(&p)?.plan, cli.seed);
                if !m.is_tabulated() {
                    let xs = battery_samples(&m, &plan)?;
                    m = tabulate(&m, &xs)?;
                }
            }
            let rule = match rule {
                RuleArg::Global => EdgeRule::Global,
                RuleArg::Local => EdgeRule::Local,
            };
            let opts = RecoverOptions { tol, graph: GraphOptions { delta, rule, ..Default::default() } };
            let o = recover_map(&m, &opts)?;
            emit(out, cli.output, &o, recover_table).map_err(io)?;
            Ok(exit_for(o.certified))
        }
        Command::DemoRatz => {
            let d = ratz_demo(cli.seed.unwrap_or(1), resolve_tol(None)?)?;
            emit(out, cli.output, &d, demo_table).map_err(io)?;
            Ok(exit_for(d.pass))
        }
        Command::Explore { config } => {
            let mut cfg = read_json::<ConfigFile>(&config)?.config;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let report = explore(&cfg)?;
            let controls_pass = report
                .candidates
                .iter()
                .filter(|c| c.positive_control)
                .all(|c| c.classification == crate::explore::Classification::Solution);
            let o = ExploreOutput { schema_version: SCHEMA_VERSION, controls_pass, report };
            emit(out, cli.output, &o, explore_table).map_err(io)?;
            Ok(exit_for(controls_pass))
        }
    }
}

/// Parses `argv` (including the program name) and runs one subcommand.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
