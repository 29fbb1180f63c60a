//! `medcal` command-line front end.
//!
//! Exit status:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 2    | usage error                               |
//! | 3    | quote file could not be parsed            |
//! | 4    | quotes admit arbitrage                    |
//! | 5    | quotes or digitals outside the feasible set |
//! | 6    | numerical failure or non-convergence      |
//! | 7    | file system error                         |
//!
//! Every failure also prints a one-line JSON diagnostic on stderr.

pub mod export;
pub mod input;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bk::BkSolver;
use crate::error::MedError;
use crate::langevin::{
    Bergstrom, ExactInverse, InverseLangevin, InverseMethod, Pade, RoundedPade, TaylorSeries,
    DEFAULT_POLISH_STEPS,
};
use crate::med::{build_density, MarketQuotes};

pub use input::{ParseError, QuoteFile};

/// Environment variable overriding the default export directory.
pub const OUT_DIR_ENV: &str = "MEDCAL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 2,
    Parse = 3,
    Arbitrage = 4,
    Infeasible = 5,
    Numerical = 6,
    Io = 7,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitStatus::Success => "ok",
            ExitStatus::Usage => "usage",
            ExitStatus::Parse => "parse",
            ExitStatus::Arbitrage => "arbitrage",
            ExitStatus::Infeasible => "infeasible",
            ExitStatus::Numerical => "numerical",
            ExitStatus::Io => "io",
        }
    }
}

/// A failed command: exit status plus the diagnostic record.
#[derive(Debug, Clone)]
pub struct Failure {
    pub status: ExitStatus,
    pub message: String,
    pub details: serde_json::Value,
}

impl Failure {
    fn new(status: ExitStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            details: serde_json::Value::Null,
        }
    }

    fn with(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn diagnostic(&self) -> serde_json::Value {
        json!({
            "status": self.status.label(),
            "code": self.status.code(),
            "message": self.message,
            "details": self.details,
        })
    }
}

impl From<MedError> for Failure {
    fn from(e: MedError) -> Self {
        let message = e.to_string();
        match e {
            MedError::Arbitrage(report) => Failure::new(ExitStatus::Arbitrage, message)
                .with(json!({ "violations": report.violations })),
            MedError::InfeasibleDigitals { bucket, mass } => {
                Failure::new(ExitStatus::Infeasible, message)
                    .with(json!({ "bucket": bucket, "mass": mass }))
            }
            MedError::InfeasibleMean {
                bucket,
                mean,
                lower,
                upper,
            } => Failure::new(ExitStatus::Infeasible, message)
                .with(json!({ "bucket": bucket, "mean": mean, "lower": lower, "upper": upper })),
            MedError::EmptyFeasibleSet {
                index,
                lower,
                upper,
            }
            | MedError::NotInFeasibleSet {
                index,
                lower,
                upper,
                ..
            } => Failure::new(ExitStatus::Infeasible, message)
                .with(json!({ "strike_index": index, "lower": lower, "upper": upper })),
            MedError::InvalidArgument(_) | MedError::MissingDigitals => {
                Failure::new(ExitStatus::Usage, message)
            }
            MedError::InvalidGrid(_) => Failure::new(ExitStatus::Parse, message),
            MedError::NonConvergence {
                trace, certificate, ..
            } => Failure::new(ExitStatus::Numerical, message).with(json!({
                "iterates": trace.records.len(),
                "certificate": certificate,
            })),
            _ => Failure::new(ExitStatus::Numerical, message),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(ExitStatus::Io, format!("{}: {e}", path.display()))
        .with(json!({ "path": path.display().to_string() }))
}

#[derive(Debug, Parser)]
#[command(
    name = "medcal",
    version,
    about = "Maximum-entropy density calibration to option quotes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density from forward, calls and digitals.
    Med(MedArgs),
    /// Density from forward and calls alone, by entropy maximisation over
    /// the digitals.
    Bk(BkArgs),
    /// Tabulate the Langevin function or its inverse approximations.
    Langevin(LangevinArgs),
    /// Check quotes for static arbitrage.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Taylor,
    Pade,
    RoundedPade,
    Bergstrom,
    Exact,
    /// Bergström seed refined by Newton steps on the exact equation.
    Polished,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrationArgs {
    /// Quote file (JSON, or CSV with header `strike,call[,digital]`).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "polished")]
    pub inverse_method: MethodName,
    /// Truncation order of the series inverse (1, 3, 5 or 7).
    #[arg(long, default_value_t = 7)]
    pub taylor_order: u32,
    /// Density sample points on [0, 1.5 K_n].
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Export directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "medcal-out")]
    pub out: PathBuf,
}

impl CalibrationArgs {
    pub fn method(&self) -> InverseMethod {
        match self.inverse_method {
            MethodName::Taylor => InverseMethod::Taylor {
                order: self.taylor_order,
            },
            MethodName::Pade => InverseMethod::Pade,
            MethodName::RoundedPade => InverseMethod::RoundedPade,
            MethodName::Bergstrom => InverseMethod::Bergstrom,
            MethodName::Exact => {
                let e = ExactInverse::default();
                InverseMethod::Exact {
                    tol: e.tol,
                    max_iter: e.max_iter,
                }
            }
            MethodName::Polished => InverseMethod::Polished {
                steps: DEFAULT_POLISH_STEPS,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MedArgs {
    #[command(flatten)]
    pub common: CalibrationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BkArgs {
    #[command(flatten)]
    pub common: CalibrationArgs,
    /// Stop once the certified entropy gap is at most this.
    #[arg(long, default_value_t = crate::bk::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = crate::bk::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct LangevinArgs {
    /// Start of the grid (default -8, or -0.999 with --inverse).
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    /// End of the grid (default 8, or 0.999 with --inverse).
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 161)]
    pub points: usize,
    /// Tabulate the inverse approximations against the exact inverse.
    #[arg(long)]
    pub inverse: bool,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub input: PathBuf,
}

/// Parses `args` and runs the command, printing diagnostics on failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitStatus::Success.code(),
        Err(f) => {
            eprintln!("{}", f.diagnostic());
            f.status.code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Med(a) => cmd_med(a),
        Command::Bk(a) => cmd_bk(a),
        Command::Langevin(a) => cmd_langevin(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

pub fn read_quotes(path: &Path) -> Result<MarketQuotes, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    input::parse_quote_text(path, &text)
        .and_then(QuoteFile::into_quotes)
        .map_err(|e| {
            Failure::new(ExitStatus::Parse, format!("{}: {e}", path.display())).with(json!({
                "path": path.display().to_string(),
                "line": e.line,
                "field": e.field,
            }))
        })
}

fn check_samples(samples: usize) -> Result<(), Failure> {
    if samples < 2 {
        return Err(Failure::new(
            ExitStatus::Usage,
            "--samples must be at least 2",
        ));
    }
    Ok(())
}

fn write_export(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    export::write_files(dir, files).map_err(|e| io_failure(dir, e))
}

pub fn cmd_med(a: &MedArgs) -> Result<(), Failure> {
    let c = &a.common;
    check_samples(c.samples)?;
    let method = c.method();
    method.validate()?;
    let q = read_quotes(&c.input)?;
    if q.digitals().is_none() {
        return Err(Failure::new(
            ExitStatus::Usage,
            "quote file has no digitals; use `medcal bk` to calibrate to calls alone",
        ));
    }
    q.validate().into_result()?;
    let d = build_density(&q, &method)?;

    let mut summary = vec![
        ("command", "med".to_string()),
        ("method", method.name().to_string()),
    ];
    summary.extend(export::density_rows(&q, &d));
    write_export(
        &c.out,
        &[
            ("params.csv", export::params_csv(&d)),
            ("density.csv", export::density_csv(&d, c.samples)),
            ("repricing.csv", export::repricing_csv(&q, &d)),
            ("summary.csv", export::summary_csv(&summary)),
        ],
    )
}

pub fn cmd_bk(a: &BkArgs) -> Result<(), Failure> {
    let c = &a.common;
    check_samples(c.samples)?;
    if !(a.tol > 0.0) {
        return Err(Failure::new(ExitStatus::Usage, "--tol must be positive"));
    }
    if a.max_iter == 0 {
        return Err(Failure::new(
            ExitStatus::Usage,
            "--max-iter must be at least 1",
        ));
    }
    let method = c.method();
    let inverter = method.into_strategy()?;
    let q = read_quotes(&c.input)?;
    if q.digitals().is_some() {
        let _ = writeln!(
            std::io::stderr(),
            "warning: digital prices in {} are ignored by `bk`",
            c.input.display()
        );
    }
    let q = q.with_digitals(None)?;
    q.validate().into_result()?;

    let solver = BkSolver::new()
        .inverter(inverter)
        .tol(a.tol)
        .max_iter(a.max_iter);
    let sol = match solver.solve(&q) {
        Ok(s) => s,
        Err(MedError::NonConvergence {
            reason,
            trace,
            certificate,
        }) => {
            write_export(&c.out, &[("trace.csv", export::trace_csv(&trace))])?;
            return Err(MedError::NonConvergence {
                reason,
                trace,
                certificate,
            }
            .into());
        }
        Err(e) => return Err(e.into()),
    };

    let mut summary = vec![
        ("command", "bk".to_string()),
        ("method", method.name().to_string()),
        ("iterations", sol.trace.steps().to_string()),
        ("tol", export::fmt_param(a.tol)),
    ];
    summary.extend(export::density_rows(&q, &sol.density));
    summary.extend(export::certificate_rows(&sol.certificate));
    let max_log_jump = sol
        .density
        .log_jumps()
        .iter()
        .fold(0.0f64, |m, g| m.max(g.abs()));
    summary.push(("max_abs_log_jump", export::fmt_param(max_log_jump)));
    write_export(
        &c.out,
        &[
            ("params.csv", export::params_csv(&sol.density)),
            ("density.csv", export::density_csv(&sol.density, c.samples)),
            ("repricing.csv", export::repricing_csv(&q, &sol.density)),
            (
                "digitals.csv",
                export::digitals_csv(&sol.density, &sol.digitals),
            ),
            ("trace.csv", export::trace_csv(&sol.trace)),
            ("summary.csv", export::summary_csv(&summary)),
        ],
    )
}

pub fn cmd_langevin(a: &LangevinArgs) -> Result<(), Failure> {
    let (from, to) = if a.inverse {
        (a.from.unwrap_or(-0.999), a.to.unwrap_or(0.999))
    } else {
        (a.from.unwrap_or(-8.0), a.to.unwrap_or(8.0))
    };
    let usage = |m: String| Failure::new(ExitStatus::Usage, m);
    if !from.is_finite() || !to.is_finite() {
        return Err(usage("--from and --to must be finite".into()));
    }
    if a.points == 0 {
        return Err(usage("--points must be at least 1".into()));
    }
    if from > to {
        return Err(usage(format!("inverted range: --from {from} > --to {to}")));
    }
    if from == to && a.points != 1 {
        return Err(usage("empty range needs --points 1".into()));
    }
    let table = if a.inverse {
        if from <= -1.0 || to >= 1.0 {
            return Err(usage("inverse range must lie inside (-1, 1)".into()));
        }
        let methods: [&dyn InverseLangevin; 4] =
            [&TaylorSeries::default(), &Pade, &RoundedPade, &Bergstrom];
        export::inverse_table(from, to, a.points, &ExactInverse::default(), &methods)
    } else {
        export::langevin_table(from, to, a.points)
    };
    match &a.out {
        Some(path) => std::fs::write(path, table).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(table.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<(), Failure> {
    let q = read_quotes(&a.input)?;
    let report = q.validate();
    if report.is_ok() {
        println!("{}", json!({ "status": "ok", "n": q.n() }));
        Ok(())
    } else {
        Err(MedError::Arbitrage(report).into())
    }
}
