//! Batch front-end for superposition, deconvolution and verification of
//! Janossy-density point processes.
//!
//! Exit codes: 0 success, 1 completed with flags (or a failed check),
//! 2 parse error, 3 incompatible inputs, 4 mathematical precondition
//! (zero constant term in a divisor).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use janossy::format::JsonScalar;
use janossy::scalar::{format_rational, parse_rational};
use janossy::{
    deconvolve_with, parse_process, pgfl_eval, process_to_json, quotient_nth, report_to_json,
    series_div, superpose_with, AnyProcess, DerivativeVector, Error, JanossyProcess, NumericMode,
    Options, PowerSeries, Rational, Scalar, TestFunction,
};

pub mod check;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "janossy",
    version,
    about = "Superpose and deconvolve finite point processes"
)]
pub struct Cli {
    /// Numeric mode: rational (exact) or float.
    #[arg(long, global = true)]
    pub mode: Option<NumericMode>,

    /// Truncation order: inputs are truncated to it and outputs capped at it.
    /// For `check`, the order of generated processes.
    #[arg(long, global = true)]
    pub max_order: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Superpose two independent processes (product of generating functionals).
    Superpose {
        q: PathBuf,
        r: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover R from P = Q ⊕ R and Q.
    Deconvolve {
        p: PathBuf,
        q: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report path; defaults to `<out>.report.json` when --out is given.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate the generating functional at a test function.
    Eval {
        process: PathBuf,
        /// Per-label values, e.g. "a=0.5,b=1/3". Defaults to ψ ≡ 1.
        #[arg(long)]
        psi: Option<String>,
    },
    /// Run the randomized invariant suites.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of state-space points.
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Directory for the failing instance dump.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perturb one superposed density before deconvolving (exercises the
        /// failure path).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Print the n-th derivative of f/g at 0 by the quotient rule, next to
    /// the long-division oracle. Coefficients are power-series coefficients.
    ScalarQuotient {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(short, long)]
        n: usize,
    },
    /// Golden fixtures plus a short check run, including the failure hook.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroConstantTerm => EXIT_PRECONDITION,
            Error::SpaceMismatch
            | Error::ModeMismatch(..)
            | Error::OrderMismatch(..)
            | Error::OrderExceeded { .. } => EXIT_MISMATCH,
            _ => EXIT_PARSE,
        };
        CliError::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments and runs one command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn execute(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Superpose { q, r, out } => cmd_superpose(cli, q, r, out.as_deref()),
        Command::Deconvolve { p, q, out, report } => {
            cmd_deconvolve(cli, p, q, out.as_deref(), report.as_deref())
        }
        Command::Eval { process, psi } => cmd_eval(cli, process, psi.as_deref()),
        Command::Check {
            seed,
            points,
            trials,
            out,
            corrupt,
        } => {
            let cfg = check::CheckConfig {
                seed: *seed,
                points: *points,
                order: cli.max_order.unwrap_or(5),
                trials: *trials,
                corrupt: *corrupt,
                dump_dir: Some(
                    out.clone()
                        .unwrap_or_else(|| PathBuf::from("check-failure")),
                ),
            };
            cfg.validate().map_err(|m| CliError::new(EXIT_PARSE, m))?;
            let mut stdout = std::io::stdout();
            let passed = match cli.mode.unwrap_or(NumericMode::Rational) {
                NumericMode::Rational => check::run_check::<Rational>(&cfg, &mut stdout),
                NumericMode::Float => check::run_check::<f64>(&cfg, &mut stdout),
            };
            Ok(if passed { EXIT_OK } else { EXIT_FLAGGED })
        }
        Command::ScalarQuotient { f, g, n } => cmd_scalar_quotient(cli, f, g, *n),
        Command::Selftest { seed } => Ok(if check::selftest(*seed, &mut std::io::stdout()) {
            EXIT_OK
        } else {
            EXIT_FLAGGED
        }),
    }
}

fn load(path: &Path) -> CliResult<AnyProcess> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_process(&text).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

/// Applies `--mode` and `--max-order` to a loaded process.
fn adjust(cli: &Cli, process: AnyProcess) -> CliResult<AnyProcess> {
    let process = match (cli.mode, process) {
        (Some(NumericMode::Float), AnyProcess::Rational(p)) => AnyProcess::Float(p.to_float()),
        (Some(NumericMode::Rational), AnyProcess::Float(_)) => {
            return Err(Error::ModeMismatch(NumericMode::Rational, NumericMode::Float).into())
        }
        (_, p) => p,
    };
    Ok(match (cli.max_order, process) {
        (Some(n), AnyProcess::Rational(p)) => AnyProcess::Rational(p.truncated(n)),
        (Some(n), AnyProcess::Float(p)) => AnyProcess::Float(p.truncated(n)),
        (None, p) => p,
    })
}

enum Pair {
    Rational(JanossyProcess<Rational>, JanossyProcess<Rational>),
    Float(JanossyProcess<f64>, JanossyProcess<f64>),
}

fn load_pair(cli: &Cli, a: &Path, b: &Path) -> CliResult<Pair> {
    let a = adjust(cli, load(a)?)?;
    let b = adjust(cli, load(b)?)?;
    match (a, b) {
        (AnyProcess::Rational(a), AnyProcess::Rational(b)) => Ok(Pair::Rational(a, b)),
        (AnyProcess::Float(a), AnyProcess::Float(b)) => Ok(Pair::Float(a, b)),
        (a, b) => Err(Error::ModeMismatch(a.mode(), b.mode()).into()),
    }
}

fn options(cli: &Cli) -> Options {
    let mut opts = Options::default();
    if let Some(n) = cli.max_order {
        opts.order_limit = n;
    }
    opts
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::new(EXIT_PARSE, format!("stdout: {e}")))
        }
    }
}

fn format_scalar<S: JsonScalar>(v: &S) -> String {
    match v.to_json() {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => v.to_string(),
    }
}

pub fn cmd_superpose(cli: &Cli, q: &Path, r: &Path, out: Option<&Path>) -> CliResult<i32> {
    let opts = options(cli);
    let text = match load_pair(cli, q, r)? {
        Pair::Rational(q, r) => process_to_json(&superpose_with(&q, &r, &opts)?)?,
        Pair::Float(q, r) => process_to_json(&superpose_with(&q, &r, &opts)?)?,
    };
    write_output(out, &text)?;
    Ok(EXIT_OK)
}

fn default_report_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.report.json"))
}

fn deconvolve_typed<S: JsonScalar>(
    p: &JanossyProcess<S>,
    q: &JanossyProcess<S>,
    opts: &Options,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> CliResult<i32> {
    let (r, report) = deconvolve_with(p, q, opts)?;
    write_output(out, &process_to_json(&r)?)?;
    let report_json = report_to_json(&report)?;
    let summary = format!(
        "r0 = p0/q0 = {} / {} = {}\nmin_density = {}\nnegative_count = {}\nterm_count = {}\nmass = {}\nvalid_process = {}\n",
        format_scalar(p.p0()),
        format_scalar(q.p0()),
        format_scalar(r.p0()),
        format_scalar(&report.min_density),
        report.negative_count,
        report.term_count,
        format_scalar(&report.mass),
        report.valid_process,
    );
    let report_path = report_path
        .map(Path::to_path_buf)
        .or_else(|| out.map(default_report_path));
    match &report_path {
        Some(path) => write_output(Some(path), &report_json)?,
        None => eprint!("{report_json}"),
    }
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    if !report.valid_process {
        eprintln!(
            "warning: quotient is not a probability process ({} negative values, mass {})",
            report.negative_count,
            format_scalar(&report.mass)
        );
        return Ok(EXIT_FLAGGED);
    }
    Ok(EXIT_OK)
}

pub fn cmd_deconvolve(
    cli: &Cli,
    p: &Path,
    q: &Path,
    out: Option<&Path>,
    report: Option<&Path>,
) -> CliResult<i32> {
    let opts = options(cli);
    match load_pair(cli, p, q)? {
        Pair::Rational(p, q) => deconvolve_typed(&p, &q, &opts, out, report),
        Pair::Float(p, q) => deconvolve_typed(&p, &q, &opts, out, report),
    }
}

fn parse_psi<S: JsonScalar>(
    process: &JanossyProcess<S>,
    text: Option<&str>,
) -> CliResult<TestFunction<S>> {
    let space = process.space();
    let Some(text) = text else {
        return Ok(TestFunction::constant(space, S::one()));
    };
    let mut values: Vec<Option<S>> = vec![None; space.len()];
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (label, value) = part.split_once('=').ok_or_else(|| {
            CliError::new(
                EXIT_PARSE,
                format!("--psi entry `{part}` is not label=value"),
            )
        })?;
        let idx = space
            .index_of(label.trim())
            .ok_or_else(|| CliError::new(EXIT_PARSE, format!("--psi: unknown label `{label}`")))?;
        let v = parse_rational(value)
            .ok_or_else(|| CliError::new(EXIT_PARSE, format!("--psi: invalid value `{value}`")))?;
        values[idx] = Some(S::from_rational(&v));
    }
    let values = values
        .into_iter()
        .zip(space.labels())
        .map(|(v, l)| {
            v.ok_or_else(|| CliError::new(EXIT_PARSE, format!("--psi: no value for label `{l}`")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(TestFunction::new(values))
}

pub fn cmd_eval(cli: &Cli, path: &Path, psi: Option<&str>) -> CliResult<i32> {
    let value = match adjust(cli, load(path)?)? {
        AnyProcess::Rational(p) => format_scalar(&pgfl_eval(&p, &parse_psi(&p, psi)?)),
        AnyProcess::Float(p) => format_scalar(&pgfl_eval(&p, &parse_psi(&p, psi)?)),
    };
    println!("{value}");
    Ok(EXIT_OK)
}

fn parse_coeffs(text: &str) -> CliResult<Vec<Rational>> {
    text.split(',')
        .map(|c| {
            parse_rational(c).ok_or_else(|| {
                CliError::new(EXIT_PARSE, format!("invalid coefficient `{}`", c.trim()))
            })
        })
        .collect()
}

fn scalar_quotient_typed<S: JsonScalar>(
    f: &[Rational],
    g: &[Rational],
    n: usize,
) -> CliResult<(S, S)> {
    let conv =
        |v: &[Rational]| PowerSeries::with_order(v.iter().map(S::from_rational).collect(), n);
    let (fs, gs) = (conv(f), conv(g));
    let oracle = series_div(&fs, &gs)?.coeff(n) * S::factorial(n);
    let value = quotient_nth(
        &DerivativeVector::from_series(&fs),
        &DerivativeVector::from_series(&gs),
        n,
    )?;
    Ok((value, oracle))
}

pub fn cmd_scalar_quotient(cli: &Cli, f: &str, g: &str, n: usize) -> CliResult<i32> {
    let (f, g) = (parse_coeffs(f)?, parse_coeffs(g)?);
    if n > janossy::combinatorics::MAX_GROUND {
        return Err(Error::OrderExceeded {
            order: n,
            max: janossy::combinatorics::MAX_GROUND,
        }
        .into());
    }
    let (value, oracle, agree) = match cli.mode.unwrap_or(NumericMode::Rational) {
        NumericMode::Rational => {
            let (v, o) = scalar_quotient_typed::<Rational>(&f, &g, n)?;
            (format_rational(&v), format_rational(&o), v == o)
        }
        NumericMode::Float => {
            let (v, o) = scalar_quotient_typed::<f64>(&f, &g, n)?;
            (format_scalar(&v), format_scalar(&o), v.close_to(&o))
        }
    };
    println!("quotient_nth = {value}");
    println!("series_div   = {oracle}");
    if !agree {
        eprintln!("error: quotient rule and long division disagree");
        return Ok(EXIT_FLAGGED);
    }
    Ok(EXIT_OK)
}
