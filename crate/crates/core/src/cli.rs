//! Command-line front end. Every command produces one [`OutputRecord`] that
//! renders as JSON (`{command, parameters, results, metadata}`) or CSV.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::bounds::{self, BoundsRow};
use crate::exact::ExactValue;
use crate::protocols::{self, EstimateResult, LocalSignStrategy, OneBitSignStrategy};
use crate::tsirelson;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SAMPLES: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 42;

/// Published ratio for n = 6 that disagrees with the computed `75π²/512`.
const N6_DISCREPANCY: &str =
    "published table entry 75*pi^2/517 ~ 1.432 disagrees with computed 75*pi^2/512 ~ 1.44574";

#[derive(Parser, Debug)]
#[command(name = "bell-onebit", version = VERSION, about = "Bounds and simulations for one-bit classical simulation of a.b correlations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Local,
    Onebit,
    Quantum,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact bounds and quantum/local ratios for n = 2..=max-n.
    Table {
        #[arg(long, default_value_t = 6)]
        max_n: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exact bounds for a single dimension.
    Bounds {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Monte Carlo estimate of the Bell value of a strategy.
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        protocol: Protocol,
        /// Angle between the one-bit directions; onebit only (default pi/4).
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Certify the gamma-matrix realization of 5-dimensional dot products.
    VerifyQuantum {
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Maximize the one-bit strategy value over theta.
    OptimizeTheta {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Num(f64),
    Exact(ExactValue),
    Int(i64),
    Bool(bool),
    Text(String),
    Signs(Vec<i8>),
    Vector(Vec<f64>),
    Rows(Vec<Record>),
}

/// Insertion-ordered string-keyed fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn push(&mut self, key: &str, value: Field) -> &mut Self {
        self.0.push((key.to_string(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

/// Renders with 17 significant digits; non-finite values have no JSON form.
pub fn format_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn raw(x: f64) -> Box<RawValue> {
    let s = format_float(x).unwrap_or_else(|| "null".to_string());
    RawValue::from_string(s).expect("formatted float is valid JSON")
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Num(x) => raw(*x).serialize(s),
            Field::Exact(v) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("value", &raw(v.to_f64()))?;
                m.serialize_entry("exact", &v.to_string())?;
                m.end()
            }
            Field::Int(i) => s.serialize_i64(*i),
            Field::Bool(b) => s.serialize_bool(*b),
            Field::Text(t) => s.serialize_str(t),
            Field::Signs(v) => v.serialize(s),
            Field::Vector(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(&raw(*x))?;
                }
                seq.end()
            }
            Field::Rows(rows) => rows.serialize(s),
        }
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: Record,
    pub results: Record,
    pub metadata: Record,
}

impl OutputRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Header row, then one row per record. Table output has one row per
    /// dimension; every other command has a single row.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Record> = match self.results.get("rows") {
            Some(Field::Rows(rows)) => rows
                .iter()
                .map(|r| {
                    let mut full = self.parameters.clone();
                    full.0.extend(r.0.iter().cloned());
                    full
                })
                .collect(),
            _ => {
                let mut full = self.parameters.clone();
                full.0.extend(self.results.0.iter().cloned());
                vec![full]
            }
        };
        let mut header: Vec<String> = Vec::new();
        let flat: Vec<Vec<(String, String)>> = rows.iter().map(flatten_csv).collect();
        for row in &flat {
            for (k, _) in row {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        // wall-clock time stays out of CSV so identical runs are byte-identical
        let meta: Vec<(String, String)> = self
            .metadata
            .0
            .iter()
            .filter(|(k, _)| k != "elapsed_seconds")
            .map(|(k, v)| (k.clone(), csv_cell(v)))
            .collect();
        header.extend(meta.iter().map(|(k, _)| k.clone()));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for row in &flat {
            let cells: Vec<String> = header
                .iter()
                .map(|h| {
                    row.iter()
                        .chain(meta.iter())
                        .find(|(k, _)| k == h)
                        .map(|(_, v)| v.clone())
                        .unwrap_or_default()
                })
                .collect();
            w.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

fn csv_cell(f: &Field) -> String {
    match f {
        Field::Num(x) => format_float(*x).unwrap_or_else(|| "nan".into()),
        Field::Exact(v) => format_float(v.to_f64()).unwrap_or_else(|| "nan".into()),
        Field::Int(i) => i.to_string(),
        Field::Bool(b) => b.to_string(),
        Field::Text(t) => t.clone(),
        Field::Signs(v) => v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
        Field::Vector(v) => v
            .iter()
            .map(|x| format_float(*x).unwrap_or_else(|| "nan".into()))
            .collect::<Vec<_>>()
            .join(" "),
        Field::Rows(_) => String::new(),
    }
}

/// Exact fields become a float column plus an `_exact` column.
fn flatten_csv(r: &Record) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (k, v) in &r.0 {
        out.push((k.clone(), csv_cell(v)));
        if let Field::Exact(e) = v {
            out.push((format!("{k}_exact"), e.to_string()));
        }
    }
    out
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    VerificationFailed(OutputRecord, String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::VerificationFailed(..) => EXIT_VERIFY_FAILED,
        }
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn metadata(seed: Option<u64>, samples: Option<u64>, workers: Option<usize>, started: Instant) -> Record {
    let mut m = Record::default();
    if let Some(s) = seed {
        m.push("seed", Field::Int(s as i64));
    }
    if let Some(s) = samples {
        m.push("samples", Field::Int(s as i64));
    }
    if let Some(w) = workers {
        m.push("workers", Field::Int(w as i64));
    }
    m.push("version", Field::Text(VERSION.to_string()));
    m.push("elapsed_seconds", Field::Num(started.elapsed().as_secs_f64()));
    m
}

fn bounds_record(row: &BoundsRow) -> Record {
    let mut r = Record::default();
    r.push("n", Field::Int(i64::from(row.n)))
        .push("q_tilde", Field::Exact(row.q_tilde.clone()))
        .push("kappa", Field::Exact(row.kappa.clone()))
        .push("local", Field::Exact(row.local.clone()))
        .push("one_bit_cap", Field::Exact(row.one_bit_cap.clone()))
        .push("ratio", Field::Exact(row.ratio.clone()))
        .push("exceeds_sqrt2", Field::Bool(row.exceeds_sqrt2));
    if row.n == 6 {
        r.push("table_discrepancy", Field::Text(N6_DISCREPANCY.to_string()));
    }
    r
}

pub fn cmd_table(max_n: u32) -> Result<OutputRecord, CliError> {
    let started = Instant::now();
    if max_n < 2 {
        return usage(format!("--max-n must be >= 2, got {max_n}"));
    }
    let rows = bounds::table(max_n)?;
    let mut params = Record::default();
    params.push("max_n", Field::Int(i64::from(max_n)));
    let mut results = Record::default();
    results
        .push("rows", Field::Rows(rows.iter().map(bounds_record).collect()))
        .push("threshold_dimension", Field::Int(i64::from(bounds::threshold_dimension())));
    Ok(OutputRecord {
        command: "table".into(),
        parameters: params,
        results,
        metadata: metadata(None, None, None, started),
    })
}

pub fn cmd_bounds(n: u32) -> Result<OutputRecord, CliError> {
    let started = Instant::now();
    if n < 2 {
        return usage(format!("--n must be >= 2, got {n}"));
    }
    let row = BoundsRow::compute(n)?;
    let mut params = Record::default();
    params.push("n", Field::Int(i64::from(n)));
    let mut results = bounds_record(&row);
    results.0.retain(|(k, _)| k != "n");
    Ok(OutputRecord {
        command: "bounds".into(),
        parameters: params,
        results,
        metadata: metadata(None, None, None, started),
    })
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn cmd_simulate(
    n: u32,
    protocol: Protocol,
    theta: Option<f64>,
    samples: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<OutputRecord, CliError> {
    let started = Instant::now();
    if n < 2 {
        return usage(format!("--n must be >= 2, got {n}"));
    }
    if samples < 2 {
        return usage(format!("--samples must be >= 2, got {samples}"));
    }
    if theta.is_some() && protocol != Protocol::Onebit {
        return usage("--theta is only valid with --protocol onebit");
    }
    let workers = workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return usage("--workers must be >= 1");
    }
    let dim = n as usize;
    let mut params = Record::default();
    params.push("n", Field::Int(i64::from(n)));
    let (name, estimate, reference): (&str, EstimateResult, Field) = match protocol {
        Protocol::Local => {
            let s = LocalSignStrategy::aligned(dim)?;
            let est = protocols::estimate_bell(&s, samples, seed, workers)?;
            ("local", est, Field::Exact(bounds::local_bound(i64::from(n))?))
        }
        Protocol::Onebit => {
            let t = theta.unwrap_or(FRAC_PI_4);
            let s = OneBitSignStrategy::new(dim, t)?;
            params.push("theta", Field::Num(t));
            let est = protocols::estimate_bell(&s, samples, seed, workers)?;
            (
                "onebit",
                est,
                Field::Num(protocols::exact_one_bit_value(dim, t)?),
            )
        }
        Protocol::Quantum => {
            let est = protocols::quantum_value_mc(dim, samples, seed, workers)?;
            ("quantum", est, Field::Exact(bounds::quantum_lower_bound(i64::from(n))?))
        }
    };
    params.push("protocol", Field::Text(name.into()));
    let ref_value = match &reference {
        Field::Exact(e) => e.to_f64(),
        Field::Num(x) => *x,
        _ => unreachable!(),
    };
    let mut results = Record::default();
    results
        .push("mean", Field::Num(estimate.mean))
        .push("stderr", Field::Num(estimate.stderr))
        .push("reference", reference)
        .push("z_score", Field::Num(estimate.z_score(ref_value)));
    if protocol == Protocol::Onebit {
        results.push("one_bit_cap", Field::Exact(bounds::one_bit_cap(i64::from(n))?));
    }
    Ok(OutputRecord {
        command: "simulate".into(),
        parameters: params,
        results,
        metadata: metadata(Some(seed), Some(samples), Some(workers), started),
    })
}

pub fn cmd_verify_quantum(samples: u64, seed: u64, tol: f64) -> Result<OutputRecord, CliError> {
    let started = Instant::now();
    if !(tol > 0.0) {
        return usage(format!("--tol must be > 0, got {tol}"));
    }
    if samples < 1 {
        return usage("--samples must be >= 1");
    }
    let report = tsirelson::verify_construction(samples, seed, tol)?;
    let mut params = Record::default();
    params.push("tol", Field::Num(tol));
    let mut results = Record::default();
    results
        .push("max_abs_error", Field::Num(report.max_abs_error))
        .push("passed", Field::Bool(report.passed))
        .push("eta", Field::Signs(report.eta.to_vec()))
        .push("eta_basis", Field::Signs(report.eta_basis.to_vec()))
        .push("eta_fit", Field::Vector(report.eta_fit.to_vec()))
        .push("naive_max_residual", Field::Num(report.naive_max_residual))
        .push(
            "local_dimension",
            Field::Int(tsirelson::local_dimension(tsirelson::GENERATORS as u32)? as i64),
        );
    if !report.passed {
        results
            .push("worst_a", Field::Vector(report.worst_pair.0.clone()))
            .push("worst_b", Field::Vector(report.worst_pair.1.clone()));
    }
    let record = OutputRecord {
        command: "verify-quantum".into(),
        parameters: params,
        results,
        metadata: metadata(Some(seed), Some(samples), None, started),
    };
    if report.passed {
        Ok(record)
    } else {
        let msg = format!(
            "verification failed: max |error| = {:e} > {:e} at a = {:?}, b = {:?}",
            report.max_abs_error, tol, report.worst_pair.0, report.worst_pair.1
        );
        Err(CliError::VerificationFailed(record, msg))
    }
}

pub fn cmd_optimize_theta(n: u32, tol: f64) -> Result<OutputRecord, CliError> {
    let started = Instant::now();
    if n < 2 {
        return usage(format!("--n must be >= 2, got {n}"));
    }
    if !(tol > 0.0) {
        return usage(format!("--tol must be > 0, got {tol}"));
    }
    let opt = protocols::optimize_theta(n as usize, tol)?;
    let local = bounds::local_bound(i64::from(n))?;
    let mut params = Record::default();
    params.push("n", Field::Int(i64::from(n))).push("tol", Field::Num(tol));
    let mut results = Record::default();
    results
        .push("theta_star", Field::Num(opt.theta))
        .push("value", Field::Num(opt.value))
        .push("ratio_to_local", Field::Num(opt.value / local.to_f64()))
        .push("local", Field::Exact(local.clone()))
        .push("one_bit_cap", Field::Exact(ExactValue::sqrt2() * local))
        .push("iterations", Field::Int(opt.iterations as i64));
    Ok(OutputRecord {
        command: "optimize-theta".into(),
        parameters: params,
        results,
        metadata: metadata(None, None, None, started),
    })
}

fn dispatch(cmd: Command) -> (Format, Result<OutputRecord, CliError>) {
    match cmd {
        Command::Table { max_n, format } => (format, cmd_table(max_n)),
        Command::Bounds { n, format } => (format, cmd_bounds(n)),
        Command::Simulate {
            n,
            protocol,
            theta,
            samples,
            seed,
            workers,
            format,
        } => (format, cmd_simulate(n, protocol, theta, samples, seed, workers)),
        Command::VerifyQuantum {
            samples,
            seed,
            tol,
            format,
        } => (format, cmd_verify_quantum(samples, seed, tol)),
        Command::OptimizeTheta { n, tol, format } => (format, cmd_optimize_theta(n, tol)),
    }
}

fn render(record: &OutputRecord, format: Format) -> String {
    match format {
        Format::Json => record.to_json() + "\n",
        Format::Csv => record.to_csv(),
    }
}

/// Parses `args` (including the program name), runs the command, and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let (format, result) = dispatch(cli.command);
    match result {
        Ok(record) => {
            let _ = write!(out, "{}", render(&record, format));
            EXIT_OK
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::VerificationFailed(record, msg)) => {
            let _ = write!(out, "{}", render(&record, format));
            let _ = writeln!(err, "{msg}");
            EXIT_VERIFY_FAILED
        }
    }
}
