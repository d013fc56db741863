use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gauged_reduce::check::{self, CheckConfig, CheckReport};
use gauged_reduce::nalgebra::DVector;
use gauged_reduce::scenarios::{self, Scenario, SCENARIO_NAMES};
use gauged_reduce::weinstein::WeinsteinPoint;
use gauged_reduce::{CoAlgebraElement, Error};

/// Relative tolerance for `bracket` against the brute-force bracket.
const ORACLE_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "gauged-reduce", version, about = "Reduced Poisson brackets, flows and leaves for built-in scenarios")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "GAUGED_REDUCE_SEED", default_value_t = gauged_reduce::rng::DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suites; exit 1 if any entry fails.
    Check {
        /// Scenarios to check (all when omitted).
        scenarios: Vec<String>,
        #[command(flatten)]
        suite: SuiteArgs,
        /// Print the full reports as a JSON array.
        #[arg(long)]
        json: bool,
    },
    /// Reduced bracket {f, g} with its three terms and the upstairs value.
    Bracket {
        scenario: String,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Point as {"x":[..],"eta":[..],"lambda":[..]} or @file; defaults
        /// to the scenario's designated point.
        #[arg(long)]
        point: Option<String>,
    },
    /// Integrate the Hamiltonian flow of an observable with RK4.
    Flow {
        scenario: String,
        /// Hamiltonian; defaults to the scenario's.
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        point: Option<String>,
        /// Total time.
        #[arg(long = "T", visible_alias = "time", default_value_t = 1.0)]
        total_time: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Write the trajectory here instead of stdout; a summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        /// Emit every n-th step (the last step is always emitted).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
    },
    /// Dimension table of the symplectic leaf through lambda.
    Leaf {
        scenario: String,
        /// Coefficients as a JSON array, {"lambda":[..]}, or @file.
        #[arg(long)]
        lambda: Option<String>,
        /// Base point for the magnetic flag as a JSON array.
        #[arg(long)]
        x: Option<String>,
    },
    /// JSON document of every check entry with provenance tags.
    Report {
        scenario: String,
        #[command(flatten)]
        suite: SuiteArgs,
    },
}

#[derive(Args)]
struct SuiteArgs {
    /// Random samples per property.
    #[arg(long, default_value_t = 12)]
    samples: usize,
    #[arg(long, default_value_t = 1.0)]
    flow_time: f64,
    #[arg(long, default_value_t = 1e-3)]
    flow_dt: f64,
}

impl SuiteArgs {
    fn config(&self, seed: u64) -> CheckConfig {
        CheckConfig {
            seed,
            samples: self.samples,
            flow_time: self.flow_time,
            flow_dt: self.flow_dt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

enum Outcome {
    Pass,
    Fail,
}

struct Failure {
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: error_kind(&e),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure {
                kind: "broken_pipe",
                message: e.to_string(),
            };
        }
        Error::Io(e).into()
    }
}

/// Writes one line to stdout without panicking on a closed pipe.
fn emit(text: impl std::fmt::Display) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    Ok(())
}

fn to_pretty<T: serde::Serialize + ?Sized>(v: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v).map_err(Error::from)?)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ClosureViolation { .. } => "closure_violation",
        Error::InvalidAlgebra(_) => "invalid_algebra",
        Error::InvalidAction(_) => "invalid_action",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::OffManifold { .. } => "off_manifold",
        Error::OffTangent { .. } => "off_tangent",
        Error::Degenerate { .. } => "degenerate",
        Error::SectionDegenerate => "section_degenerate",
        Error::FdStepFailure(_) => "fd_step_failure",
        Error::InvarianceViolation { .. } => "invariance_violation",
        Error::CanonicalizationFailure(_) => "canonicalization_failure",
        Error::StepOutOfDomain { .. } => "step_out_of_domain",
        Error::RepresentativeAmbiguity { .. } => "representative_ambiguity",
        Error::ScenarioSelfCheckFailure { .. } => "scenario_self_check_failure",
        Error::UnknownScenario(_) => "unknown_scenario",
        Error::Parse { .. } => "parse_error",
        Error::Eval(_) => "eval_error",
        Error::InvalidPoint(_) => "invalid_point",
        Error::Json(_) => "json_error",
        Error::Io(_) => "io_error",
    }
}

fn emit_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            emit_error("usage", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(f) if f.kind == "broken_pipe" => ExitCode::SUCCESS,
        Err(f) => {
            emit_error(f.kind, &f.message);
            // A scenario that fails its own construction checks is an
            // assertion failure, not bad input.
            ExitCode::from(if f.kind == "scenario_self_check_failure" { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let seed = cli.seed;
    match cli.command {
        Command::Check { scenarios, suite, json } => run_check(&scenarios, &suite.config(seed), json),
        Command::Bracket { scenario, f, g, point } => run_bracket(&scenario, &f, &g, point.as_deref()),
        Command::Flow {
            scenario,
            h,
            point,
            total_time,
            dt,
            out,
            format,
            stride,
        } => run_flow(&scenario, h.as_deref(), point.as_deref(), total_time, dt, out, format, stride as usize),
        Command::Leaf { scenario, lambda, x } => run_leaf(&scenario, lambda.as_deref(), x.as_deref()),
        Command::Report { scenario, suite } => {
            let s = scenarios::scenario(&scenario)?;
            let report = check::run_checks(&s, &suite.config(seed));
            emit(to_pretty(&report)?)?;
            Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

/// Reads `@path` arguments from disk.
fn inline_or_file(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => Ok(arg.to_string()),
    }
}

fn load_point(s: &Scenario, arg: Option<&str>) -> Result<WeinsteinPoint, Failure> {
    let w = match arg {
        Some(a) => WeinsteinPoint::from_json(&inline_or_file(a)?)?,
        None => s.designated_point.clone(),
    };
    s.manifold.validate_point(&w)?;
    Ok(w)
}

fn parse_vector(text: &str, key: &str) -> Result<Vec<f64>, Failure> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(Error::from)?;
    let arr = match &value {
        serde_json::Value::Object(m) => m.get(key),
        other => Some(other),
    };
    arr.and_then(|a| a.as_array())
        .and_then(|a| a.iter().map(|v| v.as_f64()).collect::<Option<Vec<_>>>())
        .ok_or_else(|| Failure {
            kind: "invalid_point",
            message: format!("expected a JSON array of numbers or {{\"{key}\": [..]}}"),
        })
}

fn run_check(names: &[String], cfg: &CheckConfig, as_json: bool) -> Result<Outcome, Failure> {
    let names: Vec<&str> = if names.is_empty() {
        SCENARIO_NAMES.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    let reports = check::run_many(&names, cfg)?;
    if as_json {
        emit(to_pretty(&reports)?)?;
    } else {
        for r in &reports {
            emit(summary(r))?;
        }
    }
    Ok(if reports.iter().all(|r| r.pass) { Outcome::Pass } else { Outcome::Fail })
}

fn summary(r: &CheckReport) -> String {
    use std::fmt::Write as _;
    let verdict = if r.pass { "PASS" } else { "FAIL" };
    let passed = r.entries.iter().filter(|e| e.pass).count();
    let mut s = format!("{verdict} {} ({passed}/{} entries, seed {})", r.scenario, r.entries.len(), r.seed);
    if let Some(leaf) = &r.leaf {
        let d = leaf.dims;
        let _ = write!(
            s,
            " dims {{k_lambda: {}, complement: {}, intersection: {}, mixed: {}, V: {}, leaf: {}}}",
            d.k_lambda, d.k_lambda_perp, d.h_cap_k_lambda, d.h_perp_cap_k_lambda_perp, d.v, d.leaf
        );
    }
    for e in r.failures() {
        let detail = e.detail.as_deref().unwrap_or("");
        let _ = write!(
            s,
            "\n  failed {}/{}: actual {:.6e}, expected {:.6e}, tolerance {:.1e} {detail}",
            e.suite, e.name, e.actual, e.expected, e.tolerance
        );
    }
    s
}

fn run_bracket(name: &str, f: &str, g: &str, point: Option<&str>) -> Result<Outcome, Failure> {
    let s = scenarios::scenario(name)?;
    let w = load_point(&s, point)?;
    let (fo, go) = (s.observable(f)?, s.observable(g)?);
    let b = s.manifold.reduced_bracket(&fo, &go, &w)?;
    let oracle = s.manifold.oracle_bracket(&fo, &go, &w)?;
    let gap = (b.total - oracle).abs();
    let pass = gap <= ORACLE_TOL * (1.0 + oracle.abs());
    let out = json!({
        "scenario": s.name,
        "f": f,
        "g": g,
        "point": w.to_record(),
        "bracket": b,
        "oracle": oracle,
        "oracle_gap": gap,
        "pass": pass,
    });
    emit(to_pretty(&out)?)?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

#[allow(clippy::too_many_arguments)]
fn run_flow(
    name: &str,
    h: Option<&str>,
    point: Option<&str>,
    total_time: f64,
    dt: f64,
    out: Option<PathBuf>,
    format: Format,
    stride: usize,
) -> Result<Outcome, Failure> {
    let s = scenarios::scenario(name)?;
    let w0 = load_point(&s, point)?;
    let h_text = h.unwrap_or(s.hamiltonian);
    let ho = s.observable(h_text)?;
    let tr = s.manifold.integrate_flow(&ho, &w0, total_time, dt)?;

    let sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    let (b, m) = (w0.x.len(), w0.lambda.dim());
    if let Format::Csv = format {
        let mut header = vec!["t".to_string()];
        header.extend((1..=b).map(|i| format!("x{i}")));
        header.extend((1..=b).map(|i| format!("e{i}")));
        header.extend((1..=m).map(|i| format!("l{i}")));
        writeln!(sink, "{}", header.join(","))?;
    }
    let last = tr.times.len() - 1;
    for (i, rec) in tr.records().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        match format {
            Format::Jsonl => writeln!(sink, "{}", serde_json::to_string(&rec).map_err(Error::from)?)?,
            Format::Csv => {
                let row: Vec<String> = std::iter::once(rec.t)
                    .chain(rec.x)
                    .chain(rec.eta)
                    .chain(rec.lambda)
                    .map(|v| v.to_string())
                    .collect();
                writeln!(sink, "{}", row.join(","))?;
            }
        }
    }
    sink.flush()?;
    drop(sink);

    if out.is_some() {
        let sp = &s.manifold;
        let energy_drift = tr.max_drift(|w| gauged_reduce::weinstein::Observable::value(&ho, sp, w))?;
        let summary = json!({
            "scenario": s.name,
            "h": h_text,
            "steps": last,
            "dt": dt,
            "T": total_time,
            "energy_drift": energy_drift,
            "final": tr.last().to_record(),
        });
        emit(summary)?;
    }
    Ok(Outcome::Pass)
}

fn run_leaf(name: &str, lambda: Option<&str>, x: Option<&str>) -> Result<Outcome, Failure> {
    let s = scenarios::scenario(name)?;
    let lambda = match lambda {
        Some(a) => CoAlgebraElement::from_slice(&parse_vector(&inline_or_file(a)?, "lambda")?),
        None => s.reference_lambda.clone().unwrap_or_else(|| s.designated_point.lambda.clone()),
    };
    let x = match x {
        Some(a) => DVector::from_vec(parse_vector(&inline_or_file(a)?, "x")?),
        None => s.designated_point.x.clone(),
    };
    if x.len() != s.manifold.base_dim() || !s.manifold.in_domain(&x) {
        return Err(Error::InvalidPoint(format!("base point {:?} is outside the section domain", x.as_slice())).into());
    }
    let report = s.manifold.leaf_report(&lambda, &x)?;
    emit(to_pretty(&report)?)?;
    Ok(Outcome::Pass)
}
