//! The `lcq` command line.
//!
//! Exit codes: 0 ok, 2 failed check, 64 usage, 65 bad input or domain,
//! 70 evaluation failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::analysis::{
    concavity_probe, h_transform, jensen_residual, krull_residual, phi_probe, Curvature,
};
use crate::domain::{Domain, MeanPoint, MeanReport};
use crate::dynamics::{iterate_pair, IterationOptions};
use crate::error::Error;
use crate::funceq::{continuity_defect, relative_reflexivity_residual, Table, TiledExtension};
use crate::means::MeanKind;
use crate::probe::probe_mean_properties;
use crate::quotient::{quotient_equal, quotient_eval, Generator, GeneratorSpec, QuotientSpec};
use crate::rng::SampleStream;
use crate::scalar::format_number;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_EVAL: i32 = 70;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) => EXIT_USAGE,
        Error::Domain { .. }
        | Error::Arity { .. }
        | Error::ArityMismatch { .. }
        | Error::Interpolation { .. }
        | Error::Range { .. }
        | Error::Table { .. }
        | Error::Io(_) => EXIT_DATA,
        Error::Evaluation(_) | Error::Transform(_) | Error::Overflow(_) => EXIT_EVAL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Plain,
    /// Only `iterate` (the trace).
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "lcq", version, about = "Logarithmic Cauchy quotients and means")]
pub struct Cli {
    #[arg(long, value_enum, default_value = "plain", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a mean at a point.
    Eval(EvalArgs),
    /// Evaluate L_{f,k} for a generator.
    Quotient(QuotientArgs),
    /// Extend a fundamental-domain seed to a solution of f(x) = (x/k) f(x^k).
    Extend(ExtendArgs),
    /// Run a property check.
    Check(CheckArgs),
    /// Iterate a mean-type mapping.
    Iterate(IterateArgs),
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let xs = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    match xs.as_slice() {
        [x, y] => Ok((*x, *y)),
        _ => Err("expected two comma-separated numbers".into()),
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, default_value = "Lk")]
    pub mean: MeanKind,
    /// Number of variables; defaults to the length of the point.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub point: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    /// canonical:c=,k= | powerlog:c=,alpha= | affine:a=,b=[,domain=] | table:<path>
    #[arg(long)]
    pub gen: GeneratorSpec,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub point: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub k: usize,
    /// CSV with header `x,f` sampling f0 on [p, p^k).
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    pub table: Option<PathBuf>,
    /// Seed f0 from a generator instead of a table.
    #[arg(long)]
    pub gen: Option<GeneratorSpec>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub at: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub continuity_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    MeanProps,
    Reflexivity,
    Equality,
    Krull,
    Concavity,
    Phi,
    Jensen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Concave,
    Convex,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// mean-props: the mean under test.
    #[arg(long, default_value = "Lk")]
    pub mean: MeanKind,
    /// mean-props: above-one | unit | positive.
    #[arg(long)]
    pub domain: Option<Domain>,
    /// Generator under test; defaults to canonical:c=1,k=<k>.
    #[arg(long)]
    pub gen: Option<GeneratorSpec>,
    /// equality: the second generator.
    #[arg(long)]
    pub gen2: Option<GeneratorSpec>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// concavity: finite-difference step.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "concave")]
    pub expect: Expect,
    /// phi: the slope c at 1.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c: f64,
    /// phi: the window (1, 1 + r].
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
    /// jensen: affine:a=,b= | square | exp
    #[arg(long, default_value = "affine:a=3,b=1")]
    pub h: String,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[arg(long)]
    pub m1: MeanKind,
    #[arg(long)]
    pub m2: MeanKind,
    #[arg(long, value_parser = parse_pair)]
    pub start: (f64, f64),
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Write the trace CSV here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub relative_gap: bool,
    /// Mean whose invariance is tracked along the orbit.
    #[arg(long, default_value = "G")]
    pub reference: MeanKind,
}

/// A result record: `value`, `residuals` and `verdict` plus extra fields.
struct Record {
    fields: Map<String, Value>,
    residuals: Map<String, Value>,
}

impl Record {
    fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("value".into(), Value::Null);
        fields.insert("verdict".into(), Value::Null);
        Self { fields, residuals: Map::new() }
    }

    fn set(&mut self, key: &str, v: Value) -> &mut Self {
        self.fields.insert(key.into(), v);
        self
    }

    fn residual(&mut self, key: &str, v: f64) -> &mut Self {
        self.residuals.insert(key.into(), json!(v));
        self
    }

    fn into_value(mut self) -> Value {
        self.fields.insert("residuals".into(), Value::Object(self.residuals));
        Value::Object(self.fields)
    }
}

fn plain_value(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(plain_value).collect::<Vec<_>>().join(","),
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Number(n) if n.is_f64() => format_number(n.as_f64().unwrap()),
        other => other.to_string(),
    }
}

fn render(record: Record, format: Format) -> String {
    let v = record.into_value();
    match format {
        Format::Json => format!("{v}\n"),
        _ => {
            let mut out = String::new();
            for (key, val) in v.as_object().unwrap() {
                match val {
                    Value::Object(inner) => {
                        for (k2, v2) in inner {
                            out.push_str(&format!("{key}.{k2}: {}\n", plain_value(v2)));
                        }
                    }
                    _ => out.push_str(&format!("{key}: {}\n", plain_value(val))),
                }
            }
            out
        }
    }
}

struct Outcome {
    text: String,
    code: i32,
}

type Run = std::result::Result<Outcome, Error>;

fn ok(record: Record, format: Format) -> Run {
    Ok(Outcome { text: render(record, format), code: EXIT_OK })
}

fn verdict(mut record: Record, pass: bool, format: Format) -> Run {
    record.set("verdict", json!(if pass { "pass" } else { "fail" }));
    Ok(Outcome { text: render(record, format), code: if pass { EXIT_OK } else { EXIT_CHECK_FAILED } })
}

fn no_csv(format: Format) -> std::result::Result<(), Error> {
    if format == Format::Csv {
        return Err(Error::Parameter("csv output is only available for `iterate`".into()));
    }
    Ok(())
}

fn check_k(k: Option<usize>, got: usize) -> std::result::Result<(), Error> {
    match k {
        Some(k) if k != got => Err(Error::ArityMismatch { expected: k, got }),
        _ => Ok(()),
    }
}

fn run_eval(a: &EvalArgs, format: Format) -> Run {
    no_csv(format)?;
    check_k(a.k, a.point.len())?;
    let mean = a.mean.build::<f64>();
    let value = mean.eval(&a.point)?;
    let report = MeanReport::new(&a.point, value);
    let mut r = Record::new("eval");
    r.set("mean", json!(mean.name()))
        .set("point", json!(a.point))
        .set("value", json!(value))
        .set("min", json!(report.min))
        .set("max", json!(report.max))
        .set("strict", json!(report.strict))
        .set("verdict", json!(if report.within_bounds() { "mean" } else { "out-of-bounds" }));
    r.residual("lower_margin", value - report.min).residual("upper_margin", report.max - value);
    ok(r, format)
}

fn run_quotient(a: &QuotientArgs, format: Format) -> Run {
    no_csv(format)?;
    let f = a.gen.build(a.k)?;
    let domain = f.domain();
    let spec = QuotientSpec::new(f, a.k)?;
    let point = MeanPoint::new(a.point.clone(), domain)?;
    let value = quotient_eval(&spec, &point)?;
    let mut r = Record::new("quotient");
    r.set("generator", json!(spec.f.label()))
        .set("k", json!(a.k))
        .set("point", json!(a.point))
        .set("value", json!(value));
    ok(r, format)
}

fn run_extend(a: &ExtendArgs, format: Format) -> Run {
    no_csv(format)?;
    let ext = match (&a.table, &a.gen) {
        (Some(path), _) => TiledExtension::from_table(a.p, a.k, Table::from_path(path)?)?,
        (None, Some(spec)) => TiledExtension::from_generator(a.p, a.k, spec.build(a.k)?)?,
        (None, None) => return Err(Error::Parameter("one of --table or --gen is required".into())),
    };
    let values = a.at.iter().map(|&x| ext.extend(x)).collect::<Result<Vec<f64>, Error>>()?;
    let defect = continuity_defect(&ext)?;
    let mut r = Record::new("extend");
    r.set("p", json!(a.p)).set("k", json!(a.k)).set("at", json!(a.at)).set("value", json!(values));
    r.set(
        "verdict",
        json!(match defect {
            Some(d) if d < a.continuity_tol => "continuous",
            Some(_) => "discontinuous",
            None => "indeterminate",
        }),
    );
    if let Some(d) = defect {
        r.residual("continuity_defect", d);
    }
    ok(r, format)
}

enum JensenFn {
    Affine(f64, f64),
    Square,
    Exp,
}

impl FromStr for JensenFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "square" => Ok(JensenFn::Square),
            "exp" => Ok(JensenFn::Exp),
            _ => {
                let body = s
                    .strip_prefix("affine:")
                    .ok_or_else(|| Error::Parameter(format!("unknown jensen function `{s}`")))?;
                let (mut a, mut b) = (None, None);
                for kv in body.split(',') {
                    let (k, v) =
                        kv.split_once('=').ok_or_else(|| Error::Parameter(format!("expected key=value, got `{kv}`")))?;
                    let v: f64 = v.parse().map_err(|_| Error::Parameter(format!("`{v}` is not a number")))?;
                    match k {
                        "a" => a = Some(v),
                        "b" => b = Some(v),
                        _ => return Err(Error::Parameter(format!("unknown key `{k}`"))),
                    }
                }
                match (a, b) {
                    (Some(a), Some(b)) => Ok(JensenFn::Affine(a, b)),
                    _ => Err(Error::Parameter("affine needs a= and b=".into())),
                }
            }
        }
    }
}

impl JensenFn {
    fn eval(&self, s: f64) -> f64 {
        match self {
            JensenFn::Affine(a, b) => a * s + b,
            JensenFn::Square => s * s,
            JensenFn::Exp => s.exp(),
        }
    }
}

fn generator(spec: &Option<GeneratorSpec>, k: usize) -> std::result::Result<Generator<f64>, Error> {
    match spec {
        Some(s) => s.build(k),
        None => GeneratorSpec::Canonical { c: 1.0, k }.build(k),
    }
}

fn witness_json(w: &Option<Vec<f64>>) -> Value {
    w.as_ref().map_or(Value::Null, |v| json!(v))
}

fn run_check(a: &CheckArgs, format: Format) -> Run {
    no_csv(format)?;
    let mut r = Record::new("check");
    r.set("suite", json!(a.suite.to_possible_value().unwrap().get_name()))
        .set("seed", json!(a.seed))
        .set("samples", json!(a.samples));
    let stream = SampleStream::new(a.seed);
    match a.suite {
        Suite::MeanProps => {
            let domain = a.domain.unwrap_or(match a.mean {
                MeanKind::Extended => Domain::Positive,
                _ => Domain::AboveOne,
            });
            let mean = a.mean.build::<f64>();
            let rep = probe_mean_properties(&*mean, domain, a.k, a.samples, a.seed);
            r.set("mean", json!(mean.name()))
                .set("domain", json!(domain.name()))
                .set("value", json!(rep.max_bounds_violation))
                .set("failed_evaluations", json!(rep.failed_evaluations))
                .set("bounds_violations", json!(rep.bounds_violations))
                .set("strictness_checked", json!(rep.strictness_checked))
                .set("strictness_counterexample", witness_json(&rep.strictness_counterexample));
            r.residual("max_bounds_violation", rep.max_bounds_violation)
                .residual("max_reflexivity", rep.max_reflexivity_residual)
                .residual("max_symmetry", rep.max_symmetry_residual)
                .residual("worst_homogeneity", rep.worst_homogeneity_residual)
                .residual("worst_translativity", rep.worst_translativity_residual);
            let pass = rep.is_strict_mean(a.tol.unwrap_or(1e-12));
            verdict(r, pass, format)
        }
        Suite::Reflexivity => {
            let f = generator(&a.gen, a.k)?;
            let tol = a.tol.unwrap_or(1e-12);
            let mut cur = stream.cursor(0);
            let (mut worst, mut at) = (0.0f64, f64::NAN);
            for _ in 0..a.samples {
                let t = cur.log_uniform(1e-6, 1e6);
                let x = match f.domain() {
                    Domain::UnitInterval => 1.0 / (1.0 + t),
                    _ => 1.0 + t,
                };
                let res = relative_reflexivity_residual(&f, x, a.k)?.abs();
                if !(res <= worst) {
                    worst = res;
                    at = x;
                }
            }
            r.set("generator", json!(f.label())).set("value", json!(worst)).set("worst_at", json!(at));
            r.residual("max_relative", worst);
            verdict(r, worst < tol, format)
        }
        Suite::Equality => {
            let f = generator(&a.gen, a.k)?;
            let g = match &a.gen2 {
                Some(s) => s.build(a.k)?,
                None => return Err(Error::Parameter("equality needs --gen2".into())),
            };
            let rep = quotient_equal(&f, &g, a.k, a.samples, a.seed, a.tol.unwrap_or(1e-12))?;
            r.set("generator", json!(f.label()))
                .set("generator2", json!(g.label()))
                .set("value", json!(rep.max_residual))
                .set("equal", json!(rep.equal))
                .set("witness", witness_json(&rep.witness))
                .set("proportionality", json!(rep.proportionality))
                .set("evaluated", json!(rep.evaluated));
            r.residual("max_relative", rep.max_residual);
            verdict(r, rep.equal, format)
        }
        Suite::Krull => {
            let f = generator(&a.gen, a.k)?;
            let h = h_transform(&f)?;
            let (lo, hi) = (a.lo.unwrap_or(-5.0), a.hi.unwrap_or(5.0));
            let mut cur = stream.cursor(0);
            let (mut worst, mut at) = (0.0f64, f64::NAN);
            for _ in 0..a.samples {
                let tau = cur.uniform(lo, hi);
                let res = krull_residual(&h, tau, a.k)?;
                if !(res.abs() <= worst.abs()) {
                    worst = res;
                    at = tau;
                }
            }
            r.set("generator", json!(f.label())).set("value", json!(worst)).set("worst_at", json!(at));
            r.residual("max_abs", worst.abs());
            verdict(r, worst.abs() < a.tol.unwrap_or(1e-12), format)
        }
        Suite::Concavity => {
            let f = generator(&a.gen, a.k)?;
            let h = h_transform(&f)?;
            let rep = concavity_probe(&h, a.lo.unwrap_or(-3.0), a.hi.unwrap_or(3.0), a.samples, a.delta)?;
            let want = match a.expect {
                Expect::Concave => Curvature::Concave,
                Expect::Convex => Curvature::Convex,
            };
            r.set("generator", json!(f.label()))
                .set("curvature", json!(rep.verdict))
                .set("value", json!(rep.worst_second_difference()));
            r.residual("min_second_difference", rep.min_second_difference)
                .residual("max_second_difference", rep.max_second_difference);
            verdict(r, rep.verdict == want, format)
        }
        Suite::Phi => {
            let f = generator(&a.gen, a.k)?;
            let probe = phi_probe(&f, a.c, a.window, a.samples.max(10))?;
            let max = probe.samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
            r.set("generator", json!(f.label())).set("c", json!(a.c)).set("value", json!(probe.tail));
            r.residual("max_abs_phi", max).residual("last_phi", probe.samples.last().unwrap().1);
            verdict(r, probe.bounded, format)
        }
        Suite::Jensen => {
            let h: JensenFn = a.h.parse()?;
            let (lo, hi) = (a.lo.unwrap_or(-5.0), a.hi.unwrap_or(5.0));
            let mut cur = stream.cursor(0);
            let mut worst = 0.0f64;
            for _ in 0..a.samples {
                let k = 2 + cur.below(5) as usize;
                let pts: Vec<f64> = (0..k).map(|_| cur.uniform(lo, hi)).collect();
                let res = jensen_residual(&|s| h.eval(s), &pts)?;
                if !(res.abs() <= worst.abs()) {
                    worst = res;
                }
            }
            r.set("h", json!(a.h)).set("value", json!(worst));
            r.residual("max_abs", worst.abs());
            verdict(r, worst.abs() < a.tol.unwrap_or(1e-12), format)
        }
    }
}

fn run_iterate(a: &IterateArgs, format: Format) -> Run {
    let m1 = a.m1.build::<f64>();
    let m2 = a.m2.build::<f64>();
    let reference = a.reference.build::<f64>();
    let opts = IterationOptions { tol: a.tol, max_iter: a.max_iter, relative_gap: a.relative_gap };
    let trace = iterate_pair(&*m1, &*m2, a.start, &opts, &*reference)?;
    let csv = trace.to_csv();
    if let Some(path) = &a.trace {
        std::fs::write(path, &csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let code = if trace.error.is_some() { EXIT_EVAL } else { EXIT_OK };
    if format == Format::Csv {
        return Ok(Outcome { text: csv, code });
    }
    let last = trace.steps.last().unwrap();
    let mut r = Record::new("iterate");
    r.set("m1", json!(m1.name()))
        .set("m2", json!(m2.name()))
        .set("reference", json!(reference.name()))
        .set("start", json!([a.start.0, a.start.1]))
        .set("value", json!(trace.limit))
        .set("iterations", json!(trace.iterations_used))
        .set("gap_increases", json!(trace.gap_increases))
        .set("error", json!(trace.error))
        .set(
            "verdict",
            json!(match (&trace.error, trace.limit) {
                (Some(_), _) => "error",
                (None, Some(_)) => "converged",
                (None, None) => "not-converged",
            }),
        );
    r.residual("final_gap", last.gap).residual("max_abs_invariance", trace.max_abs_invariance_residual());
    if let Some(s1) = trace.steps.get(1) {
        r.residual("step1_invariance", s1.invariance_residual);
    }
    Ok(Outcome { text: render(r, format), code })
}

fn dispatch(cli: &Cli) -> Run {
    match &cli.command {
        Command::Eval(a) => run_eval(a, cli.format),
        Command::Quotient(a) => run_quotient(a, cli.format),
        Command::Extend(a) => run_extend(a, cli.format),
        Command::Check(a) => run_check(a, cli.format),
        Command::Iterate(a) => run_iterate(a, cli.format),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                let _ = write!(err, "\n{}\n", Cli::command().render_usage());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
