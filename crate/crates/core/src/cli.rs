//! The `care` command line. Stdout carries only the requested artifact;
//! diagnostics go to stderr. Exit codes: 0 success, 1 property violation,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::care_co::analyze_care_co;
use crate::care_no::{self, CareNoOutput, NoMode};
use crate::flow;
use crate::harness::{self, GeneratorParams, MechanismKind, Property, Sweep, SweepAxis};
use crate::model::{self, rational_to_string, Instance, Outcome};
use crate::oracle;
use crate::pea;
use crate::rng;

#[derive(Debug, Parser)]
#[command(
    name = "care",
    version,
    about = "Budget-feasible incentive mechanisms for multi-requester federated learning"
)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run CARE-CO or CARE-NO on an instance and print the outcome as JSON.
    Run(RunArgs),
    /// Generate a synthetic instance from generator parameters.
    Gen(GenArgs),
    /// Exact optimum by enumeration (small instances only).
    Oracle(OracleArgs),
    /// Check a property on seeded random instances; exits 1 on a counterexample.
    Verify(VerifyArgs),
    /// Run a parameter sweep comparing all mechanisms.
    Bench(BenchArgs),
    /// Dump PEA's per-price table and payment candidate sets.
    PeaTrace(PeaTraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Setting {
    /// Cooperative: one pooled budget.
    Co,
    /// Non-cooperative: per-requester budgets.
    No,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub mode: Setting,
    /// Instance JSON file.
    #[arg(long, value_name = "FILE")]
    pub instance: PathBuf,
    /// Write the outcome here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Seed for CARE-NO's bucket draw (defaults to the instance seed).
    #[arg(long, conflicts_with = "expectation")]
    pub seed: Option<u64>,
    /// CARE-NO: report every bucket and the expected reputation.
    #[arg(long)]
    pub expectation: bool,
    /// Debug: write the assignment network of the chosen workers as DOT.
    #[arg(long, value_name = "FILE", conflicts_with = "expectation")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator parameters (JSON); omitted fields take defaults.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_name = "FILE")]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub setting: Setting,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// ir | budget | truthful | approx | lemmas
    #[arg(long)]
    pub property: Property,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// requesters | groups
    #[arg(long)]
    pub sweep: SweepAxis,
    /// Seeds per sweep point.
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated sweep values (default 2..12 step 2 for requesters,
    /// 4..24 step 4 for groups).
    #[arg(long, value_delimiter = ',')]
    pub points: Vec<usize>,
    /// Comma-separated subset of care-co, care-no, ranpri, rrafl-ext.
    #[arg(long, value_delimiter = ',')]
    pub mechanisms: Vec<MechanismKind>,
    /// Generator parameters (JSON).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// CSV report.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Full report, including failures, as JSON.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeaTraceArgs {
    #[arg(long, value_name = "FILE")]
    pub instance: PathBuf,
    /// Restrict to these worker ids (comma-separated); default all.
    #[arg(long, value_delimiter = ',')]
    pub workers: Vec<u32>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::input(format!("io: {}", e))
    }
}

type CliResult = Result<i32, CliError>;

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    let inst = model::parse_instance(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    for v in model::validate(&inst) {
        log::warn!(
            "instance: {}",
            serde_json::to_string(&v).unwrap_or_else(|_| v.code().into())
        );
    }
    Ok(inst)
}

fn read_params(path: Option<&Path>) -> Result<GeneratorParams, CliError> {
    let Some(path) = path else {
        return Ok(GeneratorParams::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, text: &str) -> Result<(), CliError> {
    match target {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn opt_money(m: &Option<model::Money>) -> Value {
    m.as_ref().map_or(Value::Null, |m| Value::String(m.to_string()))
}

fn opt_rational(r: &Option<model::Rational>) -> Value {
    r.as_ref().map_or(Value::Null, |r| Value::String(rational_to_string(r)))
}

fn outcome_json(o: &Outcome) -> Value {
    let payments: Vec<Value> = o
        .payments
        .iter()
        .map(|(w, p)| json!({"worker": w.0, "requester": p.requester.0, "amount": p.amount.to_string()}))
        .collect();
    json!({
        "winners": o.winners().iter().map(|w| w.0).collect::<Vec<_>>(),
        "payments": payments,
        "total_reputation": rational_to_string(&o.total_reputation),
        "total_paid": o.total_paid().to_string(),
        "unit_price": opt_rational(&o.diagnostics.unit_price),
        "key_worker": o.diagnostics.key_worker.map(|w| w.0),
        "critical_price": opt_money(&o.diagnostics.critical_price),
        "bucket": o.diagnostics.bucket,
        "flags": o.diagnostics.flags,
    })
}

fn run(args: &RunArgs, out: &mut dyn Write) -> CliResult {
    let inst = read_instance(&args.instance)?;
    if args.mode == Setting::Co && (args.seed.is_some() || args.expectation) {
        return Err(CliError::input("--seed and --expectation apply to --mode no only"));
    }
    let (doc, dot) = match args.mode {
        Setting::Co => {
            let r = analyze_care_co(&inst);
            let mut doc = outcome_json(&r.outcome);
            doc["mechanism"] = json!("care-co");
            let prefix = &r.order.as_slice()[..r.key];
            let net = flow::build_assignment_network(&inst, prefix, &flow::unbounded_caps(&inst));
            (doc, net.to_dot())
        }
        Setting::No if args.expectation => {
            let CareNoOutput::Expectation(d) = care_no::run_care_no(&inst, NoMode::Expectation) else {
                unreachable!("expectation mode requested")
            };
            let doc = json!({
                "mechanism": "care-no",
                "gamma": d.gamma,
                "expected_reputation": rational_to_string(&d.expected_reputation),
                "per_bucket": d.per_bucket.iter().map(outcome_json).collect::<Vec<_>>(),
            });
            (doc, String::new())
        }
        Setting::No => {
            let seed = args.seed.unwrap_or(inst.seed());
            let CareNoOutput::Sampled { gamma, bucket, outcome } =
                care_no::run_care_no(&inst, NoMode::Sampled { seed })
            else {
                unreachable!("sampled mode requested")
            };
            let mut doc = outcome_json(&outcome);
            doc["mechanism"] = json!("care-no");
            doc["gamma"] = json!(gamma);
            doc["seed"] = json!(seed);
            let members = &care_no::partition_buckets(&inst).buckets[bucket - 1];
            let net = match &outcome.diagnostics.critical_price {
                Some(r) => flow::build_assignment_network(
                    &inst,
                    &pea::available_workers(&inst, members, r),
                    &pea::requester_caps(r, &inst.budgets()),
                ),
                None => flow::build_assignment_network(&inst, &[], &vec![0; inst.m()]),
            };
            (doc, net.to_dot())
        }
    };
    if let Some(p) = &args.dot {
        fs::write(p, dot)?;
    }
    emit(out, args.out.as_deref(), &pretty(&doc))?;
    Ok(0)
}

fn gen(args: &GenArgs, out: &mut dyn Write) -> CliResult {
    let params = read_params(args.params.as_deref())?;
    let inst = harness::generate_instance(&params, args.seed).map_err(|e| CliError::input(e.to_string()))?;
    let mut text = model::serialize_instance(&inst);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(out, args.out.as_deref(), &text)?;
    Ok(0)
}

fn oracle_cmd(args: &OracleArgs, out: &mut dyn Write) -> CliResult {
    let inst = read_instance(&args.instance)?;
    let (label, result) = match args.setting {
        Setting::Co => ("co", oracle::opt_cooperative(&inst)),
        Setting::No => ("no", oracle::opt_noncooperative(&inst)),
    };
    let opt = result.map_err(|e| CliError::input(e.to_string()))?;
    let assignment: Vec<Value> = opt
        .assignment
        .iter()
        .map(|(w, r)| json!({"worker": w.0, "requester": r.0}))
        .collect();
    let doc = json!({
        "setting": label,
        "value": rational_to_string(&opt.value),
        "assignment": assignment,
        "cost_paid": opt.cost_paid.to_string(),
    });
    emit(out, None, &pretty(&doc))?;
    Ok(0)
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    let report = harness::verify(args.property, args.trials, args.seed);
    eprintln!(
        "{}: {} trials, {} checked, {} skipped, {} counterexamples",
        report.property,
        report.trials,
        report.checked,
        report.skipped,
        report.counterexamples.len()
    );
    match report.counterexamples.first() {
        None => Ok(0),
        Some(c) => {
            eprintln!("counterexample at trial {} (seed {}):", c.trial, c.seed);
            for d in &c.details {
                eprintln!("  {}", d);
            }
            let mut text = model::serialize_instance(&c.instance);
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit(out, None, &text)?;
            Ok(1)
        }
    }
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult {
    let params = read_params(args.params.as_deref())?;
    let mut sweep = Sweep::default_for(args.sweep);
    if !args.points.is_empty() {
        sweep.points = args.points.clone();
    }
    let mechanisms = if args.mechanisms.is_empty() {
        MechanismKind::ALL.to_vec()
    } else {
        args.mechanisms.clone()
    };
    let seeds: Vec<u64> = (0..args.trials)
        .map(|k| rng::derive(args.seed, rng::STREAM_TRIALS, k))
        .collect();
    let report = harness::run_experiment(&sweep, &params, &seeds, &mechanisms);
    report
        .write_csv(fs::File::create(&args.out)?)
        .map_err(|e| CliError::input(e.to_string()))?;
    if let Some(p) = &args.json {
        fs::write(p, pretty(&serde_json::to_value(&report).expect("report serializes")))?;
    }
    for f in &report.failures {
        eprintln!(
            "failure at {}={} seed {}: {}",
            sweep.axis.label(),
            f.value,
            f.seed,
            f.message
        );
    }
    // runtimes stay in the files; stdout is reproducible
    let mut text = format!("{:<10} {:>6}", sweep.axis.label(), "trials");
    for m in &mechanisms {
        text.push_str(&format!(" {:>12}", m.label()));
    }
    text.push('\n');
    let summary = harness::summarize(&report);
    for &value in &sweep.points {
        let row: Vec<_> = summary.iter().filter(|s| s.value == value).collect();
        let trials = row.first().map_or(0, |s| s.trials);
        text.push_str(&format!("{:<10} {:>6}", value, trials));
        for m in &mechanisms {
            match row.iter().find(|s| s.mechanism == *m) {
                Some(s) => {
                    let v = model::Money::from_rational(s.mean_reputation.clone())
                        .map(|m| m.to_f64())
                        .unwrap_or(f64::NAN);
                    text.push_str(&format!(" {:>12.4}", v));
                }
                None => text.push_str(&format!(" {:>12}", "-")),
            }
        }
        text.push('\n');
    }
    emit(out, None, &text)?;
    Ok(if report.failures.is_empty() { 0 } else { 1 })
}

fn pea_trace(args: &PeaTraceArgs, out: &mut dyn Write) -> CliResult {
    let inst = read_instance(&args.instance)?;
    let workers: Vec<usize> = if args.workers.is_empty() {
        (0..inst.n()).collect()
    } else {
        let mut ws = Vec::new();
        for &id in &args.workers {
            if id == 0 || id as usize > inst.n() {
                return Err(CliError::input(format!("unknown worker {}", id)));
            }
            ws.push(id as usize - 1);
        }
        ws
    };
    let run = pea::analyze_pea(&inst, &workers, true);
    let t = &run.trace;
    let table: Vec<Value> = t
        .records
        .iter()
        .map(|r| json!({"r": r.price.to_string(), "E": r.employability, "M_f": r.max_selected}))
        .collect();
    let sets: serde_json::Map<String, Value> = t
        .candidate_sets
        .iter()
        .map(|(w, set)| {
            (
                w.0.to_string(),
                serde_json::to_value(set).expect("candidates serialize"),
            )
        })
        .collect();
    let doc = json!({
        "table": table,
        "critical_price": opt_money(&t.critical_price),
        "critical_lower": opt_money(&t.critical_lower),
        "critical_higher": opt_money(&t.critical_higher),
        "last_affordable": t.last_affordable.map(|w| w.0),
        "candidate_sets": sets,
        "outcome": outcome_json(&run.outcome),
    });
    emit(out, None, &pretty(&doc))?;
    Ok(0)
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("CARE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` and runs the subcommand, writing the artifact to `out`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {}", e);
        }
    }
    let result = match &cli.command {
        Command::Run(a) => run(a, out),
        Command::Gen(a) => gen(a, out),
        Command::Oracle(a) => oracle_cmd(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Bench(a) => bench(a, out),
        Command::PeaTrace(a) => pea_trace(a, out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    run_with(std::env::args_os(), &mut lock)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run_with(std::iter::once("care").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(call(&["run", "--bogus"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
    }

    #[test]
    fn seed_and_expectation_conflict() {
        assert_eq!(
            call(&["run", "--mode", "no", "--instance", "x", "--seed", "1", "--expectation"]).0,
            2
        );
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(call(&["verify", "--help"]).0, 0);
    }

    #[test]
    fn missing_instance_is_an_input_error() {
        assert_eq!(call(&["run", "--mode", "co", "--instance", "/nonexistent/x.json"]).0, 2);
    }

    #[test]
    fn verify_ir_passes() {
        assert_eq!(
            call(&["verify", "--property", "ir", "--trials", "10", "--seed", "7"]),
            (0, String::new())
        );
    }
}
