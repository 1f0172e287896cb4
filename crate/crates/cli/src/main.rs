//! `wfomc-bounds`: anytime bounds on weighted first-order model counts.
//!
//! Exit status: 0 ok, 2 queue exhausted (bounds still valid), 3 confidence
//! budget exhausted, 4 resource limit or cap refusal, 64 usage, 65 input.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use wfomc_bounds::cardenc::{encode_box, CardinalityBox, Interval, VarAllocator};
use wfomc_bounds::encoders::{encode_mln, encode_problog, parse_mln, parse_problog, MlnOptions};
use wfomc_bounds::engine::{
    conditional_bounds, decompose_exact, max_oracle_calls, term_count, AnytimeSearch, BoundsReport, EngineConfig,
    EngineError, Termination,
};
use wfomc_bounds::fol::{ground_with, parse_model, GroundConfig, Literal, Sentence};
use wfomc_bounds::oracle::{
    count_projected, read_dimacs, write_dimacs, CountRequest, CounterLimits, DeltaSchedule, FomcOracle, OracleConfig,
    OracleError,
};
use wfomc_bounds::rational::{exact_string, format_decimal, parse_rational};

const EXIT_QUEUE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "wfomc-bounds", version, about = "Anytime bounds on symmetric weighted first-order model counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the anytime bounds search.
    Solve(SolveArgs),
    /// Exact weighted count as a sum over per-predicate true-grounding counts.
    Decompose(DecomposeArgs),
    /// Write the grounding (optionally with a cardinality box) as DIMACS.
    Ground(GroundArgs),
    /// Exact projected model count of a DIMACS file; prints `s mc <count>`.
    Count(CountArgs),
    /// Translate an MLN or ProbLog file to the native model format.
    Encode(EncodeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Native,
    Mln,
    Problog,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Exact,
    External,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Schedule {
    Uniform,
    Harmonic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Human,
    Structured,
}

#[derive(Args, Debug)]
struct InputArgs {
    input: PathBuf,
    /// Input format; guessed from the extension when omitted (.mln, .pl).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Domain size; overrides a `domain` line in native files.
    #[arg(short = 'd', long)]
    domain_size: Option<u32>,
    /// Cap on generated ground clauses.
    #[arg(long, env = "WFOMC_MAX_CLAUSES", default_value_t = 5_000_000)]
    max_clauses: usize,
    /// Significant digits for MLN `e^w` conversion.
    #[arg(long, default_value_t = 12)]
    precision: usize,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum, default_value_t = OracleKind::Exact)]
    oracle: OracleKind,
    /// Tolerance of the external counter.
    #[arg(long)]
    epsilon: Option<String>,
    /// Total confidence budget of the external counter.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, value_enum, default_value_t = Schedule::Uniform)]
    schedule: Schedule,
    /// External counter executable.
    #[arg(long, env = "WFOMC_COUNTER")]
    counter: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-call time limit in milliseconds.
    #[arg(long, env = "WFOMC_TIMEOUT_MS")]
    timeout_ms: Option<u64>,
    /// Branching limit of the exact counter per call.
    #[arg(long, env = "WFOMC_MAX_DECISIONS")]
    max_decisions: Option<u64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Stop once ub < lb * (1 + tau).
    #[arg(long, default_value = "0.01")]
    tau: String,
    #[arg(long, value_enum, default_value_t = Output::Human)]
    output: Output,
    /// Write progress records as JSON lines to this file (`-` for stdout).
    #[arg(long)]
    progress: Option<PathBuf>,
    /// Stop after this many splits.
    #[arg(long, env = "WFOMC_MAX_SPLITS")]
    max_splits: Option<u64>,
    /// Also bound the probability of each `query(...)` of a ProbLog program.
    #[arg(long)]
    queries: bool,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Refuse when the number of terms exceeds this.
    #[arg(long, env = "WFOMC_MAX_TERMS", default_value = "100000")]
    max_terms: String,
    #[arg(long, value_enum, default_value_t = Output::Human)]
    output: Output,
}

#[derive(Args, Debug)]
struct GroundArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Cardinality box, e.g. `Heads=0..3,Tails=4..6`.
    #[arg(long = "box")]
    bbox: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountArgs {
    cnf: PathBuf,
    /// Accepted for compatibility with approximate counters; ignored.
    #[arg(long)]
    seed: Option<u64>,
    /// Accepted for compatibility with approximate counters; ignored.
    #[arg(long)]
    epsilon: Option<String>,
    /// Accepted for compatibility with approximate counters; ignored.
    #[arg(long)]
    delta: Option<String>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Input(anyhow::Error),
    Limit(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Decompose(a) => decompose(a),
        Command::Ground(a) => ground_cmd(a),
        Command::Count(a) => count_cmd(a),
        Command::Encode(a) => encode_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Limit(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_LIMIT)
        }
    }
}

struct Loaded {
    sentence: Sentence,
    domain: u32,
    queries: Vec<(String, Literal)>,
    conversions: Vec<Value>,
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("mln") => Format::Mln,
        Some("pl") | Some("problog") => Format::Problog,
        _ => Format::Native,
    }
}

fn load(args: &InputArgs) -> CliResult<Loaded> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let name = args.input.display();
    let format = args.format.unwrap_or_else(|| guess_format(&args.input));
    let (sentence, file_domain, queries, conversions) = match format {
        Format::Native => {
            let m = parse_model(&text).map_err(|e| anyhow!("{name}:{e}"))?;
            (m.sentence, m.domain, Vec::new(), Vec::new())
        }
        Format::Mln => {
            let prog = parse_mln(&text).map_err(|e| anyhow!("{name}:{e}"))?;
            let options = MlnOptions {
                precision: args.precision,
                ..MlnOptions::default()
            };
            let enc = encode_mln(&prog, &options).map_err(|e| anyhow!("{name}: {e}"))?;
            let mut conv = Vec::new();
            for (i, r) in enc.rules.iter().enumerate() {
                if let (Some(f), Some(err)) = (&r.factor, r.approximation_error) {
                    conv.push(json!({
                        "rule": i + 1,
                        "line": prog.rules[i].line,
                        "factor": format_decimal(f, args.precision),
                        "abs_error": err,
                    }));
                }
            }
            (enc.sentence, None, Vec::new(), conv)
        }
        Format::Problog => {
            let prog = parse_problog(&text).map_err(|e| anyhow!("{name}:{e}"))?;
            let enc = encode_problog(&prog).map_err(|e| anyhow!("{name}: {e}"))?;
            let queries = enc
                .queries
                .iter()
                .map(|q| (enc.sentence.display_literal(q), q.clone()))
                .collect();
            (enc.sentence, None, queries, Vec::new())
        }
    };
    let domain = args
        .domain_size
        .or(file_domain)
        .ok_or_else(|| Failure::Usage("domain size needed: pass --domain-size".into()))?;
    if domain == 0 {
        return Err(Failure::Usage("domain size must be at least 1".into()));
    }
    for (_, q) in &queries {
        for t in &q.args {
            if let wfomc_bounds::fol::Term::Const(c) = t {
                if *c > domain {
                    return Err(Failure::Input(anyhow!("query constant {c} outside domain 1..{domain}")));
                }
            }
        }
    }
    Ok(Loaded {
        sentence,
        domain,
        queries,
        conversions,
    })
}

fn rational_arg(name: &str, text: &str) -> CliResult<BigRational> {
    parse_rational(text).ok_or_else(|| Failure::Usage(format!("--{name}: not a number: {text}")))
}

fn oracle_config(a: &OracleArgs) -> CliResult<OracleConfig> {
    let mut config = match a.oracle {
        OracleKind::Exact => {
            if a.epsilon.is_some() || a.delta.is_some() {
                return Err(Failure::Usage("--epsilon/--delta apply to --oracle external".into()));
            }
            OracleConfig::exact()
        }
        OracleKind::External => {
            let eps = rational_arg("epsilon", a.epsilon.as_deref().unwrap_or("0.8"))?;
            let delta = rational_arg("delta", a.delta.as_deref().unwrap_or("0.2"))?;
            let path = a
                .counter
                .clone()
                .ok_or_else(|| Failure::Usage("--oracle external needs --counter".into()))?;
            let schedule = match a.schedule {
                Schedule::Uniform => DeltaSchedule::Uniform,
                Schedule::Harmonic => DeltaSchedule::Harmonic,
            };
            OracleConfig::external(path, eps, delta, schedule)
        }
    };
    config.seed = a.seed;
    config.timeout = a.timeout_ms.map(Duration::from_millis);
    config.max_decisions = a.max_decisions;
    config.validate().map_err(Failure::Usage)?;
    Ok(config)
}

fn ground_config(args: &InputArgs) -> GroundConfig {
    GroundConfig {
        max_clauses: args.max_clauses,
        ..GroundConfig::default()
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Ground(g) => Failure::Limit(anyhow!(g)),
        EngineError::Oracle(OracleError::InvalidInstance(m)) => Failure::Input(anyhow!(m)),
        EngineError::Oracle(o) => Failure::Limit(anyhow!(o)),
        EngineError::TermCap { .. } => Failure::Limit(anyhow!(e)),
        EngineError::InvalidTolerance => Failure::Usage(e.to_string()),
    }
}

fn exit_for(t: Termination) -> u8 {
    match t {
        Termination::ToleranceMet => 0,
        Termination::QueueExhausted => EXIT_QUEUE,
        Termination::BudgetExhausted => EXIT_BUDGET,
        Termination::ResourceLimit => EXIT_LIMIT,
    }
}

fn dec(r: &BigRational) -> String {
    format_decimal(r, 12)
}

fn report_json(r: &BoundsReport) -> Value {
    json!({
        "lb": dec(&r.lb),
        "ub": dec(&r.ub),
        "lb_exact": exact_string(&r.lb),
        "ub_exact": exact_string(&r.ub),
        "ratio": r.ratio.as_ref().map(dec),
        "pac_lb": dec(&r.pac_lb),
        "pac_ub": dec(&r.pac_ub),
        "pac_lb_exact": exact_string(&r.pac_lb),
        "pac_ub_exact": exact_string(&r.pac_ub),
        "epsilon": r.epsilon.as_ref().map(dec),
        "oracle_calls": r.oracle_calls,
        "splits": r.splits,
        "delta_consumed": r.delta_consumed.as_ref().map(dec),
        "terminated_by": r.terminated_by.as_str(),
        "detail": r.detail,
    })
}

fn run_search(
    sentence: &Sentence,
    d: u32,
    oracle: Box<dyn FomcOracle>,
    config: EngineConfig,
    progress: &mut Option<Box<dyn Write>>,
    label: Option<&str>,
) -> CliResult<BoundsReport> {
    let mut search = AnytimeSearch::new(sentence, d, oracle, config).map_err(engine_failure)?;
    let mut sink_error = None;
    let report = search.run_with(|rec| {
        if let Some(w) = progress.as_mut() {
            let mut v = serde_json::to_value(rec).expect("serializable");
            if let Some(l) = label {
                v["run"] = json!(l);
            }
            // One write per record keeps lines whole.
            let line = format!("{v}\n");
            if let Err(e) = w.write_all(line.as_bytes()).and_then(|_| w.flush()) {
                sink_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = sink_error {
        return Err(Failure::Input(anyhow!("writing progress: {e}")));
    }
    Ok(report)
}

fn solve(a: SolveArgs) -> CliResult<u8> {
    let loaded = load(&a.input)?;
    let tau = rational_arg("tau", &a.tau)?;
    if tau <= BigRational::from_integer(0.into()) {
        return Err(Failure::Usage("--tau must be positive".into()));
    }
    let oracle_cfg = oracle_config(&a.oracle)?;
    let s = &loaded.sentence;
    let d = loaded.domain;
    let m_max = max_oracle_calls(s, d);
    let mut progress: Option<Box<dyn Write>> = match &a.progress {
        None => None,
        Some(p) if p.as_os_str() == "-" => Some(Box::new(io::stdout())),
        Some(p) => Some(Box::new(
            fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
    };
    let config = EngineConfig {
        tau: tau.clone(),
        ground: ground_config(&a.input),
        max_splits: a.max_splits,
    };
    let oracle = oracle_cfg.build(m_max.clone()).map_err(Failure::Usage)?;
    let report = run_search(s, d, oracle, config.clone(), &mut progress, None)?;
    let mut code = exit_for(report.terminated_by);

    let mut query_results = Vec::new();
    if a.queries {
        if loaded.queries.is_empty() {
            return Err(Failure::Usage("--queries needs a ProbLog program with query(...) lines".into()));
        }
        for (name, lit) in &loaded.queries {
            let mut conditioned = s.clone();
            conditioned
                .add_clause(wfomc_bounds::fol::Clause::new(vec![lit.clone()]))
                .map_err(|e| Failure::Input(anyhow!(e)))?;
            let oracle = oracle_cfg.build(m_max.clone()).map_err(Failure::Usage)?;
            let qr = run_search(&conditioned, d, oracle, config.clone(), &mut progress, Some(name))?;
            code = code.max(exit_for(qr.terminated_by));
            let (lo, hi) = conditional_bounds(&qr, &report);
            query_results.push((name.clone(), lo, hi, qr));
        }
    }

    let mut out = io::stdout().lock();
    let w = |out: &mut io::StdoutLock, s: String| out.write_all(s.as_bytes());
    let res = match a.output {
        Output::Structured => {
            let mut v = report_json(&report);
            v["command"] = json!("solve");
            v["domain_size"] = json!(d);
            v["tau"] = json!(dec(&tau));
            v["m_max"] = json!(m_max.to_string());
            if !loaded.conversions.is_empty() {
                v["weight_conversions"] = json!(loaded.conversions);
            }
            if !query_results.is_empty() {
                v["queries"] = Value::Array(
                    query_results
                        .iter()
                        .map(|(n, lo, hi, qr)| {
                            json!({"query": n, "p_lo": dec(lo), "p_hi": dec(hi),
                                   "p_lo_exact": exact_string(lo), "p_hi_exact": exact_string(hi),
                                   "run": report_json(qr)})
                        })
                        .collect(),
                );
            }
            w(&mut out, format!("{v}\n"))
        }
        Output::Human => {
            let mut text = String::new();
            text += &format!("lower bound     {}\n", dec(&report.lb));
            text += &format!("upper bound     {}\n", dec(&report.ub));
            text += &format!(
                "ratio           {}\n",
                report.ratio.as_ref().map(dec).unwrap_or_else(|| "inf".into())
            );
            if report.epsilon.is_some() {
                text += &format!("pac lower       {}\n", dec(&report.pac_lb));
                text += &format!("pac upper       {}\n", dec(&report.pac_ub));
            }
            text += &format!("oracle calls    {} (at most {m_max})\n", report.oracle_calls);
            if let Some(dc) = &report.delta_consumed {
                text += &format!("delta consumed  {}\n", dec(dc));
            }
            text += &format!("terminated by   {}\n", report.terminated_by.as_str());
            if let Some(detail) = &report.detail {
                text += &format!("detail          {detail}\n");
            }
            for c in &loaded.conversions {
                text += &format!(
                    "rule {} factor  {} (|error| {:.1e})\n",
                    c["rule"], c["factor"].as_str().unwrap_or(""), c["abs_error"].as_f64().unwrap_or(0.0)
                );
            }
            for (n, lo, hi, _) in &query_results {
                text += &format!("P({n})  in [{}, {}]\n", dec(lo), dec(hi));
            }
            w(&mut out, text)
        }
    };
    res.map_err(|e| Failure::Input(anyhow!(e)))?;
    Ok(code)
}

fn decompose(a: DecomposeArgs) -> CliResult<u8> {
    let loaded = load(&a.input)?;
    let cap: BigUint = a
        .max_terms
        .parse()
        .map_err(|_| Failure::Usage(format!("--max-terms: not an integer: {}", a.max_terms)))?;
    let s = &loaded.sentence;
    let d = loaded.domain;
    let terms = term_count(s, d);
    if terms > cap {
        return Err(Failure::Limit(anyhow!(
            "decomposition needs M = {terms} oracle calls, above the cap of {cap}"
        )));
    }
    let mut oracle = oracle_config(&a.oracle)?.build(terms.clone()).map_err(Failure::Usage)?;
    let result = decompose_exact(s, d, &mut oracle, &cap, &ground_config(&a.input)).map_err(engine_failure)?;
    let eps = oracle.epsilon();
    let mut out = io::stdout().lock();
    let text = match a.output {
        Output::Structured => {
            let mut v = json!({
                "command": "decompose",
                "domain_size": d,
                "value": dec(&result.value),
                "value_exact": exact_string(&result.value),
                "terms": result.terms.to_string(),
                "oracle_calls": result.oracle_calls,
            });
            if let Some(e) = &eps {
                let (lo, hi) = wfomc_bounds::engine::pac_adjust(&result.value, &result.value, e);
                v["pac_lb"] = json!(dec(&lo));
                v["pac_ub"] = json!(dec(&hi));
                v["delta_consumed"] = json!(oracle.delta_consumed().as_ref().map(dec));
            }
            format!("{v}\n")
        }
        Output::Human => {
            let mut t = format!(
                "value           {}\nexact           {}\noracle calls    {}\n",
                dec(&result.value),
                exact_string(&result.value),
                result.oracle_calls
            );
            if let Some(e) = &eps {
                let (lo, hi) = wfomc_bounds::engine::pac_adjust(&result.value, &result.value, e);
                t += &format!("pac interval    [{}, {}]\n", dec(&lo), dec(&hi));
            }
            t
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| Failure::Input(anyhow!(e)))?;
    Ok(0)
}

fn parse_box(text: &str, s: &Sentence, d: u32) -> CliResult<CardinalityBox> {
    let mut bounds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Failure::Usage(format!("--box: expected NAME=LO..HI, found '{part}'"));
        let (name, range) = part.split_once('=').ok_or_else(bad)?;
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        let id = s
            .find(name.trim())
            .ok_or_else(|| Failure::Usage(format!("--box: unknown predicate '{}'", name.trim())))?;
        let n = wfomc_bounds::fol::ground_count(s.predicate(id), d)
            .to_u64()
            .unwrap_or(u64::MAX);
        if lo > hi || hi > n {
            return Err(Failure::Usage(format!("--box: need 0 <= lo <= hi <= {n} for {}", name.trim())));
        }
        if bounds.iter().any(|(p, _)| *p == id) {
            return Err(Failure::Usage(format!("--box: '{}' given twice", name.trim())));
        }
        bounds.push((id, Interval::new(lo, hi)));
    }
    Ok(CardinalityBox::new(bounds))
}

fn ground_cmd(a: GroundArgs) -> CliResult<u8> {
    let loaded = load(&a.input)?;
    let s = &loaded.sentence;
    let gp = ground_with(s, loaded.domain, &ground_config(&a.input)).map_err(|e| Failure::Limit(anyhow!(e)))?;
    let bbox = match &a.bbox {
        Some(text) => parse_box(text, s, loaded.domain)?,
        None => CardinalityBox::new(Vec::new()),
    };
    let mut alloc = VarAllocator::after(gp.max_var());
    let enc = encode_box(&gp, &bbox, &mut alloc);
    let req = CountRequest {
        problem: &gp,
        extra_clauses: &enc.clauses,
        num_vars: alloc.max_var(),
        sampling_set: &gp.sampling_set,
    };
    let mut buf = Vec::new();
    write_dimacs(&req, &mut buf).map_err(|e| Failure::Input(anyhow!(e)))?;
    match &a.out {
        Some(p) => fs::write(p, &buf).with_context(|| format!("cannot write {}", p.display()))?,
        None => io::stdout().write_all(&buf).map_err(|e| Failure::Input(anyhow!(e)))?,
    }
    Ok(0)
}

fn count_cmd(a: CountArgs) -> CliResult<u8> {
    let text = fs::read_to_string(&a.cnf).with_context(|| format!("cannot read {}", a.cnf.display()))?;
    let inst = read_dimacs(&text).map_err(|e| Failure::Input(anyhow!("{}: {e}", a.cnf.display())))?;
    let sampling = inst.sampling_set.unwrap_or_else(|| (1..=inst.num_vars).collect());
    let count = count_projected(inst.num_vars, &inst.clauses, &sampling, &CounterLimits::default())
        .map_err(|e| Failure::Limit(anyhow!(e)))?;
    println!("s mc {count}");
    Ok(0)
}

fn encode_cmd(a: EncodeArgs) -> CliResult<u8> {
    let format = a.input.format.unwrap_or_else(|| guess_format(&a.input.input));
    if format == Format::Native {
        return Err(Failure::Usage("encode expects --format mln or --format problog".into()));
    }
    // Domain is optional here.
    let mut input = InputArgs { ..a.input };
    let domain = input.domain_size;
    if domain.is_none() {
        input.domain_size = Some(1);
    }
    let loaded = load(&input)?;
    let text = loaded.sentence.to_native(domain);
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}
