//! The `stategen` command line, callable in-process.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stategen_core::coverage::{measure_suite, measure_traces, Criterion};
use stategen_core::document::{parse_plain, render_plain, SuiteDocument};
use stategen_core::dsl::{emit_dot, format_testcase, parse_model, parse_scenarios};
use stategen_core::graph::{build_graph, transition_pairs, TransitionGraph};
use stategen_core::interp::{run_scenario, Trace, TraceEnd};
use stategen_core::minimize::{compute_nc, effective_set, setcover_reduce};
use stategen_core::model::{validate_statechart, Statechart};
use stategen_core::testgen::{
    embed_complete, fault_suite, k_transition_suite, prefix_suite, FaultSequence, TestSuite,
};

#[derive(Parser)]
#[command(
    name = "stategen",
    version,
    about = "Generate, measure and minimize test suites from statechart models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model for reachability problems.
    Validate { model: PathBuf },
    /// List states, transitions and transition pairs.
    Graph {
        model: PathBuf,
        /// Also write a Graphviz rendering.
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
    },
    /// Generate a test suite.
    Generate {
        model: PathBuf,
        #[arg(long)]
        method: Method,
        /// Sequence length for `ktrans`.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Extend each `ktrans` sequence to a complete one.
        #[arg(long)]
        embed: bool,
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
        /// Write plain `id = text` lines instead of a suite document.
        #[arg(long)]
        plain: bool,
    },
    /// Measure structural coverage of a suite or dynamic coverage of traces.
    Coverage {
        model: PathBuf,
        #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
        suite: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the report as JSON.
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
    },
    /// Reduce a suite.
    Minimize {
        model: PathBuf,
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        mode: Mode,
        /// Criteria preserved by `setcover`.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "state,transition,path,action"
        )]
        criteria: Vec<Criterion>,
        /// Print the covering set of every case.
        #[arg(long)]
        nc_table: bool,
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
        #[arg(long)]
        plain: bool,
    },
    /// Execute scenarios against the model.
    Run {
        model: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Print dynamic coverage of all traces.
        #[arg(long)]
        report: bool,
        /// Fail when an event is refused or execution errs.
        #[arg(long)]
        strict: bool,
        /// Write the traces as JSON.
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Prefix,
    Ktrans,
    Faults,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Subsumption,
    Setcover,
}

/// Bad input (unreadable or malformed files) exits 2; domain failures 1.
enum Failure {
    Input(anyhow::Error),
    Domain(anyhow::Error),
    /// A domain failure after partial output, which is still shown.
    Partial(String, anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Input)
}

fn load_model(path: &Path) -> Result<Statechart, Failure> {
    let text = read(path)?;
    parse_model(&text).map_err(|e| Failure::Input(anyhow!("{}:{e}", path.display())))
}

fn load_graph(sc: &Statechart) -> Result<TransitionGraph, Failure> {
    build_graph(sc).map_err(|e| Failure::Domain(e.into()))
}

/// Accepts a suite document or plain lines.
fn load_suite(path: &Path, g: &TransitionGraph) -> Result<TestSuite, Failure> {
    let text = read(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str::<SuiteDocument>(&text)
            .map_err(anyhow::Error::from)
            .and_then(|doc| doc.to_suite(g).map_err(Into::into))
    } else {
        parse_plain(&text, g).map_err(Into::into)
    };
    parsed.map_err(|e| Failure::Input(e.context(format!("cannot load suite {}", path.display()))))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Domain)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn save_suite(
    path: &Option<PathBuf>,
    plain: bool,
    model: &str,
    method: &str,
    suite: &TestSuite,
) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = if plain {
            render_plain(suite)
        } else {
            to_json(&SuiteDocument::from_suite(model, method, suite))
        };
        write(p, &text)?;
    }
    Ok(())
}

fn validate(model: &Path) -> Outcome {
    let sc = load_model(model)?;
    let report = validate_statechart(&sc);
    if report.is_valid() {
        return Ok(format!(
            "valid: {} states, {} transitions\n",
            sc.states.len(),
            sc.transitions.len()
        ));
    }
    let mut msg = String::from("invalid:");
    for issue in &report.issues {
        write!(msg, "\n  {issue}").unwrap();
    }
    Err(Failure::Domain(anyhow!(msg)))
}

fn graph(model: &Path, dot: &Option<PathBuf>) -> Outcome {
    let sc = load_model(model)?;
    let g = load_graph(&sc)?;
    let mut out = String::new();
    writeln!(out, "states ({}):", g.nodes.len()).unwrap();
    for (i, n) in g.nodes.iter().enumerate() {
        let mut tags = Vec::new();
        if i == g.initial {
            tags.push("initial");
        }
        if g.is_accepting(i) {
            tags.push("accepting");
        }
        if tags.is_empty() {
            writeln!(out, "  {n}").unwrap();
        } else {
            writeln!(out, "  {n} [{}]", tags.join(", ")).unwrap();
        }
    }
    writeln!(out, "transitions ({}):", g.edges.len()).unwrap();
    for e in &g.edges {
        writeln!(
            out,
            "  {}: {} -> {}",
            e.id, g.nodes[e.source], g.nodes[e.target]
        )
        .unwrap();
    }
    let pairs = transition_pairs(&g);
    writeln!(out, "transition pairs ({}):", pairs.len()).unwrap();
    for (a, b) in &pairs {
        writeln!(out, "  ({a}, {b})").unwrap();
    }
    if let Some(p) = dot {
        write(p, &emit_dot(&g))?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct FaultDocument<'a> {
    model: &'a str,
    method: &'a str,
    faults: Vec<FaultRecord<'a>>,
}

#[derive(Serialize)]
struct FaultRecord<'a> {
    #[serde(flatten)]
    fault: &'a FaultSequence,
    text: String,
}

fn fault_text(g: &TransitionGraph, fs: &FaultSequence) -> Result<String, Failure> {
    let start = stategen_core::TestCase::rebuild(g, &fs.id, &fs.start_seq, &g.nodes[g.initial])
        .map_err(|e| Failure::Domain(e.into()))?;
    let mut text = format!("{}-({})-!", format_testcase(&start), fs.fault.event);
    if fs.transient {
        text.push_str(" (transient)");
    }
    Ok(text)
}

fn generate(
    model: &Path,
    method: Method,
    k: usize,
    embed: bool,
    output: &Option<PathBuf>,
    plain: bool,
) -> Outcome {
    let sc = load_model(model)?;
    let g = load_graph(&sc)?;
    let (suite, label) = match method {
        Method::Prefix => (prefix_suite(&g), "prefix".to_string()),
        Method::Ktrans => {
            if k == 0 {
                return Err(Failure::Input(anyhow!("--k must be at least 1")));
            }
            let cases = k_transition_suite(&g, k);
            if embed {
                let embedded = cases
                    .iter()
                    .map(|c| embed_complete(c, &g))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::Domain(e.into()))?;
                (TestSuite::numbered(embedded), format!("ktrans k={k} embed"))
            } else {
                (TestSuite::numbered(cases), format!("ktrans k={k}"))
            }
        }
        Method::Faults => {
            let faults = fault_suite(&sc).map_err(|e| Failure::Domain(e.into()))?;
            let mut out = String::new();
            let mut records = Vec::new();
            for fs in &faults {
                let text = fault_text(&g, fs)?;
                writeln!(out, "{} = {text}", fs.id).unwrap();
                records.push(FaultRecord { fault: fs, text });
            }
            if let Some(p) = output {
                let body = if plain {
                    out.clone()
                } else {
                    to_json(&FaultDocument {
                        model: &g.name,
                        method: "faults",
                        faults: records,
                    })
                };
                write(p, &body)?;
            }
            return Ok(out);
        }
    };
    save_suite(output, plain, &g.name, &label, &suite)?;
    Ok(render_plain(&suite))
}

fn load_traces(path: &Path) -> Result<Vec<Trace>, Failure> {
    let text = read(path)?;
    let parsed: Result<Vec<Trace>, _> = serde_json::from_str::<Vec<Trace>>(&text)
        .or_else(|_| serde_json::from_str::<Trace>(&text).map(|t| vec![t]));
    parsed.map_err(|e| Failure::Input(anyhow!("cannot load traces {}: {e}", path.display())))
}

fn coverage(
    model: &Path,
    suite: &Option<PathBuf>,
    trace: &Option<PathBuf>,
    output: &Option<PathBuf>,
) -> Outcome {
    let sc = load_model(model)?;
    let report = match (suite, trace) {
        (Some(s), _) => {
            let g = load_graph(&sc)?;
            let suite = load_suite(s, &g)?;
            measure_suite(&suite, &g).map_err(|e| Failure::Domain(e.into()))?
        }
        (None, Some(t)) => {
            let traces = load_traces(t)?;
            measure_traces(&traces, &sc).map_err(|e| Failure::Domain(e.into()))?
        }
        (None, None) => {
            return Err(Failure::Input(anyhow!(
                "one of --suite or --trace is required"
            )))
        }
    };
    if let Some(p) = output {
        write(p, &to_json(&report))?;
    }
    Ok(report.to_string())
}

#[allow(clippy::too_many_arguments)]
fn minimize(
    model: &Path,
    suite: &Path,
    mode: Mode,
    criteria: &[Criterion],
    nc_table: bool,
    output: &Option<PathBuf>,
    plain: bool,
) -> Outcome {
    let sc = load_model(model)?;
    let g = load_graph(&sc)?;
    let suite = load_suite(suite, &g)?;
    let mut out = String::new();
    if nc_table {
        out.push_str(&compute_nc(&suite).to_string());
        out.push('\n');
    }
    let (reduced, label) = match mode {
        Mode::Subsumption => (effective_set(&suite), "subsumption".to_string()),
        Mode::Setcover => {
            let names: Vec<&str> = criteria.iter().map(|c| c.name()).collect();
            let reduced =
                setcover_reduce(&suite, &g, criteria).map_err(|e| Failure::Domain(e.into()))?;
            (reduced, format!("setcover {}", names.join(",")))
        }
    };
    writeln!(out, "retained {} of {} cases:", reduced.len(), suite.len()).unwrap();
    out.push_str(&render_plain(&reduced));
    save_suite(output, plain, &g.name, &label, &reduced)?;
    Ok(out)
}

fn describe_end(end: &TraceEnd) -> String {
    match end {
        TraceEnd::Completed => "completed".into(),
        TraceEnd::Refused { state, event } => format!("refused {event} in {state}"),
        TraceEnd::Nondeterminism { state, candidates } => {
            format!("nondeterminism in {state} ({})", candidates.join(", "))
        }
        TraceEnd::Livelock { state } => format!("livelock suspected in {state}"),
        TraceEnd::Error { message } => format!("error: {message}"),
    }
}

fn run(
    model: &Path,
    scenario: &Path,
    report: bool,
    strict: bool,
    output: &Option<PathBuf>,
) -> Outcome {
    let sc = load_model(model)?;
    let text = read(scenario)?;
    let scenarios = parse_scenarios(&text, &sc)
        .map_err(|e| Failure::Input(anyhow!("{}:{e}", scenario.display())))?;
    let traces: Vec<Trace> = scenarios.iter().map(|s| run_scenario(&sc, s)).collect();
    let mut out = String::new();
    for t in &traces {
        writeln!(
            out,
            "{}: fired ({}), final state {}, {}",
            t.scenario,
            t.fired().join(", "),
            t.final_state,
            describe_end(&t.end)
        )
        .unwrap();
    }
    if report {
        let cov = measure_traces(&traces, &sc).map_err(|e| Failure::Domain(e.into()))?;
        out.push('\n');
        out.push_str(&cov.to_string());
    }
    if let Some(p) = output {
        write(p, &to_json(&traces))?;
    }
    if strict {
        if let Some(bad) = traces.iter().find(|t| t.end != TraceEnd::Completed) {
            let err = anyhow!("scenario {}: {}", bad.scenario, describe_end(&bad.end));
            return Err(Failure::Partial(out, err));
        }
    }
    Ok(out)
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Validate { model } => validate(model),
        Command::Graph { model, dot } => graph(model, dot),
        Command::Generate {
            model,
            method,
            k,
            embed,
            output,
            plain,
        } => {
            if *embed && !matches!(method, Method::Ktrans) {
                bail_input("--embed applies only to --method ktrans")?;
            }
            generate(model, *method, *k, *embed, output, *plain)
        }
        Command::Coverage {
            model,
            suite,
            trace,
            output,
        } => coverage(model, suite, trace, output),
        Command::Minimize {
            model,
            suite,
            mode,
            criteria,
            nc_table,
            output,
            plain,
        } => {
            if criteria.contains(&Criterion::Condition) {
                bail_input(
                    "--criteria: condition coverage needs traces and cannot drive setcover",
                )?;
            }
            minimize(model, suite, *mode, criteria, *nc_table, output, *plain)
        }
        Command::Run {
            model,
            scenario,
            report,
            strict,
            output,
        } => run(model, scenario, *report, *strict, output),
    }
}

fn bail_input(msg: &str) -> Result<(), Failure> {
    Err(Failure::Input(anyhow!("{msg}")))
}

/// Captured result of one command-line invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invocation {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn invoke<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let done = |code, stdout: String, stderr: String| Invocation {
        code,
        stdout,
        stderr,
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                done(2, String::new(), text)
            } else {
                done(0, text, String::new())
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(out) => done(0, out, String::new()),
        Err(Failure::Domain(e)) => done(1, String::new(), format!("error: {e:#}\n")),
        Err(Failure::Partial(out, e)) => done(1, out, format!("error: {e:#}\n")),
        Err(Failure::Input(e)) => done(2, String::new(), format!("error: {e:#}\n")),
    }
}
