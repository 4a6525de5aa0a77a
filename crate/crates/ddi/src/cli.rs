//! Command-line interface.
//!
//! Five subcommands over one pipeline: `graph` renders the dependence graph
//! (DOT, adjacency matrix, or JSON), `deps` lists dependences and per-loop
//! verdicts, `transform` runs one rewrite, `verify` cross-checks the graph
//! analysis against the brute-force reference, and `fmt` reprints a program
//! canonically. A positional input of `-` (or none) reads standard input.
//!
//! Exit codes: 0 success, 1 analysis failure (unexpandable program, closure
//! blow-up, verification mismatch), 2 usage or I/O error, 3 parse error.

use std::io::{IsTerminal, Read, Write};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analyzer::{
    dependence_closure, find_dependences, parallelizability_report, Dependence, LoopVerdict,
    DEFAULT_CLOSURE_CAP,
};
use crate::ast::Program;
use crate::expand::{expand_loops, ExpandedProgram, DEFAULT_UNROLL_CAP};
use crate::frontend::parse_program;
use crate::generator::{generate_program, GenConfig};
use crate::graph::{adjacency_matrix, build_graph, graph_dot, graph_json, matrix_text};
use crate::oracle::{brute_force_dependences, diff_dependences};
use crate::pretty::program_source;
use crate::transforms::{
    detect_induction_variables, eliminate_dead_code, propagate_constants, TransformReport,
};

#[derive(Parser)]
#[command(
    name = "ddi",
    version,
    about = "Dependence-graph analysis for a small imperative language"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dependence graph (DOT by default)
    Graph(GraphArgs),
    /// List dependences, loop verdicts, and optionally the closure
    Deps(DepsArgs),
    /// Apply one transformation and report what changed
    Transform(TransformArgs),
    /// Check graph-derived dependences against the brute-force reference
    Verify(VerifyArgs),
    /// Reprint a program in canonical layout
    Fmt(FmtArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Source file, or `-` for standard input
    input: Option<String>,
    /// Graphviz DOT output (the default)
    #[arg(long, conflicts_with_all = ["json", "matrix"])]
    dot: bool,
    /// JSON output
    #[arg(long, conflicts_with = "matrix")]
    json: bool,
    /// Adjacency-matrix output
    #[arg(long)]
    matrix: bool,
    /// Largest number of instances to expand to
    #[arg(long, default_value_t = DEFAULT_UNROLL_CAP)]
    unroll_cap: usize,
}

#[derive(Args)]
struct DepsArgs {
    /// Source file, or `-` for standard input
    input: Option<String>,
    /// JSON output
    #[arg(long)]
    json: bool,
    /// Also derive transitively co-occurring instruction pairs
    #[arg(long)]
    closure: bool,
    /// Largest number of closure pairs to derive
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    closure_cap: usize,
    /// Largest number of instances to expand to
    #[arg(long, default_value_t = DEFAULT_UNROLL_CAP)]
    unroll_cap: usize,
}

#[derive(Args)]
struct TransformArgs {
    /// Source file, or `-` for standard input
    input: Option<String>,
    /// Eliminate dead code
    #[arg(long, conflicts_with_all = ["cp", "ivd"])]
    dce: bool,
    /// Propagate constants
    #[arg(long, conflicts_with = "ivd")]
    cp: bool,
    /// Detect induction variables (no rewriting)
    #[arg(long)]
    ivd: bool,
    /// Rerun constant propagation until nothing changes
    #[arg(long, requires = "cp")]
    cp_iterate: bool,
    /// JSON output ({"program": ..., "report": ...})
    #[arg(long)]
    json: bool,
    /// Largest number of instances to expand to
    #[arg(long, default_value_t = DEFAULT_UNROLL_CAP)]
    unroll_cap: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Source file, or `-` for standard input
    #[arg(conflicts_with = "random")]
    input: Option<String>,
    /// Verify this many generated programs instead of one input
    #[arg(long)]
    random: Option<usize>,
    /// First seed for --random
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of instances to expand to
    #[arg(long, default_value_t = DEFAULT_UNROLL_CAP)]
    unroll_cap: usize,
}

#[derive(Args)]
struct FmtArgs {
    /// Source file, or `-` for standard input
    input: Option<String>,
}

/// A failure with its exit code and stderr category.
struct Failure {
    code: i32,
    category: &'static str,
    detail: String,
}

impl Failure {
    fn analysis(detail: impl ToString) -> Self {
        Failure { code: 1, category: "analysis", detail: detail.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, category: "io", detail: e.to_string() }
    }
}

impl From<crate::frontend::FrontendError> for Failure {
    fn from(e: crate::frontend::FrontendError) -> Self {
        Failure { code: 3, category: "parse", detail: e.to_string() }
    }
}

impl From<crate::expand::ExpandError> for Failure {
    fn from(e: crate::expand::ExpandError) -> Self {
        Failure::analysis(e)
    }
}

impl From<crate::analyzer::ClosureError> for Failure {
    fn from(e: crate::analyzer::ClosureError) -> Self {
        Failure::analysis(e)
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            let prefix = if use_color() { "\x1b[31merror\x1b[0m" } else { "error" };
            eprintln!("{prefix}: {}: {}", f.category, f.detail);
            f.code
        }
    }
}

/// True when output should use ANSI colors: `DDI_COLOR=1`/`0` overrides,
/// otherwise color follows whether stdout is a terminal.
fn use_color() -> bool {
    match std::env::var("DDI_COLOR").ok().as_deref() {
        Some("0") => false,
        Some("1") => true,
        _ => std::io::stdout().is_terminal(),
    }
}

/// Write to stdout, treating a closed pipe (`... | head`) as normal
/// termination rather than an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn read_input(path: Option<&str>) -> Result<String, Failure> {
    match path {
        None | Some("-") => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
        Some(p) => Ok(std::fs::read_to_string(p)?),
    }
}

fn load(path: Option<&str>) -> Result<Program, Failure> {
    Ok(parse_program(&read_input(path)?)?)
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Command::Graph(args) => cmd_graph(args),
        Command::Deps(args) => cmd_deps(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Fmt(args) => cmd_fmt(args),
    }
}

fn cmd_graph(args: GraphArgs) -> Result<i32, Failure> {
    let prog = load(args.input.as_deref())?;
    let xp = expand_loops(&prog, args.unroll_cap)?;
    let g = build_graph(&prog, &xp);
    if args.json {
        let payload = serde_json::to_string_pretty(&graph_json(&g)).expect("graph serializes");
        emit(&format!("{payload}\n"));
    } else if args.matrix {
        emit(&matrix_text(&adjacency_matrix(&g)));
    } else {
        emit(&graph_dot(&g));
    }
    Ok(0)
}

#[derive(Serialize)]
struct DepJson {
    kind: &'static str,
    earlier: String,
    later: String,
    location: String,
    carried: bool,
}

impl DepJson {
    fn of(d: &Dependence) -> Self {
        DepJson {
            kind: d.kind.lower(),
            earlier: d.earlier.to_string(),
            later: d.later.to_string(),
            location: d.location.to_string(),
            carried: d.carried,
        }
    }
}

#[derive(Serialize)]
struct LoopJson {
    id: usize,
    var: String,
    parallelizable: bool,
    blockers: Vec<DepJson>,
}

#[derive(Serialize)]
struct DepsJson {
    deps: Vec<DepJson>,
    loops: Vec<LoopJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closure: Option<Vec<[String; 2]>>,
}

fn cmd_deps(args: DepsArgs) -> Result<i32, Failure> {
    let prog = load(args.input.as_deref())?;
    let xp = expand_loops(&prog, args.unroll_cap)?;
    let g = build_graph(&prog, &xp);
    let deps = find_dependences(&g, &prog, &xp);
    let verdicts = parallelizability_report(&deps, &prog, &xp);
    let closure = if args.closure {
        Some(dependence_closure(&g, args.closure_cap)?)
    } else {
        None
    };
    if args.json {
        let payload = DepsJson {
            deps: deps.iter().map(DepJson::of).collect(),
            loops: verdicts
                .iter()
                .map(|v| LoopJson {
                    id: v.id,
                    var: v.var.clone(),
                    parallelizable: v.parallelizable,
                    blockers: v.blockers.iter().map(DepJson::of).collect(),
                })
                .collect(),
            closure: closure.map(|pairs| {
                pairs
                    .iter()
                    .map(|(a, b)| [a.to_string(), b.to_string()])
                    .collect()
            }),
        };
        let text = serde_json::to_string_pretty(&payload).expect("report serializes");
        emit(&format!("{text}\n"));
        return Ok(0);
    }
    let mut out = String::new();
    for d in &deps {
        out.push_str(&d.human_line());
        out.push('\n');
    }
    for v in &verdicts {
        out.push_str(&verdict_line(v));
        out.push('\n');
        for b in &v.blockers {
            out.push_str(&format!("  {}\n", b.human_line()));
        }
    }
    if let Some(pairs) = closure {
        for (a, b) in pairs {
            out.push_str(&format!("CLOSURE {a} <-> {b}\n"));
        }
    }
    emit(&out);
    Ok(0)
}

fn verdict_line(v: &LoopVerdict) -> String {
    let verdict = if v.parallelizable { "parallelizable" } else { "not parallelizable" };
    format!("loop {} ({}): {}", v.id, v.var, verdict)
}

fn cmd_transform(args: TransformArgs) -> Result<i32, Failure> {
    let prog = load(args.input.as_deref())?;
    let (result, report) = if args.dce {
        eliminate_dead_code(&prog, args.unroll_cap)?
    } else if args.cp {
        propagate_constants(&prog, args.unroll_cap, args.cp_iterate)?
    } else if args.ivd {
        let xp = expand_loops(&prog, args.unroll_cap)?;
        let g = build_graph(&prog, &xp);
        let report = detect_induction_variables(&prog, &xp, &g);
        (prog, report)
    } else {
        return Err(Failure {
            code: 2,
            category: "usage",
            detail: "choose one of --dce, --cp, --ivd".to_string(),
        });
    };
    let source = program_source(&result);
    if args.json {
        let payload = serde_json::json!({ "program": source, "report": report });
        let text = serde_json::to_string_pretty(&payload).expect("report serializes");
        emit(&format!("{text}\n"));
        return Ok(0);
    }
    let mut out = source;
    for line in report_lines(&report) {
        out.push_str(&format!("// {line}\n"));
    }
    emit(&out);
    Ok(0)
}

/// Human-readable summary lines, one per non-empty report category.
fn report_lines(report: &TransformReport) -> Vec<String> {
    let mut out = Vec::new();
    if !report.removed_instructions.is_empty() {
        out.push(format!(
            "removed instructions: {}",
            report.removed_instructions.join(", ")
        ));
    }
    if !report.removed_initializers.is_empty() {
        let items: Vec<String> = report
            .removed_initializers
            .iter()
            .map(|(label, var)| format!("{var} ({label})"))
            .collect();
        out.push(format!("removed initializers: {}", items.join(", ")));
    }
    if !report.removed_variables.is_empty() {
        out.push(format!(
            "removed variables: {}",
            report.removed_variables.join(", ")
        ));
    }
    if !report.rewritten_reads.is_empty() {
        let items: Vec<String> = report
            .rewritten_reads
            .iter()
            .map(|(label, var, value)| format!("{var} -> {value} ({label})"))
            .collect();
        out.push(format!("rewritten reads: {}", items.join(", ")));
    }
    for (name, list) in [
        ("induction basic", &report.induction_basic),
        ("induction refined", &report.induction_refined),
        ("induction flagged", &report.flagged),
        ("induction derived", &report.induction_derived),
    ] {
        if !list.is_empty() {
            out.push(format!("{name}: {}", list.join(", ")));
        }
    }
    out
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Failure> {
    let color = use_color();
    let pass = if color { "\x1b[32mPASS\x1b[0m" } else { "PASS" };
    let fail = if color { "\x1b[31mFAIL\x1b[0m" } else { "FAIL" };
    let mut out = String::new();
    if let Some(count) = args.random {
        let mut failures = 0usize;
        for offset in 0..count {
            let seed = args.seed.wrapping_add(offset as u64);
            let cfg = GenConfig { seed, ..GenConfig::default() };
            let src = generate_program(&cfg);
            let prog = parse_program(&src)
                .map_err(|e| Failure::analysis(format!("seed {seed} generated invalid source: {e}")))?;
            let xp = expand_loops(&prog, args.unroll_cap)?;
            if !check_one(&prog, &xp, &format!("seed {seed}"), fail, &mut out) {
                failures += 1;
            }
        }
        out.push_str(&format!("{} passed, {} failed\n", count - failures, failures));
        emit(&out);
        return Ok(if failures == 0 { 0 } else { 1 });
    }
    let prog = load(args.input.as_deref())?;
    let xp = expand_loops(&prog, args.unroll_cap)?;
    let ok = check_one(&prog, &xp, "input", fail, &mut out);
    if ok {
        out.push_str(&format!("{pass}\n"));
    }
    emit(&out);
    Ok(if ok { 0 } else { 1 })
}

/// Compare the graph-derived dependence set with the brute-force one,
/// appending a FAIL line plus the differences when they disagree.
fn check_one(
    prog: &Program,
    xp: &ExpandedProgram,
    what: &str,
    fail: &str,
    out: &mut String,
) -> bool {
    let g = build_graph(prog, xp);
    let ours = find_dependences(&g, prog, xp);
    let reference = brute_force_dependences(prog, xp);
    let diff = diff_dependences(&ours, &reference);
    if diff.is_empty() {
        return true;
    }
    out.push_str(&format!("{fail} {what}\n"));
    for d in &diff.missing {
        out.push_str(&format!("  missing: {}\n", d.human_line()));
    }
    for d in &diff.extra {
        out.push_str(&format!("  extra: {}\n", d.human_line()));
    }
    false
}

fn cmd_fmt(args: FmtArgs) -> Result<i32, Failure> {
    let prog = load(args.input.as_deref())?;
    emit(&program_source(&prog));
    Ok(0)
}
