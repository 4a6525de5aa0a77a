//! Graph-driven program transformations.
//!
//! Three rewrites share this module: dead-code elimination, constant
//! propagation, and induction-variable detection. All three reason over the
//! expanded instance stream rather than the raw syntax, so loop iterations
//! and guarded statements are handled by the same window arguments.
//!
//! Reported labels always refer to the instruction numbering of the program
//! as it was handed in, even though elimination rebuilds (and renumbers) the
//! program between rounds.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::ast::{
    DeclEntry, Expr, InstrKind, InstrSlot, LValue, LoopId, MemLocation, Program, StmtId, StmtNode,
    VarKind,
};
use crate::classifier::{classify_instruction, InstrAccess, InstrClass};
use crate::expand::{expand_loops, ExpandError, ExpandedProgram};
use crate::frontend::parse_program;
use crate::graph::{build_graph, DdiGraph};
use crate::pretty::program_source;

/// What a transformation did, in terms of the original instruction labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransformReport {
    /// Instructions deleted outright.
    pub removed_instructions: Vec<String>,
    /// `(label, variable)` pairs for initializers stripped from declarations.
    pub removed_initializers: Vec<(String, String)>,
    /// Declared names dropped because nothing references them.
    pub removed_variables: Vec<String>,
    /// `(label, variable, constant)` for each read replaced by a literal.
    pub rewritten_reads: Vec<(String, String, i64)>,
    pub induction_basic: Vec<String>,
    pub induction_refined: Vec<String>,
    /// Basic induction variables whose update mixes in other variables.
    pub flagged: Vec<String>,
    pub induction_derived: Vec<String>,
}

// ---------------------------------------------------------------------------
// Dead-code elimination
// ---------------------------------------------------------------------------

/// Remove writes whose values are never read and declarations nothing uses.
///
/// A top-level unguarded write is dead when, up to and including the next
/// certain overwrite of the same location, no instance reads the location and
/// no guarded or in-loop write touches it (such a write would make the
/// overwrite uncertain). Removal repeats to a fixpoint, since deleting one
/// dead write can orphan the one feeding it.
pub fn eliminate_dead_code(
    prog: &Program,
    unroll_cap: usize,
) -> Result<(Program, TransformReport), ExpandError> {
    let mut current = prog.clone();
    // Original label for each instruction record of `current`.
    let mut orig: Vec<u32> = current.instructions.iter().map(|i| i.index).collect();
    let mut report = TransformReport::default();
    loop {
        let xp = expand_loops(&current, unroll_cap)?;
        let mut removed_stmts: BTreeSet<StmtId> = BTreeSet::new();
        let mut stripped: Vec<(StmtId, usize)> = Vec::new();
        let mut removed_recs: BTreeSet<usize> = BTreeSet::new();
        for (rec, instr) in current.instructions.iter().enumerate() {
            if !instr.loops.is_empty() || instr.guarded {
                continue;
            }
            let eligible = match (&current.stmt(instr.stmt).node, instr.slot) {
                (StmtNode::Assign { target, .. }, InstrSlot::Whole) => {
                    matches!(target, LValue::Scalar(_) | LValue::ArrayElem(..))
                }
                (StmtNode::Decl { .. }, InstrSlot::DeclEntry(_)) => true,
                _ => false,
            };
            if !eligible {
                continue;
            }
            let inst = xp
                .instances
                .iter()
                .find(|i| i.instr == rec)
                .expect("a top-level record expands to exactly one instance");
            let InstrAccess::Pair(pair) = &inst.access else {
                continue;
            };
            let loc = pair.writes[0].clone();
            let start = inst.label.seq;
            let close = xp
                .instances
                .iter()
                .filter(|i| i.label.seq > start)
                .filter(|i| {
                    let ii = &current.instructions[i.instr];
                    ii.loops.is_empty() && !ii.guarded
                })
                .filter(|i| matches!(&i.access, InstrAccess::Pair(p) if p.writes.contains(&loc)))
                .map(|i| i.label.seq)
                .min()
                .unwrap_or(u32::MAX);
            let mut live = false;
            for i in &xp.instances {
                // The closing write itself may read the old value first
                // (`a=a+1`), so reads block up to and including `close`.
                if i.label.seq <= start || i.label.seq > close {
                    continue;
                }
                let InstrAccess::Pair(p) = &i.access else {
                    continue;
                };
                if p.reads.contains(&loc) {
                    live = true;
                    break;
                }
                if i.label.seq < close && p.writes.contains(&loc) {
                    let ii = &current.instructions[i.instr];
                    if !ii.loops.is_empty() || ii.guarded {
                        live = true;
                        break;
                    }
                }
            }
            if live {
                continue;
            }
            removed_recs.insert(rec);
            match instr.slot {
                InstrSlot::Whole => {
                    removed_stmts.insert(instr.stmt);
                    report.removed_instructions.push(orig[rec].to_string());
                }
                InstrSlot::DeclEntry(entry) => {
                    stripped.push((instr.stmt, entry));
                    let name = loc.var_name().expect("initializer writes a variable");
                    report
                        .removed_initializers
                        .push((orig[rec].to_string(), name.to_string()));
                }
                _ => unreachable!("eligibility admits only whole assignments and initializers"),
            }
        }
        if removed_recs.is_empty() {
            break;
        }
        current.top.retain(|id| !removed_stmts.contains(id));
        for (sid, entry) in stripped {
            if let StmtNode::Decl { entries } = &mut current.stmts[sid].node {
                if let DeclEntry::Scalar { init, .. } = &mut entries[entry] {
                    *init = None;
                }
            }
        }
        let survivors: Vec<u32> = orig
            .iter()
            .enumerate()
            .filter(|(rec, _)| !removed_recs.contains(rec))
            .map(|(_, label)| *label)
            .collect();
        current = rebuild(&current);
        assert_eq!(current.instructions.len(), survivors.len());
        orig = survivors;
    }
    remove_unused_variables(&mut current, unroll_cap, &mut report)?;
    report
        .removed_instructions
        .sort_by_key(|s| s.parse::<u32>().expect("labels are numeric"));
    report.removed_initializers.sort_by(|a, b| {
        let ka = a.0.parse::<u32>().expect("labels are numeric");
        let kb = b.0.parse::<u32>().expect("labels are numeric");
        (ka, &a.1).cmp(&(kb, &b.1))
    });
    Ok((current, report))
}

/// Drop declared names whose graph nodes touch no edge at all.
///
/// A pointer binding draws a dashed edge, which keeps both the pointer and
/// its pointee alive here. Arrays count as unused only when no element node
/// exists.
fn remove_unused_variables(
    current: &mut Program,
    unroll_cap: usize,
    report: &mut TransformReport,
) -> Result<(), ExpandError> {
    let xp = expand_loops(current, unroll_cap)?;
    let g = build_graph(current, &xp);
    let mut degree: HashMap<usize, usize> = HashMap::new();
    for e in &g.edges {
        *degree.entry(e.src).or_insert(0) += 1;
        *degree.entry(e.dst).or_insert(0) += 1;
    }
    let mut dead: Vec<String> = Vec::new();
    for decl in &current.decls {
        let unused = match decl.kind {
            VarKind::Scalar => node_degree(&g, &degree, &MemLocation::Scalar(decl.name.clone()))
                == Some(0),
            VarKind::Pointer => node_degree(&g, &degree, &MemLocation::Pointer(decl.name.clone()))
                == Some(0),
            VarKind::Array => !g
                .nodes
                .iter()
                .any(|n| matches!(n, MemLocation::ArrayElem(b, _) if b == &decl.name)),
        };
        if unused {
            dead.push(decl.name.clone());
        }
    }
    if dead.is_empty() {
        return Ok(())
    }
    let record_count = current.instructions.len();
    for stmt in &mut current.stmts {
        if let StmtNode::Decl { entries } = &mut stmt.node {
            entries.retain(|e| !dead.contains(&e.name().to_string()));
        }
    }
    let empty_decls: Vec<StmtId> = current
        .top
        .iter()
        .copied()
        .filter(|&id| matches!(&current.stmts[id].node, StmtNode::Decl { entries } if entries.is_empty()))
        .collect();
    current.top.retain(|id| !empty_decls.contains(id));
    *current = rebuild(current);
    assert_eq!(current.instructions.len(), record_count);
    report.removed_variables = dead;
    Ok(())
}

fn node_degree(g: &DdiGraph, degree: &HashMap<usize, usize>, loc: &MemLocation) -> Option<usize> {
    g.nodes
        .iter()
        .position(|n| n == loc)
        .map(|ix| degree.get(&ix).copied().unwrap_or(0))
}

/// Render the mutated tree and reparse it, refreshing every derived table.
fn rebuild(current: &Program) -> Program {
    let src = program_source(current);
    parse_program(&src).expect("a rendered program parses back")
}

// ---------------------------------------------------------------------------
// Constant propagation
// ---------------------------------------------------------------------------

/// Replace variable reads by literals where a single assignment covers them.
///
/// A source is an unguarded non-header assignment (or initializer) of one
/// literal to a scalar; its window runs from each of its instances to the
/// next write of that variable. A `break` or `continue` also ends windows of
/// every variable written in its loop nest, and no statement inside such a
/// nest can be a source — a taken jump would make its last execution
/// uncertain. A read is rewritten only when every one of its instances falls
/// in a window of the same source statement. Rewrites mutate expressions in
/// place; with `iterate` the analysis reruns until nothing changes, letting
/// copies of copies collapse.
pub fn propagate_constants(
    prog: &Program,
    unroll_cap: usize,
    iterate: bool,
) -> Result<(Program, TransformReport), ExpandError> {
    let mut current = prog.clone();
    let mut report = TransformReport::default();
    loop {
        let xp = expand_loops(&current, unroll_cap)?;
        let rewrites = plan_rewrites(&current, &xp);
        if rewrites.is_empty() {
            break;
        }
        for (rec, var, value) in rewrites {
            let sid = current.instructions[rec].stmt;
            match &mut current.stmts[sid].node {
                StmtNode::Assign { value: e, .. } => {
                    replace_var(e, &var, value);
                }
                StmtNode::If { lhs, rhs, .. } => {
                    replace_var(lhs, &var, value);
                    replace_var(rhs, &var, value);
                }
                StmtNode::Print { args } => {
                    for arg in args {
                        replace_var(arg, &var, value);
                    }
                }
                _ => unreachable!("only expression-bearing statements are planned"),
            }
            let entry = (
                current.instructions[rec].index.to_string(),
                var.clone(),
                value,
            );
            if !report.rewritten_reads.contains(&entry) {
                report.rewritten_reads.push(entry);
            }
        }
        if !iterate {
            break;
        }
    }
    report.rewritten_reads.sort_by(|a, b| {
        let ka = a.0.parse::<u32>().expect("labels are numeric");
        let kb = b.0.parse::<u32>().expect("labels are numeric");
        (ka, &a.1).cmp(&(kb, &b.1))
    });
    Ok((current, report))
}

struct Source {
    record: usize,
    value: i64,
    /// Open `(start, end)` intervals, one per instance of the source.
    windows: Vec<(u32, u32)>,
}

/// Decide `(record, variable, constant)` rewrites for one round.
fn plan_rewrites(prog: &Program, xp: &ExpandedProgram) -> Vec<(usize, String, i64)> {
    // Sorted close events per variable: every write, plus every jump whose
    // loop nest writes the variable.
    let mut closes: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut nest_writes_memo: HashMap<LoopId, BTreeSet<String>> = HashMap::new();
    for inst in &xp.instances {
        match &inst.access {
            InstrAccess::Pair(pair) => {
                for w in &pair.writes {
                    if let MemLocation::Scalar(v) = w {
                        closes.entry(v.clone()).or_default().push(inst.label.seq);
                    }
                }
            }
            _ => {
                let instr = &prog.instructions[inst.instr];
                if !is_jump(prog, inst.instr) || instr.loops.is_empty() {
                    continue;
                }
                let nest = instr.loops[0];
                let written = nest_writes_memo
                    .entry(nest)
                    .or_insert_with(|| nest_scalar_writes(prog, xp, nest))
                    .clone();
                for v in written {
                    closes.entry(v).or_default().push(inst.label.seq);
                }
            }
        }
    }
    for seqs in closes.values_mut() {
        seqs.sort_unstable();
    }
    let mut jumpy_nests: HashMap<LoopId, bool> = HashMap::new();
    let mut sources: BTreeMap<String, Vec<Source>> = BTreeMap::new();
    let mut instances_of: HashMap<usize, Vec<u32>> = HashMap::new();
    for inst in &xp.instances {
        instances_of.entry(inst.instr).or_default().push(inst.label.seq);
    }
    for (rec, instr) in prog.instructions.iter().enumerate() {
        if instr.guarded {
            continue;
        }
        let literal = match (&prog.stmt(instr.stmt).node, instr.slot) {
            (StmtNode::Assign { target: LValue::Scalar(v), value: Expr::Const(k) }, InstrSlot::Whole) => {
                Some((v.clone(), *k))
            }
            (StmtNode::Decl { entries }, InstrSlot::DeclEntry(pos)) => match &entries[pos] {
                DeclEntry::Scalar { name, init: Some(k) } => Some((name.clone(), *k)),
                _ => None,
            },
            _ => None,
        };
        let Some((var, value)) = literal else {
            continue;
        };
        if let Some(&outermost) = instr.loops.first() {
            let jumpy = *jumpy_nests
                .entry(outermost)
                .or_insert_with(|| nest_contains_jump(prog, outermost));
            if jumpy {
                continue;
            }
        }
        let empty = Vec::new();
        let close_seqs = closes.get(&var).unwrap_or(&empty);
        let windows = instances_of
            .get(&rec)
            .map(|seqs| {
                seqs.iter()
                    .map(|&s| {
                        let end = close_seqs
                            .iter()
                            .find(|&&c| c > s)
                            .copied()
                            .unwrap_or(u32::MAX);
                        (s, end)
                    })
                    .collect()
            })
            .unwrap_or_default();
        sources
            .entry(var)
            .or_default()
            .push(Source { record: rec, value, windows });
    }
    let mut plans = Vec::new();
    for (rec, instr) in prog.instructions.iter().enumerate() {
        if instr.slot != InstrSlot::Whole {
            continue;
        }
        let mut vars: BTreeSet<String> = BTreeSet::new();
        match &prog.stmt(instr.stmt).node {
            StmtNode::Assign { value, .. } => rewritable_vars(prog, value, &mut vars),
            StmtNode::If { lhs, rhs, .. } => {
                rewritable_vars(prog, lhs, &mut vars);
                rewritable_vars(prog, rhs, &mut vars);
            }
            StmtNode::Print { args } => {
                for a in args {
                    rewritable_vars(prog, a, &mut vars);
                }
            }
            _ => continue,
        }
        let Some(seqs) = instances_of.get(&rec) else {
            continue;
        };
        for var in vars {
            let Some(cands) = sources.get(&var) else {
                continue;
            };
            for source in cands {
                if source.record == rec {
                    continue;
                }
                let covered = seqs.iter().all(|&s| {
                    source.windows.iter().any(|&(lo, hi)| lo < s && s < hi)
                });
                if covered {
                    plans.push((rec, var.clone(), source.value));
                    break;
                }
            }
        }
    }
    plans
}

fn is_jump(prog: &Program, rec: usize) -> bool {
    let instr = &prog.instructions[rec];
    instr.kind == InstrKind::ControlTransfer
        && matches!(prog.stmt(instr.stmt).node, StmtNode::Jump(_))
}

/// Scalars written anywhere inside the given loop, nested loops included.
fn nest_scalar_writes(prog: &Program, xp: &ExpandedProgram, nest: LoopId) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for inst in &xp.instances {
        if !prog.instructions[inst.instr].loops.contains(&nest) {
            continue;
        }
        if let InstrAccess::Pair(pair) = &inst.access {
            for w in &pair.writes {
                if let MemLocation::Scalar(v) = w {
                    out.insert(v.clone());
                }
            }
        }
    }
    out
}

fn nest_contains_jump(prog: &Program, nest: LoopId) -> bool {
    (0..prog.instructions.len())
        .any(|rec| is_jump(prog, rec) && prog.instructions[rec].loops.contains(&nest))
}

/// Scalar reads eligible for rewriting: plain variable positions outside
/// subscripts, dereferences, and loop bounds.
fn rewritable_vars(prog: &Program, e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Var(n) => {
            if prog.var_kind(n) == Some(VarKind::Scalar) {
                out.insert(n.clone());
            }
        }
        Expr::Neg(inner) => rewritable_vars(prog, inner, out),
        Expr::Binary(_, l, r) => {
            rewritable_vars(prog, l, out);
            rewritable_vars(prog, r, out);
        }
        Expr::Const(_) | Expr::ArrayElem(..) | Expr::Deref(_) => {}
    }
}

fn replace_var(e: &mut Expr, var: &str, value: i64) {
    match e {
        Expr::Var(n) if n == var => *e = Expr::Const(value),
        Expr::Neg(inner) => replace_var(inner, var, value),
        Expr::Binary(_, l, r) => {
            replace_var(l, var, value);
            replace_var(r, var, value);
        }
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// Induction-variable detection
// ---------------------------------------------------------------------------

/// Classify loop-updated variables by their self-dependence structure.
///
/// A location is a basic induction candidate when it carries a solid
/// self-edge written by a loop increment or an in-loop instruction. It is
/// refined when every self-updating instance reads nothing beyond the
/// location itself and literals, and flagged otherwise. A derived candidate
/// hangs off a basic one: an in-loop read-write instruction feeds it using
/// only basic locations and literals.
pub fn detect_induction_variables(
    prog: &Program,
    xp: &ExpandedProgram,
    g: &DdiGraph,
) -> TransformReport {
    let mut report = TransformReport::default();
    let mut basic: BTreeSet<MemLocation> = BTreeSet::new();
    for e in g.solid_edges() {
        if e.src != e.dst || g.nodes[e.src].is_sentinel() {
            continue;
        }
        let instr = &prog.instructions[xp.by_seq(e.label.seq).instr];
        if instr.slot == InstrSlot::LoopIncr || !instr.loops.is_empty() {
            basic.insert(g.nodes[e.src].clone());
        }
    }
    let mut refined: BTreeSet<MemLocation> = BTreeSet::new();
    for node in &basic {
        let ix = g.nodes.iter().position(|n| n == node).expect("node exists");
        let pure = g
            .solid_edges()
            .filter(|e| e.src == ix && e.dst == ix)
            .all(|e| {
                let inst = xp.by_seq(e.label.seq);
                match &inst.access {
                    InstrAccess::Pair(p) => p
                        .reads
                        .iter()
                        .all(|r| r == node || *r == MemLocation::Pr),
                    _ => true,
                }
            });
        if pure {
            refined.insert(node.clone());
        }
    }
    let mut derived: BTreeSet<MemLocation> = BTreeSet::new();
    for (ix, node) in g.nodes.iter().enumerate() {
        if node.is_sentinel() || basic.contains(node) {
            continue;
        }
        let fed = g.solid_edges().any(|e| {
            if e.dst != ix || !basic.contains(&g.nodes[e.src]) {
                return false;
            }
            let inst = xp.by_seq(e.label.seq);
            let instr = &prog.instructions[inst.instr];
            if instr.loops.is_empty() || classify_instruction(prog, instr) != InstrClass::Marw {
                return false;
            }
            match &inst.access {
                InstrAccess::Pair(p) => p
                    .reads
                    .iter()
                    .all(|r| basic.contains(r) || *r == MemLocation::Pr),
                _ => false,
            }
        });
        if fed {
            derived.insert(node.clone());
        }
    }
    report.induction_basic = basic.iter().map(|n| n.to_string()).collect();
    report.induction_refined = refined.iter().map(|n| n.to_string()).collect();
    report.flagged = basic.difference(&refined).map(|n| n.to_string()).collect();
    report.induction_derived = derived.iter().map(|n| n.to_string()).collect();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::DEFAULT_UNROLL_CAP;
    use crate::interp::interpret;

    fn parsed(src: &str) -> Program {
        parse_program(src).expect("source parses")
    }

    fn dce(src: &str) -> (Program, TransformReport) {
        eliminate_dead_code(&parsed(src), DEFAULT_UNROLL_CAP).expect("elimination succeeds")
    }

    fn cp(src: &str, iterate: bool) -> (Program, TransformReport) {
        propagate_constants(&parsed(src), DEFAULT_UNROLL_CAP, iterate)
            .expect("propagation succeeds")
    }

    #[test]
    fn dce_removes_dead_write_initializer_and_variables() {
        let src = "int a,b=3,c=5,d;\na=b+5;\nd=b*10;\nprint d;\n";
        let (out, report) = dce(src);
        assert_eq!(report.removed_instructions, vec!["2"]);
        assert_eq!(report.removed_initializers, vec![("1".to_string(), "c".to_string())]);
        assert_eq!(report.removed_variables, vec!["a", "c"]);
        assert_eq!(program_source(&out), "int b=3,d;\nd=b*10;\nprint d;\n");
        let before = interpret(&parsed(src), &[]).expect("runs").printed;
        let after = interpret(&out, &[]).expect("runs").printed;
        assert_eq!(before, vec![30]);
        assert_eq!(after, before);
    }

    #[test]
    fn dce_keeps_writes_that_feed_later_reads() {
        let src = "int a,b=3,c=5,d;\na=b+5;\nd=b*c;\na=b+c;\nprint a,d;\n";
        let (out, report) = dce(src);
        assert_eq!(report.removed_instructions, vec!["2"]);
        assert!(report.removed_initializers.is_empty());
        assert!(report.removed_variables.is_empty());
        assert_eq!(interpret(&out, &[]).expect("runs").printed, vec![8, 15]);
    }

    #[test]
    fn dce_chases_chains_to_a_fixpoint() {
        let (out, report) = dce("int a,b;\na=1;\nb=a;\n");
        assert_eq!(report.removed_instructions, vec!["1", "2"]);
        assert_eq!(report.removed_variables, vec!["a", "b"]);
        assert_eq!(program_source(&out), "");
    }

    #[test]
    fn dce_counts_a_read_statement_as_an_overwrite() {
        let (out, report) = dce("int a;\na=5;\nread a;\nprint a;\n");
        assert_eq!(report.removed_instructions, vec!["1"]);
        assert_eq!(program_source(&out), "int a;\nread a;\nprint a;\n");
        assert_eq!(interpret(&out, &[9]).expect("runs").printed, vec![9]);
    }

    #[test]
    fn dce_respects_read_modify_write_overwrites() {
        // `a=a+1` overwrites `a=5` but reads it first, so neither write is
        // removable while `print` keeps the chain alive.
        let src = "int a;\na=5;\na=a+1;\nprint a;\n";
        let (out, report) = dce(src);
        assert!(report.removed_instructions.is_empty());
        assert_eq!(interpret(&out, &[]).expect("runs").printed, vec![6]);
    }

    #[test]
    fn dce_leaves_writes_shadowed_only_by_guarded_ones() {
        let (out, report) = dce("int c,x;\nread x;\nc=5;\nif(x>0)\n  c=9;\n");
        assert!(report.removed_instructions.is_empty());
        assert_eq!(program_source(&out), "int c,x;\nread x;\nc=5;\nif(x>0)\n  c=9;\n");
    }

    #[test]
    fn dce_keeps_a_write_a_loop_may_fail_to_overwrite() {
        let src = "int c,i,x;\nread x;\nc=5;\nfor(i=1;i<3;i++) {\n  if(i==x)\n    break;\n  c=9;\n}\nprint c;\n";
        let (_, report) = dce(src);
        assert!(report.removed_instructions.is_empty());
    }

    #[test]
    fn dce_removes_dead_array_writes_and_untouched_arrays() {
        let (out, report) = dce("int r[],s[],a;\nr[1]=5;\na=2;\nprint a;\n");
        assert_eq!(report.removed_instructions, vec!["1"]);
        assert_eq!(report.removed_variables, vec!["r", "s"]);
        assert_eq!(program_source(&out), "int a;\na=2;\nprint a;\n");
    }

    #[test]
    fn dce_never_touches_pointer_bindings_or_their_endpoints() {
        let src = "int a,*p;\np=&a;\n";
        let (out, report) = dce(src);
        assert!(report.removed_instructions.is_empty());
        assert!(report.removed_variables.is_empty());
        assert_eq!(program_source(&out), src);
    }

    #[test]
    fn cp_rewrites_a_covered_read() {
        let src = "int a,b=3,c;\na=b+5;\nc=a;\nprint c;\n";
        let (out, report) = cp(src, false);
        assert_eq!(
            report.rewritten_reads,
            vec![("2".to_string(), "b".to_string(), 3)]
        );
        assert_eq!(program_source(&out), "int a,b=3,c;\na=3+5;\nc=a;\nprint c;\n");
        assert_eq!(interpret(&out, &[]).expect("runs").printed, vec![8]);
    }

    #[test]
    fn cp_iteration_collapses_copy_chains() {
        let src = "int a,b,c;\na=5;\nb=a;\nc=b;\nprint c;\n";
        let (out, report) = cp(src, false);
        assert_eq!(program_source(&out), "int a,b,c;\na=5;\nb=5;\nc=b;\nprint c;\n");
        assert_eq!(report.rewritten_reads.len(), 1);
        let (out, report) = cp(src, true);
        assert_eq!(program_source(&out), "int a,b,c;\na=5;\nb=5;\nc=5;\nprint 5;\n");
        assert_eq!(
            report.rewritten_reads,
            vec![
                ("2".to_string(), "a".to_string(), 5),
                ("3".to_string(), "b".to_string(), 5),
                ("4".to_string(), "c".to_string(), 5),
            ]
        );
        assert_eq!(interpret(&out, &[]).expect("runs").printed, vec![5]);
    }

    #[test]
    fn cp_windows_close_at_the_next_write() {
        let src = "int b,d,e;\nb=3;\nd=b;\nb=7;\ne=b;\nprint d,e;\n";
        let (out, report) = cp(src, false);
        assert_eq!(
            program_source(&out),
            "int b,d,e;\nb=3;\nd=3;\nb=7;\ne=7;\nprint d,e;\n"
        );
        assert_eq!(report.rewritten_reads.len(), 2);
        assert_eq!(interpret(&out, &[]).expect("runs").printed, vec![3, 7]);
    }

    #[test]
    fn cp_rewrites_guarded_reads_under_an_unguarded_source() {
        let src = "int b,d,x;\nread x;\nb=3;\nif(x>0)\n  d=b;\nprint d;\n";
        let (out, report) = cp(src, false);
        assert_eq!(
            report.rewritten_reads,
            vec![("4".to_string(), "b".to_string(), 3)]
        );
        assert!(program_source(&out).contains("d=3;"));
    }

    #[test]
    fn cp_refuses_sources_in_nests_a_jump_can_cut_short() {
        let src = "int c,i,x;\nread x;\nc=5;\nfor(i=1;i<3;i++) {\n  if(i==x)\n    break;\n  c=9;\n}\nprint c;\n";
        let (out, report) = cp(src, true);
        assert!(report.rewritten_reads.is_empty());
        assert_eq!(program_source(&out), src);
    }

    #[test]
    fn cp_rewrites_values_but_never_subscripts_or_bounds() {
        let src = "int a[],b,i;\nb=2;\nfor(i=0;i<3;i++) {\n  a[i]=a[i]+b;\n}\n";
        let (out, report) = cp(src, true);
        assert_eq!(
            report.rewritten_reads,
            vec![("5".to_string(), "b".to_string(), 2)]
        );
        assert_eq!(
            program_source(&out),
            "int a[],b,i;\nb=2;\nfor(i=0;i<3;i++) {\n  a[i]=a[i]+2;\n}\n"
        );
        // A variable loop bound makes expansion impossible, so propagation
        // reports that instead of guessing.
        let symbolic = parsed("int b,i,s;\nb=2;\nfor(i=0;i<b;i++) {\n  s=s+1;\n}\n");
        assert!(propagate_constants(&symbolic, DEFAULT_UNROLL_CAP, false).is_err());
    }

    #[test]
    fn cp_propagates_into_loop_bodies() {
        let src = "int a[],b,i;\nb=2;\nfor(i=0;i<3;i++) {\n  a[i]=b;\n}\n";
        let (out, report) = cp(src, false);
        assert_eq!(
            report.rewritten_reads,
            vec![("5".to_string(), "b".to_string(), 2)]
        );
        assert!(program_source(&out).contains("a[i]=2;"));
    }

    #[test]
    fn induction_detection_separates_all_four_classes() {
        let src = "int s,i,c;\ns=0;\nfor(i=1;i<2;i++) {\n  s=s+i;\n  c=s*5;\n}\n";
        let prog = parsed(src);
        let xp = expand_loops(&prog, DEFAULT_UNROLL_CAP).expect("expansion succeeds");
        let g = build_graph(&prog, &xp);
        let report = detect_induction_variables(&prog, &xp, &g);
        assert_eq!(report.induction_basic, vec!["i", "s"]);
        assert_eq!(report.induction_refined, vec!["i"]);
        assert_eq!(report.flagged, vec!["s"]);
        assert_eq!(report.induction_derived, vec!["c"]);
    }

    #[test]
    fn induction_detection_ignores_straight_line_updates() {
        let prog = parsed("int a;\na=a+1;\n");
        let xp = expand_loops(&prog, DEFAULT_UNROLL_CAP).expect("expansion succeeds");
        let g = build_graph(&prog, &xp);
        let report = detect_induction_variables(&prog, &xp, &g);
        assert!(report.induction_basic.is_empty());
        assert!(report.induction_derived.is_empty());
    }

    #[test]
    fn reports_serialize_with_stable_field_names() {
        let report = TransformReport {
            removed_instructions: vec!["2".into()],
            removed_initializers: vec![("1".into(), "c".into())],
            rewritten_reads: vec![("2".into(), "b".into(), 3)],
            ..TransformReport::default()
        };
        let json = serde_json::to_value(&report).expect("serializes");
        assert_eq!(json["removed_instructions"], serde_json::json!(["2"]));
        assert_eq!(json["removed_initializers"], serde_json::json!([["1", "c"]]));
        assert_eq!(json["rewritten_reads"], serde_json::json!([["2", "b", 3]]));
        assert_eq!(json["induction_basic"], serde_json::json!([]));
    }
}
